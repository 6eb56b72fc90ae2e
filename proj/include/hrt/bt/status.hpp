#pragma once

#include <string_view>

namespace hrt::bt {

enum class NodeStatus { Success, Failure, Running };

constexpr std::string_view to_string(NodeStatus status) {
    switch (status) {
        case NodeStatus::Success: return "SUCCESS";
        case NodeStatus::Failure: return "FAILURE";
        case NodeStatus::Running: return "RUNNING";
    }
    return "?";
}

}  // namespace hrt::bt
