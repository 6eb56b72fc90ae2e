#include "hrt/nodes/interfaces.hpp"

namespace hrt::nodes {

std::string_view to_string(ResponseKind kind) {
    switch (kind) {
        case ResponseKind::Pending: return "pending";
        case ResponseKind::Accepted: return "accepted";
        case ResponseKind::Rejected: return "rejected";
        case ResponseKind::Completed: return "completed";
    }
    return "?";
}

}  // namespace hrt::nodes
