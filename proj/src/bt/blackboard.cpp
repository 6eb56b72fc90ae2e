#include "hrt/bt/blackboard.hpp"

namespace hrt::bt {

void Blackboard::erase_prefix(std::string_view prefix) {
    auto it = entries_.lower_bound(std::string(prefix));
    while (it != entries_.end() && std::string_view(it->first).substr(0, prefix.size()) == prefix) {
        it = entries_.erase(it);
    }
}

std::string node_key(std::size_t node_id, std::string_view name) {
    return "node/" + std::to_string(node_id) + "/" + std::string(name);
}

std::string shared_key(std::string_view name) { return "alloc/" + std::string(name); }

}  // namespace hrt::bt
