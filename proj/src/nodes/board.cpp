#include "hrt/nodes/board.hpp"

#include "hrt/alloc/candidates.hpp"

namespace hrt::nodes {

std::set<std::string>& AllocationBoard::acts_to_be_allocated() {
    return entry<std::set<std::string>>("acts_to_be_allocated");
}
std::set<std::string>& AllocationBoard::actions_rejected() { return entry<std::set<std::string>>("actions_rejected"); }
std::map<std::string, std::string>& AllocationBoard::current_allocation() {
    return entry<std::map<std::string, std::string>>("current_allocation");
}
std::map<std::string, AgentRecord>& AllocationBoard::agents() {
    return entry<std::map<std::string, AgentRecord>>("agents");
}
std::set<std::string>& AllocationBoard::locked() { return entry<std::set<std::string>>("locked"); }
std::set<std::string>& AllocationBoard::completed() { return entry<std::set<std::string>>("completed"); }
std::map<std::string, double>& AllocationBoard::start_times() { return entry<std::map<std::string, double>>("start_times"); }
std::map<std::string, double>& AllocationBoard::finish_times() {
    return entry<std::map<std::string, double>>("finish_times");
}
std::map<std::string, double>& AllocationBoard::acknowledged() {
    return entry<std::map<std::string, double>>("acknowledged");
}

std::vector<std::pair<std::string, std::string>> AllocationBoard::allocation_pairs() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [action, candidate] : current_allocation()) {
        out.emplace_back(candidate, action);
    }
    return out;
}

std::optional<std::string> AllocationBoard::candidate_of(const std::string& action) {
    auto& alloc = current_allocation();
    auto it = alloc.find(action);
    if (it == alloc.end()) {
        return std::nullopt;
    }
    return it->second;
}

namespace {

std::vector<std::string> members_of_type(std::map<std::string, AgentRecord>& agents, const std::string& candidate,
                                         plan::WorkerType type) {
    std::vector<std::string> out;
    for (const auto& m : alloc::split_candidate_id(candidate)) {
        auto it = agents.find(m);
        if (it == agents.end()) {
            throw std::logic_error("candidate '" + candidate + "' references unknown worker '" + m + "'");
        }
        if (it->second.type == type) {
            out.push_back(m);
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> AllocationBoard::humans_of(const std::string& candidate) {
    return members_of_type(agents(), candidate, plan::WorkerType::Human);
}

std::vector<std::string> AllocationBoard::robots_of(const std::string& candidate) {
    return members_of_type(agents(), candidate, plan::WorkerType::Robot);
}

bool AllocationBoard::candidate_ready(const std::string& candidate, const std::string& action) {
    auto& all = agents();
    for (const auto& m : alloc::split_candidate_id(candidate)) {
        const auto& rec = all.at(m);
        if (!rec.available && rec.busy_action != action) {
            return false;
        }
    }
    return true;
}

void AllocationBoard::reserve(const std::string& candidate, const std::string& action, double now, double duration) {
    auto& all = agents();
    for (const auto& m : alloc::split_candidate_id(candidate)) {
        auto& rec = all.at(m);
        rec.available = false;
        rec.busy_action = action;
        rec.busy_since = now;
        rec.busy_duration = duration;
    }
}

void AllocationBoard::release(const std::vector<std::string>& workers) {
    auto& all = agents();
    for (const auto& m : workers) {
        auto& rec = all.at(m);
        rec.available = true;
        rec.busy_action.reset();
        rec.busy_since = 0.0;
        rec.busy_duration = 0.0;
    }
}

void AllocationBoard::init_agents(const std::vector<plan::WorkerSpec>& workers) {
    auto& all = agents();
    all.clear();
    for (const auto& w : workers) {
        AgentRecord rec;
        rec.id = w.id;
        rec.type = w.type;
        all[w.id] = rec;
    }
}

}  // namespace hrt::nodes
