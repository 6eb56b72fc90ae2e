#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hrt/bt/blackboard.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::nodes {

/// Live state of one base worker.
struct AgentRecord {
    std::string id;
    plan::WorkerType type = plan::WorkerType::Robot;
    bool available = true;
    std::optional<std::string> busy_action;
    double busy_since = 0.0;     // start of the current action (or reservation)
    double busy_duration = 0.0;  // nominal duration of the current action
};

/// Typed view over the shared `alloc/` namespace of a blackboard.
class AllocationBoard {
public:
    explicit AllocationBoard(bt::Blackboard& board) : board_(board) {}

    /// Actions registered by their managers and not yet committed.
    std::set<std::string>& acts_to_be_allocated();
    std::set<std::string>& actions_rejected();
    /// action -> candidate id
    std::map<std::string, std::string>& current_allocation();
    std::map<std::string, AgentRecord>& agents();
    /// Actions under negotiation or execution; their allocation is frozen.
    std::set<std::string>& locked();
    std::set<std::string>& completed();
    std::map<std::string, double>& start_times();
    std::map<std::string, double>& finish_times();
    /// Human acknowledgement of completion, per action.
    std::map<std::string, double>& acknowledged();

    /// (candidate id, action id) pairs of the current allocation.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> allocation_pairs();

    [[nodiscard]] std::optional<std::string> candidate_of(const std::string& action);

    /// Members of a candidate id, split by worker type.
    [[nodiscard]] std::vector<std::string> humans_of(const std::string& candidate);
    [[nodiscard]] std::vector<std::string> robots_of(const std::string& candidate);

    /// True when every member is free or already busy with `action`.
    [[nodiscard]] bool candidate_ready(const std::string& candidate, const std::string& action);

    void reserve(const std::string& candidate, const std::string& action, double now, double duration);
    void release(const std::vector<std::string>& workers);

    void init_agents(const std::vector<plan::WorkerSpec>& workers);

private:
    template <typename T>
    T& entry(const char* name) {
        return board_.get_or_create<T>(bt::shared_key(name));
    }

    bt::Blackboard& board_;
};

}  // namespace hrt::nodes
