#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "hrt/bt/blackboard.hpp"
#include "hrt/bt/node.hpp"
#include "hrt/nodes/allocation_nodes.hpp"
#include "hrt/nodes/planner.hpp"
#include "hrt/plan/job_plan.hpp"
#include "hrt/sim/event_log.hpp"
#include "hrt/sim/sim_workers.hpp"
#include "hrt/sim/trace.hpp"

namespace hrt::sim {

enum class RunStatus { Running, Completed, Failed };

std::string_view to_string(RunStatus status);

/// One run of a job: compiled tree, blackboard and allocation state, ticked
/// by a single caller. Clock, gateway, backend and event sink are supplied
/// by the caller and must outlive the engine.
class RunEngine {
public:
    RunEngine(plan::JobPlan job, nodes::Variant variant, nodes::CostConfig cost, nodes::NegotiationGateway& gateway,
              nodes::ExecutionBackend& backend, const nodes::Clock& clock, nodes::EventSink& events,
              bool memoize = false);

    RunEngine(const RunEngine&) = delete;
    RunEngine& operator=(const RunEngine&) = delete;

    /// Ticks the tree once (no-op once the run has ended).
    RunStatus tick();

    /// Ends the run as failed, e.g. on an external time limit.
    void abort(const std::string& reason);

    [[nodiscard]] RunStatus status() const { return status_; }
    [[nodiscard]] const std::string& failure() const { return failure_; }
    [[nodiscard]] std::uint64_t ticks() const { return ticks_; }

    [[nodiscard]] const plan::JobPlan& job() const { return job_; }
    nodes::AllocationPlanner& planner() { return planner_; }
    bt::Blackboard& board() { return board_; }
    [[nodiscard]] const bt::Tree& tree() const { return tree_; }
    [[nodiscard]] const nodes::SolveStats& stats() const { return context_.stats; }

    /// Wall time of the ticks that ran the allocator (allocation plus node
    /// overhead, simulated execution excluded).
    [[nodiscard]] std::chrono::nanoseconds allocation_tick_time() const { return allocation_tick_time_; }
    [[nodiscard]] std::size_t allocation_ticks() const { return allocation_ticks_; }

private:
    void finish(RunStatus status, const std::string& reason);

    plan::JobPlan job_;
    nodes::AllocationPlanner planner_;
    nodes::EventSink& events_;
    nodes::RunContext context_;
    bt::Tree tree_;
    bt::Blackboard board_;
    RunStatus status_ = RunStatus::Running;
    std::string failure_;
    std::uint64_t ticks_ = 0;
    std::chrono::nanoseconds allocation_tick_time_{0};
    std::size_t allocation_ticks_ = 0;
};

struct SimOptions {
    nodes::Variant variant = nodes::Variant::CollabMT;
    nodes::CostConfig cost;
    double frequency = 100.0;
    double max_time = 86400.0;  // virtual seconds
    std::uint64_t seed = 1;
    HumanPolicy default_policy;
    std::map<std::string, HumanPolicy> policies;
    std::vector<std::tuple<std::string, std::string, std::size_t>> faults;  // robot, action, primitive
    bool memoize = false;
};

struct SimResult {
    RunStatus status = RunStatus::Running;
    std::string reason;
    ExecutionTrace trace;
    std::vector<Event> events;
    nodes::SolveStats stats;
    std::size_t candidates = 0;
    std::uint64_t ticks = 0;
    double end_time = 0.0;
    std::chrono::nanoseconds allocation_tick_time{0};
    std::size_t allocation_ticks = 0;
};

/// Runs a job to completion in virtual time with simulated workers.
SimResult run_sim(const plan::JobPlan& job, const SimOptions& options);

}  // namespace hrt::sim
