#include "hrt/sim/engine.hpp"

#include <algorithm>

#include "hrt/sim/clock.hpp"

namespace hrt::sim {

using nlohmann::json;

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Running: return "running";
        case RunStatus::Completed: return "completed";
        case RunStatus::Failed: return "failed";
    }
    return "?";
}

RunEngine::RunEngine(plan::JobPlan job, nodes::Variant variant, nodes::CostConfig cost,
                     nodes::NegotiationGateway& gateway, nodes::ExecutionBackend& backend, const nodes::Clock& clock,
                     nodes::EventSink& events, bool memoize)
    : job_(std::move(job)),
      planner_(job_, variant, std::move(cost)),
      events_(events),
      context_{job_, planner_, gateway, backend, clock, events, memoize, {}},
      tree_(nodes::compile_plan(context_)) {
    nodes::AllocationBoard(board_).init_agents(job_.workers);
    events_.emit("run_start", json{{"job", job_.name},
                                   {"variant", nodes::to_string(variant)},
                                   {"metric", nodes::to_string(planner_.config().metric)},
                                   {"workers", job_.worker_ids()},
                                   {"actions", job_.structure_order()},
                                   {"candidates", planner_.candidates().size()}});
}

RunStatus RunEngine::tick() {
    if (status_ != RunStatus::Running) {
        return status_;
    }
    ++ticks_;
    const std::size_t before = context_.stats.solves;
    const auto t0 = std::chrono::steady_clock::now();
    bt::NodeStatus result = bt::NodeStatus::Running;
    try {
        result = tree_.tick(board_);
    } catch (const nodes::AllocationFault& ex) {
        finish(RunStatus::Failed, std::string("allocation infeasible: ") + ex.what());
        return status_;
    } catch (const std::logic_error& ex) {
        finish(RunStatus::Failed, std::string("internal fault: ") + ex.what());
        return status_;
    }
    if (context_.stats.solves != before) {
        allocation_tick_time_ += std::chrono::steady_clock::now() - t0;
        ++allocation_ticks_;
    }
    if (result == bt::NodeStatus::Success) {
        finish(RunStatus::Completed, "");
    } else if (result == bt::NodeStatus::Failure) {
        finish(RunStatus::Failed, "task structure failed");
    }
    return status_;
}

void RunEngine::abort(const std::string& reason) {
    if (status_ == RunStatus::Running) {
        tree_.halt();
        finish(RunStatus::Failed, reason);
    }
}

void RunEngine::finish(RunStatus status, const std::string& reason) {
    status_ = status;
    failure_ = reason;
    double end = 0.0;
    for (const auto& [action, t] : nodes::AllocationBoard(board_).finish_times()) {
        end = std::max(end, t);
    }
    json payload{{"status", to_string(status)}, {"end_time", end}};
    if (!reason.empty()) {
        payload["reason"] = reason;
    }
    events_.emit("run_end", payload);
}

SimResult run_sim(const plan::JobPlan& job, const SimOptions& options) {
    VirtualClock clock(options.frequency);
    SimGateway gateway(clock, options.seed);
    gateway.set_default_policy(options.default_policy);
    for (const auto& [worker, policy] : options.policies) {
        gateway.set_policy(worker, policy);
    }
    SimBackend backend(clock);
    for (const auto& [robot, action, index] : options.faults) {
        backend.inject_fault(robot, action, index);
    }
    EventLog log(clock);
    RunEngine engine(job, options.variant, options.cost, gateway, backend, clock, log, options.memoize);

    while (engine.tick() == RunStatus::Running) {
        clock.advance();
        if (clock.now() > options.max_time) {
            engine.abort("time limit of " + std::to_string(options.max_time) + " s reached");
        }
    }

    SimResult result;
    result.status = engine.status();
    result.reason = engine.failure();
    result.events = log.events();
    result.trace = replay(result.events).trace;
    result.stats = engine.stats();
    result.candidates = engine.planner().candidates().size();
    result.ticks = engine.ticks();
    result.end_time = clock.now();
    result.allocation_tick_time = engine.allocation_tick_time();
    result.allocation_ticks = engine.allocation_ticks();
    return result;
}

}  // namespace hrt::sim
