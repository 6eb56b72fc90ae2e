#include "hrt/nodes/allocation_nodes.hpp"

#include <algorithm>

#include "hrt/alloc/solver.hpp"

namespace hrt::nodes {

using bt::NodeStatus;
using nlohmann::json;

namespace {

bool same_problem(const alloc::AllocationProblem& a, const alloc::AllocationProblem& b) {
    return a.mode == b.mode && a.actions == b.actions && a.cost == b.cost && a.preference == b.preference &&
           a.availability == b.availability && a.feasible == b.feasible && a.budgets.empty() && b.budgets.empty();
}

std::string require_candidate(AllocationBoard& board, const std::string& action, const char* node) {
    auto cand = board.candidate_of(action);
    if (!cand) {
        throw std::logic_error(std::string(node) + ": action '" + action + "' has no allocation");
    }
    return *cand;
}

class Root : public bt::Decorator {
public:
    Root() : bt::Decorator("Root") {}

protected:
    NodeStatus on_tick(bt::TickContext& ctx) override { return decorated().tick(ctx); }
};

}  // namespace

// ---------------------------------------------------------------------------

NodeStatus RoleAllocator::on_tick(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    if (board.agents().empty()) {
        board.init_agents(run_.job.workers);
    }
    const bool batch_running = run_.planner.variant() == Variant::CoopST && !board.locked().empty();
    if (!board.acts_to_be_allocated().empty() && !batch_running) {
        allocate(board);
    }
    return decorated().tick(ctx);
}

void RoleAllocator::allocate(AllocationBoard& board) {
    const auto& pending = board.acts_to_be_allocated();
    std::vector<std::string> actions;
    for (const auto& id : run_.job.structure_order()) {
        if (pending.count(id)) {
            actions.push_back(id);
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto problem = run_.planner.build(actions, board.agents(), run_.clock.now());
    std::optional<alloc::AllocationSolution> solution;
    if (run_.memoize && last_problem_ && last_solution_ && same_problem(problem, *last_problem_)) {
        solution = *last_solution_;
        ++run_.stats.reused;
    } else {
        auto result = alloc::solve(problem);
        if (!result.feasible()) {
            run_.events.emit("fault", json{{"node", name()}, {"actions", actions}, {"reason", result.reason()}});
            throw AllocationFault(result.reason());
        }
        solution = result.solution();
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0);
    ++run_.stats.solves;
    run_.stats.total += elapsed;
    run_.stats.samples.push_back(elapsed);

    auto& allocation = board.current_allocation();
    for (const auto& a : actions) {
        allocation.erase(a);
    }
    std::map<std::string, std::string> assigned;
    for (const auto& [candidate, action] : solution->named(problem)) {
        allocation[action] = candidate;
        assigned[action] = candidate;
    }
    if (assigned != published_) {
        json pairs = json::array();
        for (const auto& [action, candidate] : assigned) {
            pairs.push_back({{"candidate", candidate}, {"action", action}});
        }
        run_.events.emit("allocation", json{{"actions", actions},
                                            {"pairs", pairs},
                                            {"objective", solution->objective},
                                            {"solve_us", static_cast<double>(elapsed.count()) / 1e3}});
        published_ = std::move(assigned);
    }
    last_problem_ = std::move(problem);
    last_solution_ = std::move(solution);
}

// ---------------------------------------------------------------------------

NodeStatus AllocatorManager::on_tick(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    if (board.completed().count(action_)) {
        return NodeStatus::Success;
    }
    if (!board.locked().count(action_)) {
        board.acts_to_be_allocated().insert(action_);
    }
    auto candidate = board.candidate_of(action_);
    if (!candidate || !board.candidate_ready(*candidate, action_)) {
        return NodeStatus::Running;
    }

    const NodeStatus status = decorated().tick(ctx);
    if (status != NodeStatus::Success) {
        return status;
    }
    if (board.actions_rejected().erase(action_) > 0) {
        decorated().halt();
        board.acts_to_be_allocated().insert(action_);
        return NodeStatus::Running;
    }

    const double start = board.start_times()[action_];
    const double end = board.finish_times()[action_];
    board.completed().insert(action_);
    board.locked().erase(action_);
    board.acts_to_be_allocated().erase(action_);
    board.current_allocation().erase(action_);
    run_.events.emit("complete", json{{"action", action_}, {"candidate", *candidate}, {"start", start}, {"end", end}});
    return NodeStatus::Success;
}

// ---------------------------------------------------------------------------

bool AgentHandler::check(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    return board.humans_of(require_candidate(board, action_, "AgentHandler")).empty();
}

bool CollaborativeHandler::check(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    return alloc::split_candidate_id(require_candidate(board, action_, "CollaborativeHandler")).size() > 1;
}

// ---------------------------------------------------------------------------

void HumanCommunication::halt() {
    for (const auto& [human, request] : requests_) {
        if (!accepted_.count(human)) {
            run_.gateway.cancel(request);
        }
    }
    requests_.clear();
    accepted_.clear();
    candidate_.clear();
    ActionNode::halt();
}

NodeStatus HumanCommunication::on_tick(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    if (requests_.empty()) {
        candidate_ = require_candidate(board, action_, "HumanCommunication");
        const auto humans = board.humans_of(candidate_);
        if (humans.empty()) {
            return NodeStatus::Failure;
        }
        const double now = run_.clock.now();
        const double duration = run_.job.duration(action_, candidate_).value_or(0.0);
        board.reserve(candidate_, action_, now, duration);
        board.locked().insert(action_);
        board.acts_to_be_allocated().erase(action_);
        board.start_times()[action_] = now;

        const auto& spec = run_.job.action(action_);
        NegotiationRequest request;
        request.action = action_;
        request.candidate = candidate_;
        request.collaborative = alloc::split_candidate_id(candidate_).size() > 1;
        request.label = spec.label;
        request.instruction_kind = spec.instruction_kind;
        request.instruction = spec.instruction;
        request.nominal_duration = duration;
        for (const auto& h : humans) {
            request.worker = h;
            const RequestId id = run_.gateway.send_request(request);
            requests_[h] = id;
            run_.events.emit("request", json{{"worker", h},
                                             {"action", action_},
                                             {"candidate", candidate_},
                                             {"collaborative", request.collaborative},
                                             {"request", id}});
        }
    }

    for (const auto& [human, request] : requests_) {
        if (accepted_.count(human)) {
            continue;
        }
        const GatewayResponse response = run_.gateway.poll_response(request);
        if (response.kind == ResponseKind::Accepted) {
            accepted_[human] = response.time;
            run_.events.emit("accept",
                             json{{"worker", human}, {"action", action_}, {"candidate", candidate_}, {"time", response.time}});
        } else if (response.kind == ResponseKind::Rejected) {
            const double requested = board.start_times()[action_];
            for (const auto& [other, other_request] : requests_) {
                if (other != human && !accepted_.count(other)) {
                    run_.gateway.cancel(other_request);
                }
            }
            const auto& entry =
                run_.planner.ledger().record(candidate_, action_, cost::NegotiationOutcome::Rejected);
            run_.events.emit("reject", json{{"worker", human},
                                            {"action", action_},
                                            {"candidate", candidate_},
                                            {"requested", requested},
                                            {"time", response.time}});
            run_.events.emit("preference", json{{"candidate", candidate_},
                                                {"action", action_},
                                                {"negations", entry.negations},
                                                {"negotiations", entry.negotiations},
                                                {"psi", run_.planner.ledger().cost(candidate_, action_)}});
            board.release(alloc::split_candidate_id(candidate_));
            board.locked().erase(action_);
            board.start_times().erase(action_);
            board.current_allocation().erase(action_);
            board.actions_rejected().insert(action_);
            board.acts_to_be_allocated().insert(action_);
            requests_.clear();
            accepted_.clear();
            return NodeStatus::Failure;
        }
    }

    if (accepted_.size() < requests_.size()) {
        return NodeStatus::Running;
    }
    double start = 0.0;
    for (const auto& [human, time] : accepted_) {
        start = std::max(start, time);
    }
    board.start_times()[action_] = start;
    for (const auto& m : alloc::split_candidate_id(candidate_)) {
        board.agents().at(m).busy_since = start;
    }
    const auto& entry = run_.planner.ledger().record(candidate_, action_, cost::NegotiationOutcome::Accepted);
    run_.events.emit("preference", json{{"candidate", candidate_},
                                        {"action", action_},
                                        {"negations", entry.negations},
                                        {"negotiations", entry.negotiations},
                                        {"psi", run_.planner.ledger().cost(candidate_, action_)}});
    return NodeStatus::Success;
}

// ---------------------------------------------------------------------------

void ActionCompleted::halt() {
    for (const auto& [human, query] : queries_) {
        if (!confirmed_.count(human)) {
            run_.gateway.cancel(query);
        }
    }
    queries_.clear();
    confirmed_.clear();
    ActionNode::halt();
}

NodeStatus ActionCompleted::on_tick(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    const std::string candidate = require_candidate(board, action_, "ActionCompleted");
    if (queries_.empty()) {
        for (const auto& h : board.humans_of(candidate)) {
            queries_[h] = run_.gateway.send_completion_query(h, action_);
        }
        if (queries_.empty()) {
            return NodeStatus::Success;
        }
    }
    for (const auto& [human, query] : queries_) {
        if (confirmed_.count(human)) {
            continue;
        }
        const GatewayResponse response = run_.gateway.poll_response(query);
        if (response.kind == ResponseKind::Completed) {
            confirmed_[human] = response.time;
            run_.events.emit("completion", json{{"worker", human}, {"action", action_}, {"time", response.time}});
        }
    }
    if (confirmed_.size() < queries_.size()) {
        return NodeStatus::Running;
    }
    double finish = 0.0;
    std::vector<std::string> humans;
    for (const auto& [human, time] : confirmed_) {
        finish = std::max(finish, time);
        humans.push_back(human);
    }
    auto [it, inserted] = board.finish_times().emplace(action_, finish);
    if (!inserted) {
        it->second = std::max(it->second, finish);
    }
    board.acknowledged()[action_] = finish;
    board.release(humans);
    return NodeStatus::Success;
}

// ---------------------------------------------------------------------------

std::vector<Primitive> robot_program(const plan::ActionSpec& action, RobotMode mode, double duration) {
    using plan::PrimitiveKind;
    if (mode == RobotMode::Collaborative) {
        return {
            {PrimitiveKind::Grasp, 0.0, "close", false},
            {PrimitiveKind::SwitchController, 0.0, "admittance", false},
            {PrimitiveKind::Wait, 0.0, "human acknowledgement", true},
            {PrimitiveKind::Release, 0.0, "", false},
            {PrimitiveKind::SwitchController, 0.0, "position", false},
        };
    }
    if (!action.robot_primitives.empty()) {
        std::vector<Primitive> out;
        const double share = duration / static_cast<double>(action.robot_primitives.size());
        for (auto kind : action.robot_primitives) {
            out.push_back({kind, share, "", false});
        }
        return out;
    }
    return {
        {PrimitiveKind::Move, 0.4 * duration, "pick", false},
        {PrimitiveKind::Grasp, 0.1 * duration, "close", false},
        {PrimitiveKind::Move, 0.4 * duration, "place", false},
        {PrimitiveKind::Grasp, 0.1 * duration, "open", false},
    };
}

RobotAction::RobotAction(RunContext& run, std::string action, RobotMode mode)
    : bt::ActionNode(std::string(mode == RobotMode::Autonomous ? "RobotAction(" : "CollaborativeRobotAction(") +
                     action + ")"),
      run_(run),
      action_(std::move(action)),
      mode_(mode) {}

void RobotAction::halt() {
    started_ = false;
    candidate_.clear();
    program_.clear();
    cursors_.clear();
    ActionNode::halt();
}

NodeStatus RobotAction::on_tick(bt::TickContext& ctx) {
    AllocationBoard board(ctx.board);
    if (!started_) {
        candidate_ = require_candidate(board, action_, "RobotAction");
        const double now = run_.clock.now();
        const double duration = run_.job.duration(action_, candidate_).value_or(0.0);
        if (mode_ == RobotMode::Autonomous) {
            board.reserve(candidate_, action_, now, duration);
            board.locked().insert(action_);
            board.acts_to_be_allocated().erase(action_);
            board.start_times()[action_] = now;
            run_.events.emit("dispatch", json{{"action", action_}, {"candidate", candidate_}, {"time", now}});
        }
        program_ = robot_program(run_.job.action(action_), mode_, duration);
        for (const auto& r : board.robots_of(candidate_)) {
            cursors_[r] = Cursor{0, std::nullopt, now, false};
        }
        started_ = true;
    }

    bool done = true;
    for (auto& [robot, cursor] : cursors_) {
        if (cursor.done) {
            continue;
        }
        const NodeStatus s = step(board, robot, cursor);
        if (s == NodeStatus::Failure) {
            run_.events.emit("fault", json{{"node", name()},
                                           {"robot", robot},
                                           {"action", action_},
                                           {"primitive", cursor.index},
                                           {"kind", plan::to_string(program_[cursor.index].kind)}});
            return NodeStatus::Failure;
        }
        done = done && s == NodeStatus::Success;
    }
    if (!done) {
        return NodeStatus::Running;
    }

    std::vector<std::string> robots;
    double finish = run_.clock.now();
    if (!cursors_.empty()) {
        finish = 0.0;
        for (const auto& [robot, cursor] : cursors_) {
            finish = std::max(finish, cursor.next_start);
            robots.push_back(robot);
        }
    }
    if (!robots.empty()) {
        auto [it, inserted] = board.finish_times().emplace(action_, finish);
        if (!inserted) {
            it->second = std::max(it->second, finish);
        }
        board.release(robots);
    }
    return NodeStatus::Success;
}

NodeStatus RobotAction::step(AllocationBoard& board, const std::string& robot, Cursor& cursor) {
    while (cursor.index < program_.size()) {
        const Primitive& p = program_[cursor.index];
        if (p.until_ack) {
            auto ack = board.acknowledged().find(action_);
            if (ack == board.acknowledged().end()) {
                return NodeStatus::Running;
            }
            cursor.next_start = std::max(cursor.next_start, ack->second);
            ++cursor.index;
            continue;
        }
        if (!cursor.ticket) {
            cursor.ticket = run_.backend.start(robot, action_, cursor.index, p, cursor.next_start);
        }
        const PrimitiveState state = run_.backend.poll(*cursor.ticket);
        if (state.status != NodeStatus::Success) {
            return state.status;
        }
        cursor.next_start = state.finish_time;
        cursor.ticket.reset();
        ++cursor.index;
    }
    cursor.done = true;
    return NodeStatus::Success;
}

// ---------------------------------------------------------------------------

std::unique_ptr<bt::Node> build_helper_subtree(RunContext& run, const std::string& action) {
    auto helper = std::make_unique<bt::Fallback>("AllocatorHelper(" + action + ")");

    auto& robot_branch = helper->emplace_child<bt::Sequence>("RobotBranch(" + action + ")");
    robot_branch.emplace_child<AgentHandler>(action);
    robot_branch.emplace_child<RobotAction>(run, action, RobotMode::Autonomous);

    auto& human_branch = helper->emplace_child<bt::Sequence>("HumanBranch(" + action + ")");
    human_branch.emplace_child<HumanCommunication>(run, action);
    auto& execution = human_branch.emplace_child<bt::Parallel>(2, "Execution(" + action + ")");
    auto& collaboration = execution.emplace_child<bt::Fallback>("Collaboration(" + action + ")");
    collaboration.emplace_child<bt::Inverter>("NotCollaborative(" + action + ")")
        .emplace_child<CollaborativeHandler>(action);
    collaboration.emplace_child<RobotAction>(run, action, RobotMode::Collaborative);
    execution.emplace_child<ActionCompleted>(run, action);

    helper->emplace_child<bt::Condition>("Rejected(" + action + ")", [action](bt::TickContext& ctx) {
        return AllocationBoard(ctx.board).actions_rejected().count(action) > 0;
    });
    return helper;
}

namespace {

std::unique_ptr<bt::Node> compile_item(RunContext& run, const plan::PlanItem& item) {
    if (const auto* id = std::get_if<std::string>(&item)) {
        auto manager = std::make_unique<AllocatorManager>(run, *id);
        manager->add_child(build_helper_subtree(run, *id));
        return manager;
    }
    const auto& group = std::get<plan::PlanGroup>(item);
    std::unique_ptr<bt::Node> node;
    if (group.kind == plan::PlanGroup::Kind::Sequence) {
        node = std::make_unique<bt::Sequence>();
    } else {
        node = std::make_unique<bt::Parallel>(group.threshold.value_or(group.children.size()));
    }
    for (const auto& child : group.children) {
        node->add_child(compile_item(run, child));
    }
    return node;
}

}  // namespace

bt::Tree compile_plan(RunContext& run) {
    run.job.validate();
    auto allocator = std::make_unique<RoleAllocator>(run);
    allocator->add_child(compile_item(run, run.job.structure));
    auto root = std::make_unique<Root>();
    root->add_child(std::move(allocator));
    return bt::Tree(std::move(root));
}

}  // namespace hrt::nodes
