#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrt/alloc/problem.hpp"
#include "hrt/bt/node.hpp"
#include "hrt/nodes/board.hpp"
#include "hrt/nodes/interfaces.hpp"
#include "hrt/nodes/planner.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::nodes {

/// The allocator could not produce a feasible assignment; the run aborts.
class AllocationFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveStats {
    std::size_t solves = 0;
    std::size_t reused = 0;  // answered from the previous identical problem
    std::chrono::nanoseconds total{0};
    std::vector<std::chrono::nanoseconds> samples;  // build + solve, per solve
};

/// Everything the allocation nodes of one run share.
struct RunContext {
    const plan::JobPlan& job;
    AllocationPlanner& planner;
    NegotiationGateway& gateway;
    ExecutionBackend& backend;
    const Clock& clock;
    EventSink& events;
    bool memoize = false;
    SolveStats stats;
};

/// Solves the allocation for every registered action on each tick, then
/// ticks the task structure.
class RoleAllocator : public bt::Decorator {
public:
    explicit RoleAllocator(RunContext& run) : bt::Decorator("RoleAllocator"), run_(run) {}

protected:
    bt::NodeStatus on_tick(bt::TickContext& ctx) override;

private:
    void allocate(AllocationBoard& board);

    RunContext& run_;
    std::optional<alloc::AllocationProblem> last_problem_;
    std::optional<alloc::AllocationSolution> last_solution_;
    std::map<std::string, std::string> published_;
};

/// Registers its action for allocation and runs the helper subtree once
/// the allocated candidate is ready.
class AllocatorManager : public bt::Decorator {
public:
    AllocatorManager(RunContext& run, std::string action)
        : bt::Decorator("AllocatorManager(" + action + ")"), run_(run), action_(std::move(action)) {}

    [[nodiscard]] const std::string& action() const { return action_; }

protected:
    bt::NodeStatus on_tick(bt::TickContext& ctx) override;

private:
    RunContext& run_;
    std::string action_;
};

/// Success when the allocated candidate is made of robots only.
class AgentHandler : public bt::ConditionNode {
public:
    explicit AgentHandler(std::string action)
        : bt::ConditionNode("AgentHandler(" + action + ")"), action_(std::move(action)) {}

protected:
    bool check(bt::TickContext& ctx) override;

private:
    std::string action_;
};

/// Negotiates the action with the human members of the candidate.
class HumanCommunication : public bt::ActionNode {
public:
    HumanCommunication(RunContext& run, std::string action)
        : bt::ActionNode("HumanCommunication(" + action + ")"), run_(run), action_(std::move(action)) {}

    void halt() override;

protected:
    bt::NodeStatus on_tick(bt::TickContext& ctx) override;

private:
    RunContext& run_;
    std::string action_;
    std::string candidate_;
    std::map<std::string, RequestId> requests_;  // human -> request
    std::map<std::string, double> accepted_;     // human -> accept time
};

/// Success when the allocated candidate is a collaboration.
class CollaborativeHandler : public bt::ConditionNode {
public:
    explicit CollaborativeHandler(std::string action)
        : bt::ConditionNode("CollaborativeHandler(" + action + ")"), action_(std::move(action)) {}

protected:
    bool check(bt::TickContext& ctx) override;

private:
    std::string action_;
};

/// Waits for the human members to confirm completion, then frees them.
class ActionCompleted : public bt::ActionNode {
public:
    ActionCompleted(RunContext& run, std::string action)
        : bt::ActionNode("ActionCompleted(" + action + ")"), run_(run), action_(std::move(action)) {}

    void halt() override;

protected:
    bt::NodeStatus on_tick(bt::TickContext& ctx) override;

private:
    RunContext& run_;
    std::string action_;
    std::map<std::string, RequestId> queries_;
    std::map<std::string, double> confirmed_;
};

enum class RobotMode { Autonomous, Collaborative };

/// Default primitive programs: move-object for autonomous actions (MOVE,
/// GRASP close, MOVE, GRASP open, splitting the nominal duration), and
/// grasp / compliant hold until acknowledged / release for collaborations.
std::vector<Primitive> robot_program(const plan::ActionSpec& action, RobotMode mode, double duration);

/// Runs a primitive program on every robot member of the candidate.
class RobotAction : public bt::ActionNode {
public:
    RobotAction(RunContext& run, std::string action, RobotMode mode);

    void halt() override;

protected:
    bt::NodeStatus on_tick(bt::TickContext& ctx) override;

private:
    struct Cursor {
        std::size_t index = 0;
        std::optional<Ticket> ticket;
        double next_start = 0.0;
        bool done = false;
    };

    bt::NodeStatus step(AllocationBoard& board, const std::string& robot, Cursor& cursor);

    RunContext& run_;
    std::string action_;
    RobotMode mode_;
    bool started_ = false;
    std::string candidate_;
    std::vector<Primitive> program_;
    std::map<std::string, Cursor> cursors_;
};

/// Fallback( Sequence(AgentHandler, RobotAction),
///           Sequence(HumanCommunication,
///                    Parallel(Fallback(Inverter(CollaborativeHandler), RobotAction collaborative),
///                             ActionCompleted)),
///           rejection recorded )
std::unique_ptr<bt::Node> build_helper_subtree(RunContext& run, const std::string& action);

/// root -> RoleAllocator -> task structure, each action wrapped as
/// AllocatorManager -> helper subtree.
bt::Tree compile_plan(RunContext& run);

}  // namespace hrt::nodes
