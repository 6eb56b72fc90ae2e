#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hrt/alloc/candidates.hpp"

namespace hrt::alloc {

enum class Mode { Cooperative, Collaborative };

/// Dense row-major candidates x actions table.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    bool operator==(const Grid&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Optional knapsack-style limit: sum of usage over chosen pairs <= limit.
struct Budget {
    Grid<double> usage;
    double limit = 0.0;
};

/// Binary role-allocation program over candidates x actions.
struct AllocationProblem {
    Mode mode = Mode::Collaborative;
    CandidateSet candidates;
    std::vector<std::string> actions;
    Grid<double> cost;
    Grid<double> preference;
    std::vector<double> availability;  // per candidate
    Grid<std::uint8_t> feasible;
    std::vector<Budget> budgets;
    CountingRule counting = CountingRule::Epsilon;

    [[nodiscard]] std::size_t candidate_count() const { return candidates.size(); }
    [[nodiscard]] std::size_t action_count() const { return actions.size(); }
    [[nodiscard]] std::size_t worker_count() const { return candidates.base_count(); }

    [[nodiscard]] double weight(std::size_t candidate, std::size_t action) const {
        return cost(candidate, action) + preference(candidate, action) + availability[candidate];
    }
    [[nodiscard]] bool is_feasible(std::size_t candidate, std::size_t action) const {
        return feasible(candidate, action) != 0;
    }

    /// min(L, N): exact value of the counting constraint (0 without actions).
    [[nodiscard]] int required_allocations() const;

    /// Contribution of one assignment of `candidate` to the counting
    /// constraint (theta for collaborations, 1 in cooperative mode).
    [[nodiscard]] int counting_weight(std::size_t candidate) const;

    /// Checks dimensions, finiteness and sign of every term.
    void validate() const;
};

struct CooperativeInputs {
    std::vector<std::string> workers;
    std::vector<std::string> actions;
    Grid<std::optional<double>> cost;  // workers x actions, nullopt = not capable
    std::vector<double> availability;  // xi per worker
    std::vector<Budget> budgets;
};

struct CollaborativeInputs {
    CandidateSet candidates;
    std::vector<std::string> actions;
    Grid<std::optional<double>> cost;        // candidates x actions
    Grid<double> preference;                 // empty = all zero
    std::vector<double> availability;        // Xi per candidate
    std::vector<bool> collaborative_enabled; // per action, empty = all enabled
    std::vector<Budget> budgets;
    CountingRule counting = CountingRule::Epsilon;
};

AllocationProblem build_cooperative(const CooperativeInputs& inputs);
AllocationProblem build_collaborative(const CollaborativeInputs& inputs);

struct Assignment {
    std::size_t candidate = 0;
    std::size_t action = 0;
    auto operator<=>(const Assignment&) const = default;
};

struct AllocationSolution {
    std::vector<Assignment> assignment;  // sorted by (candidate, action)
    double objective = 0.0;
    std::chrono::nanoseconds solve_time{0};

    [[nodiscard]] std::vector<std::pair<std::string, std::string>> named(const AllocationProblem& problem) const;
    [[nodiscard]] std::optional<std::size_t> candidate_for(std::size_t action) const;
};

/// Outcome of a solve: an optimal solution or the reason none exists.
class SolveResult {
public:
    static SolveResult optimal(AllocationSolution solution) {
        SolveResult r;
        r.solution_ = std::move(solution);
        return r;
    }
    static SolveResult infeasible(std::string reason) {
        SolveResult r;
        r.reason_ = std::move(reason);
        return r;
    }

    [[nodiscard]] bool feasible() const { return solution_.has_value(); }
    [[nodiscard]] const AllocationSolution& solution() const {
        if (!solution_) {
            throw std::logic_error("no solution: " + reason_);
        }
        return *solution_;
    }
    [[nodiscard]] const std::string& reason() const { return reason_; }

private:
    std::optional<AllocationSolution> solution_;
    std::string reason_;
};

/// Sum of weights over the assignment, accumulated in canonical order.
double objective_of(const AllocationProblem& problem, const std::vector<Assignment>& assignment);

/// Total number of base workers used by the assignment.
std::size_t members_of(const AllocationProblem& problem, const std::vector<Assignment>& assignment);

/// Strict ordering among solutions: lower objective, then fewer members,
/// then lexicographically smaller (candidate, action) list.
bool better_solution(const AllocationProblem& problem, double objective_a, const std::vector<Assignment>& a,
                     double objective_b, const std::vector<Assignment>& b);

/// Diagnostic for an infeasible problem, naming the actions that no
/// candidate is capable of.
std::string describe_infeasibility(const AllocationProblem& problem);

}  // namespace hrt::alloc
