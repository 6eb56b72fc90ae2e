#pragma once

#include <string>
#include <vector>

#include "hrt/alloc/problem.hpp"

namespace hrt::alloc {

/// Exact branch-and-bound over agent participation.
///
/// Base workers are visited in index order; each one either stays idle or
/// joins a candidate (of which it is the lowest-index member) assigned to
/// one free action. Nodes are pruned when the counting constraint can no
/// longer be met or when a lower bound built from per-worker cost rates
/// exceeds the incumbent. Ties are resolved by `better_solution`, so the
/// result is deterministic.
///
/// The returned solution is re-verified with `check_solution`; a failure
/// there is a bug and raises std::logic_error.
SolveResult solve(const AllocationProblem& problem);

/// Largest enumeration `brute_force_solve` accepts: (P + 1)^L combinations.
inline constexpr double kBruteForceLimit = 16'777'216.0;  // 2^24

/// Test oracle: enumerates every choice of candidate-or-nothing per action
/// and keeps the best combination that satisfies all constraints.
/// Throws std::length_error above `kBruteForceLimit`.
SolveResult brute_force_solve(const AllocationProblem& problem);

/// Independent constraint checker. Returns one message per violated
/// constraint; empty means the assignment is feasible.
std::vector<std::string> check_solution(const AllocationProblem& problem, const std::vector<Assignment>& assignment);

}  // namespace hrt::alloc
