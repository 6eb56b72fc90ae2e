#include "hrt/alloc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace hrt::alloc {

namespace {

constexpr double kPruneTolerance = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

class BranchAndBound {
public:
    explicit BranchAndBound(const AllocationProblem& problem)
        : p_(problem),
          required_(problem.required_allocations()),
          workers_(problem.worker_count()),
          used_worker_(workers_, 0),
          used_action_(problem.action_count(), 0),
          budget_used_(problem.budgets.size(), 0.0) {
        prepare();
    }

    std::optional<std::vector<Assignment>> run() {
        if (required_ == 0) {
            return std::vector<Assignment>{};
        }
        descend(0);
        return best_;
    }

private:
    void prepare() {
        const std::size_t np = p_.candidate_count();
        const std::size_t nl = p_.action_count();
        counting_.resize(np);
        by_lowest_.assign(workers_, {});
        options_.assign(np, {});
        rate_.assign(workers_, kInf);

        // With budgets an action swap can break a budget, so the top-R
        // reduction below only holds without them.
        const std::size_t keep = p_.budgets.empty() ? static_cast<std::size_t>(required_) : nl;

        for (std::size_t c = 0; c < np; ++c) {
            const Candidate& cand = p_.candidates[c];
            counting_[c] = p_.counting_weight(c);
            by_lowest_[cand.members.front()].push_back(c);
            auto& opts = options_[c];
            for (std::size_t j = 0; j < nl; ++j) {
                if (p_.is_feasible(c, j)) {
                    opts.push_back(j);
                }
            }
            std::sort(opts.begin(), opts.end(), [&](std::size_t a, std::size_t b) {
                const double wa = p_.weight(c, a);
                const double wb = p_.weight(c, b);
                return wa != wb ? wa < wb : a < b;
            });
            if (opts.size() > keep) {
                opts.resize(keep);
            }
            if (!opts.empty()) {
                const double r = p_.weight(c, opts.front()) / counting_[c];
                for (std::size_t m : cand.members) {
                    rate_[m] = std::min(rate_[m], r);
                }
            }
        }
    }

    // Lower bound on the cost still to pay from workers >= k; nullopt when
    // the counting constraint can no longer be met.
    std::optional<double> remaining_bound(std::size_t k) {
        const int missing = required_ - count_;
        scratch_.clear();
        for (std::size_t w = k; w < workers_; ++w) {
            if (!used_worker_[w] && std::isfinite(rate_[w])) {
                scratch_.push_back(rate_[w]);
            }
        }
        if (static_cast<int>(scratch_.size()) < missing) {
            return std::nullopt;
        }
        std::partial_sort(scratch_.begin(), scratch_.begin() + missing, scratch_.end());
        double bound = 0.0;
        for (int i = 0; i < missing; ++i) {
            bound += scratch_[static_cast<std::size_t>(i)];
        }
        return bound;
    }

    bool members_free(const Candidate& cand) const {
        for (std::size_t m : cand.members) {
            if (used_worker_[m]) {
                return false;
            }
        }
        return true;
    }

    bool fits_budgets(std::size_t c, std::size_t j) const {
        for (std::size_t b = 0; b < p_.budgets.size(); ++b) {
            if (budget_used_[b] + p_.budgets[b].usage(c, j) > p_.budgets[b].limit) {
                return false;
            }
        }
        return true;
    }

    void record_leaf() {
        const double obj = objective_of(p_, chosen_);
        if (!best_ || better_solution(p_, obj, chosen_, best_objective_, *best_)) {
            best_ = chosen_;
            best_objective_ = obj;
        }
    }

    void descend(std::size_t k) {
        if (count_ == required_) {
            record_leaf();
            return;
        }
        if (k >= workers_) {
            return;
        }
        const auto bound = remaining_bound(k);
        if (!bound) {
            return;
        }
        if (best_) {
            const double scale = std::max(1.0, std::abs(best_objective_));
            if (cost_ + *bound > best_objective_ + kPruneTolerance * scale) {
                return;
            }
        }
        if (used_worker_[k]) {
            descend(k + 1);
            return;
        }

        for (std::size_t c : by_lowest_[k]) {
            const Candidate& cand = p_.candidates[c];
            if (count_ + counting_[c] > required_ || !members_free(cand)) {
                continue;
            }
            for (std::size_t j : options_[c]) {
                if (used_action_[j] || !fits_budgets(c, j)) {
                    continue;
                }
                push(c, j);
                descend(k + 1);
                pop(c, j);
            }
        }
        descend(k + 1);
    }

    void push(std::size_t c, std::size_t j) {
        for (std::size_t m : p_.candidates[c].members) {
            used_worker_[m] = 1;
        }
        used_action_[j] = 1;
        for (std::size_t b = 0; b < p_.budgets.size(); ++b) {
            budget_used_[b] += p_.budgets[b].usage(c, j);
        }
        count_ += counting_[c];
        cost_ += p_.weight(c, j);
        chosen_.push_back({c, j});
    }

    void pop(std::size_t c, std::size_t j) {
        chosen_.pop_back();
        cost_ -= p_.weight(c, j);
        count_ -= counting_[c];
        for (std::size_t b = 0; b < p_.budgets.size(); ++b) {
            budget_used_[b] -= p_.budgets[b].usage(c, j);
        }
        used_action_[j] = 0;
        for (std::size_t m : p_.candidates[c].members) {
            used_worker_[m] = 0;
        }
    }

    const AllocationProblem& p_;
    const int required_;
    const std::size_t workers_;

    std::vector<int> counting_;
    std::vector<std::vector<std::size_t>> by_lowest_;
    std::vector<std::vector<std::size_t>> options_;
    std::vector<double> rate_;
    std::vector<double> scratch_;

    std::vector<char> used_worker_;
    std::vector<char> used_action_;
    std::vector<double> budget_used_;
    std::vector<Assignment> chosen_;
    int count_ = 0;
    double cost_ = 0.0;

    std::optional<std::vector<Assignment>> best_;
    double best_objective_ = kInf;
};

AllocationSolution finish(const AllocationProblem& problem, std::vector<Assignment> assignment,
                          std::chrono::steady_clock::time_point started) {
    AllocationSolution s;
    std::sort(assignment.begin(), assignment.end());
    s.objective = objective_of(problem, assignment);
    s.assignment = std::move(assignment);
    s.solve_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started);
    return s;
}

}  // namespace

SolveResult solve(const AllocationProblem& problem) {
    const auto started = std::chrono::steady_clock::now();
    problem.validate();
    BranchAndBound search(problem);
    auto best = search.run();
    if (!best) {
        return SolveResult::infeasible(describe_infeasibility(problem));
    }
    auto violations = check_solution(problem, *best);
    if (!violations.empty()) {
        throw std::logic_error("solver produced an infeasible assignment: " + violations.front());
    }
    return SolveResult::optimal(finish(problem, std::move(*best), started));
}

SolveResult brute_force_solve(const AllocationProblem& problem) {
    const auto started = std::chrono::steady_clock::now();
    problem.validate();
    const std::size_t np = problem.candidate_count();
    const std::size_t nl = problem.action_count();
    const double combos = std::pow(static_cast<double>(np + 1), static_cast<double>(nl));
    if (combos > kBruteForceLimit) {
        throw std::length_error("brute force enumeration too large for this instance");
    }

    // choice[j] == np means action j is left unassigned.
    std::vector<std::size_t> choice(nl, np);
    std::optional<std::vector<Assignment>> best;
    double best_objective = kInf;
    std::vector<Assignment> current;
    while (true) {
        current.clear();
        for (std::size_t j = 0; j < nl; ++j) {
            if (choice[j] != np) {
                current.push_back({choice[j], j});
            }
        }
        if (check_solution(problem, current).empty()) {
            const double obj = objective_of(problem, current);
            if (!best || better_solution(problem, obj, current, best_objective, *best)) {
                best = current;
                best_objective = obj;
            }
        }
        std::size_t j = 0;
        while (j < nl) {
            choice[j] = choice[j] == np ? 0 : choice[j] + 1;
            if (choice[j] != np) {
                break;
            }
            ++j;
        }
        if (j == nl) {
            break;
        }
    }
    if (!best) {
        return SolveResult::infeasible(describe_infeasibility(problem));
    }
    return SolveResult::optimal(finish(problem, std::move(*best), started));
}

std::vector<std::string> check_solution(const AllocationProblem& problem, const std::vector<Assignment>& assignment) {
    std::vector<std::string> errors;
    const std::size_t np = problem.candidate_count();
    const std::size_t nl = problem.action_count();
    const std::size_t nw = problem.worker_count();

    std::vector<int> per_action(nl, 0);
    std::vector<int> per_candidate(np, 0);
    std::vector<int> per_worker(nw, 0);
    long counted = 0;
    for (const auto& a : assignment) {
        if (a.candidate >= np || a.action >= nl) {
            errors.push_back("assignment index out of range");
            continue;
        }
        const Candidate& cand = problem.candidates[a.candidate];
        if (!problem.is_feasible(a.candidate, a.action)) {
            errors.push_back("capability: " + cand.id + " cannot perform " + problem.actions[a.action]);
        }
        ++per_action[a.action];
        ++per_candidate[a.candidate];
        for (std::size_t w = 0; w < nw; ++w) {
            per_worker[w] += cand.eta[w];
        }
        counted += problem.mode == Mode::Collaborative
                       ? theta(problem.counting, static_cast<int>(cand.size()), static_cast<int>(nl), static_cast<int>(nw))
                       : 1;
    }
    for (std::size_t j = 0; j < nl; ++j) {
        if (per_action[j] > 1) {
            errors.push_back("per-action cap: " + problem.actions[j] + " assigned " + std::to_string(per_action[j]) +
                             " times");
        }
    }
    for (std::size_t i = 0; i < np; ++i) {
        if (per_candidate[i] > 1) {
            errors.push_back("per-candidate cap: " + problem.candidates[i].id + " assigned " +
                             std::to_string(per_candidate[i]) + " actions");
        }
    }
    for (std::size_t w = 0; w < nw; ++w) {
        if (per_worker[w] > 1) {
            errors.push_back("unicity: worker " + problem.candidates.workers()[w] + " used " +
                             std::to_string(per_worker[w]) + " times");
        }
    }
    const long required = static_cast<long>(std::min(nl, nw));
    if (counted != required) {
        errors.push_back("counting: weighted allocations " + std::to_string(counted) + " != " +
                         std::to_string(required));
    }
    for (std::size_t b = 0; b < problem.budgets.size(); ++b) {
        double used = 0.0;
        for (const auto& a : assignment) {
            if (a.candidate < np && a.action < nl) {
                used += problem.budgets[b].usage(a.candidate, a.action);
            }
        }
        if (used > problem.budgets[b].limit) {
            std::ostringstream os;
            os << "budget " << b << ": " << used << " > " << problem.budgets[b].limit;
            errors.push_back(os.str());
        }
    }
    return errors;
}

}  // namespace hrt::alloc
