#include "hrt/alloc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hrt::alloc {

namespace {

constexpr double kTieTolerance = 1e-9;

void require_term(double value, const char* what) {
    if (!std::isfinite(value) || value < 0.0) {
        std::ostringstream os;
        os << what << " must be finite and >= 0, got " << value;
        throw std::invalid_argument(os.str());
    }
}

void check_budgets(const std::vector<Budget>& budgets, std::size_t rows, std::size_t cols) {
    for (const auto& b : budgets) {
        if (b.usage.rows() != rows || b.usage.cols() != cols) {
            throw std::invalid_argument("budget usage table has wrong dimensions");
        }
        if (!std::isfinite(b.limit)) {
            throw std::invalid_argument("budget limit must be finite");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                require_term(b.usage(i, j), "budget usage");
            }
        }
    }
}

}  // namespace

int AllocationProblem::required_allocations() const {
    return static_cast<int>(std::min(action_count(), worker_count()));
}

int AllocationProblem::counting_weight(std::size_t candidate) const {
    if (mode == Mode::Cooperative || action_count() == 0) {
        return 1;
    }
    return theta(counting, static_cast<int>(candidates[candidate].size()), static_cast<int>(action_count()),
                 static_cast<int>(worker_count()));
}

void AllocationProblem::validate() const {
    const std::size_t p = candidate_count();
    const std::size_t l = action_count();
    if (cost.rows() != p || cost.cols() != l || preference.rows() != p || preference.cols() != l ||
        feasible.rows() != p || feasible.cols() != l || availability.size() != p) {
        throw std::invalid_argument("allocation problem tables do not match candidates x actions");
    }
    if (mode == Mode::Cooperative) {
        for (const auto& c : candidates.all()) {
            if (c.is_collaboration()) {
                throw std::invalid_argument("cooperative problem contains collaboration '" + c.id + "'");
            }
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        require_term(availability[i], "availability cost");
        for (std::size_t j = 0; j < l; ++j) {
            require_term(cost(i, j), "action cost");
            require_term(preference(i, j), "preference cost");
        }
    }
    check_budgets(budgets, p, l);
}

AllocationProblem build_cooperative(const CooperativeInputs& in) {
    AllocationProblem p;
    p.mode = Mode::Cooperative;
    p.candidates = CandidateSet(in.workers, 1);
    p.actions = in.actions;
    const std::size_t n = in.workers.size();
    const std::size_t l = in.actions.size();
    if (in.cost.rows() != n || in.cost.cols() != l) {
        throw std::invalid_argument("cooperative cost table must be workers x actions");
    }
    if (in.availability.size() != n) {
        throw std::invalid_argument("cooperative availability must have one entry per worker");
    }
    p.cost = Grid<double>(n, l, 0.0);
    p.preference = Grid<double>(n, l, 0.0);
    p.feasible = Grid<std::uint8_t>(n, l, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < l; ++j) {
            if (in.cost(i, j)) {
                p.cost(i, j) = *in.cost(i, j);
                p.feasible(i, j) = 1;
            }
        }
    }
    p.availability = in.availability;
    p.budgets = in.budgets;
    p.validate();
    return p;
}

AllocationProblem build_collaborative(const CollaborativeInputs& in) {
    AllocationProblem p;
    p.mode = Mode::Collaborative;
    p.candidates = in.candidates;
    p.actions = in.actions;
    const std::size_t np = in.candidates.size();
    const std::size_t l = in.actions.size();
    if (in.cost.rows() != np || in.cost.cols() != l) {
        throw std::invalid_argument("collaborative cost table must be candidates x actions");
    }
    if (in.availability.size() != np) {
        throw std::invalid_argument("collaborative availability must have one entry per candidate");
    }
    if (!in.collaborative_enabled.empty() && in.collaborative_enabled.size() != l) {
        throw std::invalid_argument("collaborative flags must have one entry per action");
    }
    p.cost = Grid<double>(np, l, 0.0);
    p.preference = in.preference.empty() ? Grid<double>(np, l, 0.0) : in.preference;
    p.feasible = Grid<std::uint8_t>(np, l, 0);
    for (std::size_t i = 0; i < np; ++i) {
        const bool pair = in.candidates[i].is_collaboration();
        for (std::size_t j = 0; j < l; ++j) {
            const bool enabled = in.collaborative_enabled.empty() || in.collaborative_enabled[j];
            if (in.cost(i, j) && (!pair || enabled)) {
                p.cost(i, j) = *in.cost(i, j);
                p.feasible(i, j) = 1;
            }
        }
    }
    p.availability = in.availability;
    p.budgets = in.budgets;
    p.counting = in.counting;
    p.validate();
    return p;
}

std::vector<std::pair<std::string, std::string>> AllocationSolution::named(const AllocationProblem& problem) const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(assignment.size());
    for (const auto& a : assignment) {
        out.emplace_back(problem.candidates[a.candidate].id, problem.actions.at(a.action));
    }
    return out;
}

std::optional<std::size_t> AllocationSolution::candidate_for(std::size_t action) const {
    for (const auto& a : assignment) {
        if (a.action == action) {
            return a.candidate;
        }
    }
    return std::nullopt;
}

double objective_of(const AllocationProblem& problem, const std::vector<Assignment>& assignment) {
    std::vector<Assignment> sorted = assignment;
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (const auto& a : sorted) {
        total += problem.weight(a.candidate, a.action);
    }
    return total;
}

std::size_t members_of(const AllocationProblem& problem, const std::vector<Assignment>& assignment) {
    std::size_t total = 0;
    for (const auto& a : assignment) {
        total += problem.candidates[a.candidate].size();
    }
    return total;
}

bool better_solution(const AllocationProblem& problem, double objective_a, const std::vector<Assignment>& a,
                     double objective_b, const std::vector<Assignment>& b) {
    const double scale = std::max({1.0, std::abs(objective_a), std::abs(objective_b)});
    if (std::abs(objective_a - objective_b) > kTieTolerance * scale) {
        return objective_a < objective_b;
    }
    const std::size_t ma = members_of(problem, a);
    const std::size_t mb = members_of(problem, b);
    if (ma != mb) {
        return ma < mb;
    }
    std::vector<Assignment> sa = a;
    std::vector<Assignment> sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
}

std::string describe_infeasibility(const AllocationProblem& problem) {
    std::vector<std::string> orphans;
    for (std::size_t j = 0; j < problem.action_count(); ++j) {
        bool any = false;
        for (std::size_t i = 0; i < problem.candidate_count() && !any; ++i) {
            any = problem.is_feasible(i, j);
        }
        if (!any) {
            orphans.push_back(problem.actions[j]);
        }
    }
    std::ostringstream os;
    os << "counting constraint requires exactly " << problem.required_allocations()
       << " allocation(s) but no assignment satisfying capability, unicity";
    if (!problem.budgets.empty()) {
        os << ", budget";
    }
    os << " and per-action limits reaches it";
    if (!orphans.empty()) {
        os << "; actions without any capable candidate:";
        for (const auto& a : orphans) {
            os << ' ' << a;
        }
    }
    return os.str();
}

}  // namespace hrt::alloc
