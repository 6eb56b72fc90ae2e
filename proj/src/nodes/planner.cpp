#include "hrt/nodes/planner.hpp"

#include <algorithm>
#include <stdexcept>

namespace hrt::nodes {

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::CollabMT: return "collab-mt";
        case Variant::CoopMT: return "coop-mt";
        case Variant::CoopST: return "coop-st";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (auto v : {Variant::CollabMT, Variant::CoopMT, Variant::CoopST}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    return std::nullopt;
}

std::string_view to_string(CostMetric metric) { return metric == CostMetric::Duration ? "duration" : "distance"; }

std::optional<CostMetric> parse_metric(std::string_view name) {
    if (name == "duration") {
        return CostMetric::Duration;
    }
    if (name == "distance") {
        return CostMetric::Distance;
    }
    return std::nullopt;
}

AllocationPlanner::AllocationPlanner(const plan::JobPlan& job, Variant variant, CostConfig config)
    : job_(job),
      variant_(variant),
      config_(std::move(config)),
      candidates_(job.worker_ids(), variant == Variant::CollabMT ? 2 : 1) {
    job_.validate();
    config_.distance.validate();
    distance_.gains = config_.distance;
    distance_.human_positions = config_.human_positions;
    distance_.robot_positions = config_.robot_positions;
    for (const auto& a : job_.actions) {
        if (a.position) {
            distance_.action_positions[a.id] = *a.position;
        }
    }

    for (const auto& cand : candidates_.all()) {
        std::vector<std::optional<double>> row;
        for (const auto& a : job_.actions) {
            row.push_back(static_cost(a.id, cand.id));
        }
        const bool any = std::any_of(row.begin(), row.end(), [](const auto& c) { return c.has_value(); });
        const double calibrated = any ? cost::calibrate_gains(row).alpha : 0.0;
        if (!cand.is_collaboration()) {
            auto it = config_.alpha.find(cand.id);
            alpha_[cand.id] = it != config_.alpha.end() ? it->second : calibrated;
        }
        auto it = config_.psi.find(cand.id);
        ledger_.set_gain(cand.id, it != config_.psi.end() ? it->second : calibrated);
    }
}

std::optional<double> AllocationPlanner::static_cost(const std::string& action, const std::string& candidate) const {
    const auto& spec = job_.action(action);
    auto d = spec.durations.find(candidate);
    if (d == spec.durations.end()) {
        return std::nullopt;
    }
    if (config_.metric == CostMetric::Distance) {
        auto init = spec.init_costs.find(candidate);
        if (init != spec.init_costs.end()) {
            return init->second;
        }
    }
    return d->second;
}

cost::CandidateMembers AllocationPlanner::members(const std::string& candidate) const {
    cost::CandidateMembers out;
    for (const auto& m : alloc::split_candidate_id(candidate)) {
        (job_.worker(m).type == plan::WorkerType::Human ? out.humans : out.robots).push_back(m);
    }
    return out;
}

std::optional<double> AllocationPlanner::base_cost(const std::string& action, const std::string& candidate) const {
    auto c = static_cost(action, candidate);
    if (!c || config_.metric == CostMetric::Duration) {
        return c;
    }
    return cost::distance_cost(distance_, members(candidate), action, *c);
}

double AllocationPlanner::alpha(const std::string& worker) const { return alpha_.at(worker); }

alloc::AllocationProblem AllocationPlanner::build(const std::vector<std::string>& actions,
                                                  const std::map<std::string, AgentRecord>& agents,
                                                  double now) const {
    const auto& workers = candidates_.workers();
    std::vector<double> xi;
    for (const auto& w : workers) {
        const auto& rec = agents.at(w);
        cost::WorkerAvailability state;
        state.available = rec.available;
        state.current_action = rec.busy_action;
        state.nominal_duration = rec.busy_duration;
        state.elapsed = now - rec.busy_since;
        state.alpha = alpha_.at(w);
        xi.push_back(cost::availability_cost(state, config_.availability));
    }

    const std::size_t P = candidates_.size();
    const std::size_t L = actions.size();
    alloc::Grid<std::optional<double>> cost(P, L);
    alloc::Grid<double> preference(P, L, 0.0);
    for (std::size_t i = 0; i < P; ++i) {
        const auto& id = candidates_[i].id;
        for (std::size_t j = 0; j < L; ++j) {
            cost(i, j) = base_cost(actions[j], id);
            preference(i, j) = ledger_.cost(id, actions[j]);
        }
    }

    if (variant_ != Variant::CollabMT) {
        // The cooperative objective has no preference term of its own.
        for (std::size_t i = 0; i < P; ++i) {
            for (std::size_t j = 0; j < L; ++j) {
                if (cost(i, j)) {
                    *cost(i, j) += preference(i, j);
                }
            }
        }
        return alloc::build_cooperative({workers, actions, cost, xi, {}});
    }

    std::vector<double> availability;
    for (const auto& cand : candidates_.all()) {
        std::vector<double> member_costs;
        for (std::size_t m : cand.members) {
            member_costs.push_back(xi[m]);
        }
        availability.push_back(cost::collaborative_availability(member_costs));
    }
    std::vector<bool> enabled;
    for (const auto& a : actions) {
        enabled.push_back(job_.action(a).collaborative);
    }
    return alloc::build_collaborative({candidates_, actions, cost, preference, availability, enabled, {}, config_.counting});
}

}  // namespace hrt::nodes
