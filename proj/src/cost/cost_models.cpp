#include "hrt/cost/cost_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hrt::cost {

double availability_cost(const WorkerAvailability& worker, AvailabilityMode mode) {
    if (worker.available) {
        return 0.0;
    }
    if (mode == AvailabilityMode::Binary) {
        return worker.alpha;
    }
    if (worker.nominal_duration <= 0.0) {
        return 0.0;
    }
    const double elapsed = std::clamp(worker.elapsed, 0.0, worker.nominal_duration);
    return worker.alpha * (worker.nominal_duration - elapsed) / worker.nominal_duration;
}

double collaborative_availability(std::span<const double> member_costs) {
    if (member_costs.empty()) {
        throw std::invalid_argument("candidate without members");
    }
    return *std::max_element(member_costs.begin(), member_costs.end());
}

double preference_cost(const PreferenceEntry& entry, double gain) {
    if (entry.negotiations == 0) {
        return 0.0;
    }
    return gain * static_cast<double>(entry.negations) / static_cast<double>(entry.negotiations);
}

const PreferenceEntry& PreferenceLedger::record(const std::string& candidate, const std::string& action,
                                                NegotiationOutcome outcome) {
    PreferenceEntry& e = entries_[{candidate, action}];
    ++e.negotiations;
    if (outcome == NegotiationOutcome::Rejected) {
        ++e.negations;
    }
    return e;
}

PreferenceEntry PreferenceLedger::entry(const std::string& candidate, const std::string& action) const {
    auto it = entries_.find({candidate, action});
    return it == entries_.end() ? PreferenceEntry{} : it->second;
}

void PreferenceLedger::set_gain(const std::string& candidate, double gain) {
    if (!std::isfinite(gain) || gain < 0.0) {
        throw std::invalid_argument("preference gain must be finite and >= 0");
    }
    gains_[candidate] = gain;
}

double PreferenceLedger::gain(const std::string& candidate) const {
    auto it = gains_.find(candidate);
    return it == gains_.end() ? 0.0 : it->second;
}

double PreferenceLedger::cost(const std::string& candidate, const std::string& action) const {
    return preference_cost(entry(candidate, action), gain(candidate));
}

Gains calibrate_gains(std::span<const std::optional<double>> costs) {
    std::optional<double> best;
    for (const auto& c : costs) {
        if (c && (!best || *c > *best)) {
            best = *c;
        }
    }
    if (!best) {
        throw std::invalid_argument("cannot calibrate gains: worker has no feasible action");
    }
    return Gains{*best, *best};
}

double distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

void DistanceGains::validate() const {
    if (!(beta > 0.0) || !(gamma > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("distance gains beta, gamma and epsilon must be > 0");
    }
}

double distance_cost(CandidateClass kind, double c_init, double human_to_action, double human_to_robot,
                     const DistanceGains& gains) {
    switch (kind) {
        case CandidateClass::Human: return c_init;
        case CandidateClass::Robot: return c_init + gains.beta / (human_to_action + gains.epsilon);
        case CandidateClass::Collaboration: return c_init + gains.gamma * human_to_robot;
    }
    return c_init;
}

double distance_cost(const DistanceContext& context, const CandidateMembers& candidate, const std::string& action,
                     double c_init) {
    if (candidate.robots.empty()) {
        return c_init;
    }
    if (candidate.humans.empty()) {
        auto target = context.action_positions.find(action);
        if (target == context.action_positions.end() || context.human_positions.empty()) {
            return c_init;
        }
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& entry : context.human_positions) {
            nearest = std::min(nearest, distance(entry.second, target->second));
        }
        return distance_cost(CandidateClass::Robot, c_init, nearest, 0.0, context.gains);
    }
    double separation = 0.0;
    bool known = false;
    for (const auto& h : candidate.humans) {
        auto ph = context.human_positions.find(h);
        for (const auto& r : candidate.robots) {
            auto pr = context.robot_positions.find(r);
            if (ph != context.human_positions.end() && pr != context.robot_positions.end()) {
                separation = std::max(separation, distance(ph->second, pr->second));
                known = true;
            }
        }
    }
    return known ? distance_cost(CandidateClass::Collaboration, c_init, 0.0, separation, context.gains) : c_init;
}

}  // namespace hrt::cost
