#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hrt::cost {

// ---------------------------------------------------------------------------
// Availability
// ---------------------------------------------------------------------------

enum class AvailabilityMode { Binary, RemainingTime };

struct WorkerAvailability {
    bool available = true;
    std::optional<std::string> current_action;
    double nominal_duration = 0.0;  // T_a, seconds
    double elapsed = 0.0;           // t_a, seconds, only meaningful when busy
    double alpha = 0.0;             // gain
};

/// Zero for an available worker; alpha (binary) or alpha * remaining
/// fraction of the current action (remaining-time) otherwise. Elapsed time
/// is clamped to [0, T_a].
double availability_cost(const WorkerAvailability& worker, AvailabilityMode mode);

/// Availability of a candidate from its members' costs: the member cost for
/// a single worker, the maximum over members for a collaboration.
double collaborative_availability(std::span<const double> member_costs);

// ---------------------------------------------------------------------------
// Preference
// ---------------------------------------------------------------------------

enum class NegotiationOutcome { Accepted, Rejected };

struct PreferenceEntry {
    int negations = 0;
    int negotiations = 0;
    bool operator==(const PreferenceEntry&) const = default;
};

/// gain * negations / negotiations, and 0 without any negotiation.
double preference_cost(const PreferenceEntry& entry, double gain);

/// Negotiation history keyed by (candidate id, action id). Collaborations
/// have their own entries, independent of their members'.
class PreferenceLedger {
public:
    const PreferenceEntry& record(const std::string& candidate, const std::string& action, NegotiationOutcome outcome);

    [[nodiscard]] PreferenceEntry entry(const std::string& candidate, const std::string& action) const;

    void set_gain(const std::string& candidate, double gain);
    [[nodiscard]] double gain(const std::string& candidate) const;

    /// psi for the pair, using the candidate's gain.
    [[nodiscard]] double cost(const std::string& candidate, const std::string& action) const;

    [[nodiscard]] const std::map<std::pair<std::string, std::string>, PreferenceEntry>& entries() const {
        return entries_;
    }

private:
    std::map<std::pair<std::string, std::string>, PreferenceEntry> entries_;
    std::map<std::string, double> gains_;
};

struct Gains {
    double alpha = 0.0;
    double psi = 0.0;
};

/// alpha = psi = largest cost among the actions the worker can perform
/// (nullopt entries are not capable). Throws when there is none.
Gains calibrate_gains(std::span<const std::optional<double>> costs);

// ---------------------------------------------------------------------------
// Human-robot distance
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool operator==(const Vec3&) const = default;
};

double distance(const Vec3& a, const Vec3& b);

enum class CandidateClass { Human, Robot, Collaboration };

struct DistanceGains {
    double beta = 20.0;
    double gamma = 35.0;
    double epsilon = 1e-3;  // metres

    /// Throws unless beta, gamma and epsilon are all > 0.
    void validate() const;
};

/// c_init for humans; c_init + beta / (d(human, action) + epsilon) for
/// robots; c_init + gamma * d(human, robot) for human-robot collaborations.
double distance_cost(CandidateClass kind, double c_init, double human_to_action, double human_to_robot,
                     const DistanceGains& gains);

/// Positions known to the distance model. The last posted value is kept
/// for as long as no newer one arrives.
struct DistanceContext {
    DistanceGains gains;
    std::map<std::string, Vec3> human_positions;
    std::map<std::string, Vec3> robot_positions;
    std::map<std::string, Vec3> action_positions;
};

struct CandidateMembers {
    std::vector<std::string> humans;
    std::vector<std::string> robots;
};

/// Distance-augmented cost of a candidate for an action. Robots are
/// penalised by the nearest human's distance to the action; a collaboration
/// containing both kinds pays for its own human-robot separation. Terms
/// whose positions are unknown are dropped.
double distance_cost(const DistanceContext& context, const CandidateMembers& candidate, const std::string& action,
                     double c_init);

}  // namespace hrt::cost
