#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrt/alloc/problem.hpp"
#include "hrt/cost/cost_models.hpp"
#include "hrt/nodes/board.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::nodes {

/// Allocator variants: multi-task with collaborations, multi-task
/// cooperative, and single-task cooperative (a new batch is only allocated
/// once every action of the previous one has finished).
enum class Variant { CollabMT, CoopMT, CoopST };

std::string_view to_string(Variant variant);
std::optional<Variant> parse_variant(std::string_view name);

enum class CostMetric { Duration, Distance };

std::string_view to_string(CostMetric metric);
std::optional<CostMetric> parse_metric(std::string_view name);

struct CostConfig {
    CostMetric metric = CostMetric::Duration;
    cost::AvailabilityMode availability = cost::AvailabilityMode::RemainingTime;
    cost::DistanceGains distance;
    std::map<std::string, double> alpha;  // per worker; calibrated when absent
    std::map<std::string, double> psi;    // per candidate; calibrated when absent
    std::map<std::string, cost::Vec3> human_positions;  // initial, may be updated during the run
    std::map<std::string, cost::Vec3> robot_positions;
    alloc::CountingRule counting = alloc::CountingRule::Epsilon;
};

/// Builds allocation problems for a job. Owns the mutable cost state
/// (negotiation history and known positions).
class AllocationPlanner {
public:
    AllocationPlanner(const plan::JobPlan& job, Variant variant, CostConfig config);

    [[nodiscard]] alloc::AllocationProblem build(const std::vector<std::string>& actions,
                                                 const std::map<std::string, AgentRecord>& agents, double now) const;

    /// Suitability cost c of a candidate for an action under the configured
    /// metric, nullopt when the candidate cannot perform it.
    [[nodiscard]] std::optional<double> base_cost(const std::string& action, const std::string& candidate) const;

    [[nodiscard]] double alpha(const std::string& worker) const;

    [[nodiscard]] Variant variant() const { return variant_; }
    [[nodiscard]] const CostConfig& config() const { return config_; }
    [[nodiscard]] const alloc::CandidateSet& candidates() const { return candidates_; }

    cost::PreferenceLedger& ledger() { return ledger_; }
    [[nodiscard]] const cost::PreferenceLedger& ledger() const { return ledger_; }
    cost::DistanceContext& distance() { return distance_; }
    [[nodiscard]] const cost::DistanceContext& distance() const { return distance_; }

private:
    [[nodiscard]] std::optional<double> static_cost(const std::string& action, const std::string& candidate) const;
    [[nodiscard]] cost::CandidateMembers members(const std::string& candidate) const;

    const plan::JobPlan& job_;
    Variant variant_;
    CostConfig config_;
    alloc::CandidateSet candidates_;
    std::map<std::string, double> alpha_;
    cost::PreferenceLedger ledger_;
    cost::DistanceContext distance_;
};

}  // namespace hrt::nodes
