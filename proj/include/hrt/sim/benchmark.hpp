#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrt/nodes/planner.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::sim {

enum class Topology { Series, Parallel };

std::string_view to_string(Topology topology);
std::optional<Topology> parse_topology(std::string_view name);

/// Synthetic job: `actions` actions in one sequence or one parallel group,
/// `workers` robots, every single and pair cost drawn uniformly from the
/// integers 5..50. Every action is collaboration-enabled.
plan::JobPlan generate_plan(Topology topology, std::size_t actions, std::size_t workers, std::uint64_t seed);

struct BenchmarkSpec {
    Topology topology = Topology::Series;
    std::vector<std::size_t> actions;
    std::vector<std::size_t> agents;
    nodes::Variant variant = nodes::Variant::CollabMT;
    int repetitions = 10;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on empty or non-positive counts.
    void validate() const;
};

struct BenchmarkRow {
    Topology topology = Topology::Series;
    nodes::Variant variant = nodes::Variant::CollabMT;
    std::size_t actions = 0;
    std::size_t agents = 0;
    std::size_t candidates = 0;
    int repetitions = 0;
    double total_ms_mean = 0.0;   // allocation compute per run
    double total_ms_stddev = 0.0;
    double per_action_ms = 0.0;   // total / actions
    double solves_mean = 0.0;
};

/// For every (actions, agents) pair, runs the same generated job
/// `repetitions` times and reports the allocation compute time: wall time
/// of the ticks that ran the allocator, simulated execution excluded.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec& spec);

}  // namespace hrt::sim
