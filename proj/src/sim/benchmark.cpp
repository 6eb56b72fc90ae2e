#include "hrt/sim/benchmark.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hrt/sim/engine.hpp"

namespace hrt::sim {

std::string_view to_string(Topology topology) { return topology == Topology::Series ? "series" : "parallel"; }

std::optional<Topology> parse_topology(std::string_view name) {
    if (name == "series") {
        return Topology::Series;
    }
    if (name == "parallel") {
        return Topology::Parallel;
    }
    return std::nullopt;
}

plan::JobPlan generate_plan(Topology topology, std::size_t actions, std::size_t workers, std::uint64_t seed) {
    if (actions == 0 || workers == 0) {
        throw std::invalid_argument("generated plans need at least one action and one worker");
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> cost(5, 50);

    plan::JobPlan job;
    job.name = std::string(to_string(topology)) + "-" + std::to_string(actions) + "x" + std::to_string(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        job.workers.push_back({"w" + std::to_string(w + 1), plan::WorkerType::Robot, false});
    }
    const alloc::CandidateSet candidates(job.worker_ids(), 2);
    plan::PlanGroup group;
    group.kind = topology == Topology::Series ? plan::PlanGroup::Kind::Sequence : plan::PlanGroup::Kind::Parallel;
    for (std::size_t a = 0; a < actions; ++a) {
        plan::ActionSpec spec;
        spec.id = "a" + std::to_string(a + 1);
        spec.label = spec.id;
        spec.collaborative = true;
        for (const auto& c : candidates.all()) {
            spec.durations[c.id] = cost(rng);
        }
        job.actions.push_back(std::move(spec));
        group.children.emplace_back(job.actions.back().id);
    }
    job.structure = std::move(group);
    return job;
}

void BenchmarkSpec::validate() const {
    if (actions.empty() || agents.empty()) {
        throw std::invalid_argument("benchmark needs action and agent counts");
    }
    for (auto n : actions) {
        if (n == 0) {
            throw std::invalid_argument("action counts must be positive");
        }
    }
    for (auto n : agents) {
        if (n == 0) {
            throw std::invalid_argument("agent counts must be positive");
        }
    }
    if (repetitions < 1) {
        throw std::invalid_argument("repetitions must be >= 1");
    }
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec& spec) {
    spec.validate();
    std::vector<BenchmarkRow> rows;
    for (auto n_actions : spec.actions) {
        for (auto n_agents : spec.agents) {
            const auto job = generate_plan(spec.topology, n_actions, n_agents, spec.seed);
            SimOptions options;
            options.variant = spec.variant;
            options.cost.availability = cost::AvailabilityMode::Binary;
            options.memoize = true;

            BenchmarkRow row;
            row.topology = spec.topology;
            row.variant = spec.variant;
            row.actions = n_actions;
            row.agents = n_agents;
            row.repetitions = spec.repetitions;
            std::vector<double> totals;
            double solves = 0.0;
            for (int rep = 0; rep < spec.repetitions; ++rep) {
                const auto result = run_sim(job, options);
                if (result.status != RunStatus::Completed) {
                    throw std::runtime_error("benchmark run failed: " + result.reason);
                }
                row.candidates = result.candidates;
                totals.push_back(std::chrono::duration<double, std::milli>(result.allocation_tick_time).count());
                solves += static_cast<double>(result.stats.solves);
            }
            double mean = 0.0;
            for (double t : totals) {
                mean += t;
            }
            mean /= static_cast<double>(totals.size());
            double var = 0.0;
            for (double t : totals) {
                var += (t - mean) * (t - mean);
            }
            row.total_ms_mean = mean;
            row.total_ms_stddev = totals.size() > 1 ? std::sqrt(var / static_cast<double>(totals.size() - 1)) : 0.0;
            row.per_action_ms = mean / static_cast<double>(n_actions);
            row.solves_mean = solves / static_cast<double>(spec.repetitions);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace hrt::sim
