#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hrt/alloc/solver.hpp"
#include "hrt/cost/cost_models.hpp"
#include "hrt/nodes/planner.hpp"
#include "hrt/service/job_document.hpp"
#include "hrt/sim/benchmark.hpp"
#include "hrt/sim/engine.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace hrt;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kIsolationBudgetS = 1.0;
constexpr double kOracleBudgetS = 60.0;
constexpr int kRandomInstances = 1000;
constexpr double kScaleTotalTargetMs = 1000.0;
constexpr double kScaleTotalAcceptMs = 5000.0;
constexpr double kScalePerActionTargetMs = 50.0;
constexpr double kScalePerActionAcceptMs = 100.0;
constexpr double kDistanceRelTol = 1e-9;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

bool close_rel(double a, double b) { return std::fabs(a - b) <= kDistanceRelTol * std::max(std::fabs(a), std::fabs(b)); }

std::string candidate_of(const sim::SimResult& r, const std::string& action) {
    const auto* e = r.trace.completed(action);
    return e ? e->candidate : std::string("<none>");
}

std::map<std::string, nodes::AgentRecord> free_agents(const plan::JobPlan& job) {
    std::map<std::string, nodes::AgentRecord> out;
    for (const auto& w : job.workers) {
        nodes::AgentRecord r;
        r.id = w.id;
        r.type = w.type;
        out[w.id] = r;
    }
    return out;
}

Outcome isolation() {
    const auto t0 = Clock::now();
    int collab = 0;
    int coop_st = 0;
    int coop_mt = 0;
    std::vector<std::string> misses;
    for (const auto& row : support::simulated_rows()) {
        auto p = support::simulated_problem({row.action}, alloc::Mode::Collaborative);
        auto r = alloc::solve(p);
        if (r.feasible() && r.solution().named(p).at(0).first == row.collab_mt) {
            ++collab;
        } else {
            misses.push_back("collab " + row.action);
        }
        auto q = support::simulated_problem({row.action}, alloc::Mode::Cooperative);
        auto s = alloc::solve(q);
        const std::string coop = s.feasible() ? s.solution().named(q).at(0).first : "<none>";
        if (coop == row.coop_st) {
            ++coop_st;
        } else {
            misses.push_back("coop-st " + row.action);
        }
        if (row.action != "a4") {
            if (coop == row.coop_mt) {
                ++coop_mt;
            } else {
                misses.push_back("coop-mt " + row.action);
            }
        }
    }
    const double elapsed = seconds_since(t0);
    std::string detail = "collab-mt " + std::to_string(collab) + "/13, coop-st " + std::to_string(coop_st) +
                         "/13, coop-mt " + std::to_string(coop_mt) + "/12 (a4 excluded), " + fmt(elapsed, 4) + " s";
    for (const auto& m : misses) {
        detail += "; miss " + m;
    }
    return {collab == 13 && coop_st == 13 && coop_mt == 12 && elapsed < kIsolationBudgetS, detail};
}

Outcome first_step() {
    auto p = support::simulated_problem({"a1", "a5", "a7"}, alloc::Mode::Cooperative);
    const auto r = alloc::solve(p);
    const auto b = alloc::brute_force_solve(p);
    if (!r.feasible() || !b.feasible()) {
        return {false, "infeasible"};
    }
    const std::vector<std::pair<std::string, std::string>> expected{{"w1", "a1"}, {"w2", "a5"}, {"w3", "a7"}};
    const auto named = r.solution().named(p);
    std::string pairs;
    for (const auto& [c, a] : named) {
        pairs += "(" + c + "," + a + ")";
    }
    const bool pass = named == expected && r.solution().objective == 59.0 && b.solution().objective == 59.0;
    return {pass, pairs + " objective " + fmt(r.solution().objective, 1) + ", brute force " +
                      fmt(b.solution().objective, 1)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<int> size(1, 4);
    std::bernoulli_distribution collaborative(0.75);
    const auto t0 = Clock::now();
    int mismatches = 0;
    int feasible = 0;
    for (int i = 0; i < kRandomInstances; ++i) {
        const auto p = oracle::random_instance(rng, size(rng), size(rng), collaborative(rng));
        const auto r = alloc::solve(p);
        const auto b = alloc::brute_force_solve(p);
        if (r.feasible() != b.feasible()) {
            ++mismatches;
        } else if (r.feasible()) {
            ++feasible;
            if (r.solution().objective != b.solution().objective) {
                ++mismatches;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    return {mismatches == 0 && elapsed < kOracleBudgetS,
            std::to_string(kRandomInstances) + " instances (" + std::to_string(feasible) + " feasible), " +
                std::to_string(mismatches) + " mismatches, " + fmt(elapsed, 2) + " s"};
}

Outcome constraint_suite() {
    std::mt19937_64 rng(2002);
    std::uniform_int_distribution<int> size(1, 4);
    int violations = 0;
    int feasible = 0;
    int missed = 0;
    for (int i = 0; i < kRandomInstances; ++i) {
        const auto rule = i % 2 == 0 ? alloc::CountingRule::Epsilon : alloc::CountingRule::Scaled;
        const auto p = oracle::random_instance(rng, size(rng), size(rng), true, rule);
        const auto r = alloc::solve(p);
        const auto expected = oracle::exhaustive(p);
        if (r.feasible() != expected.feasible) {
            ++missed;
            continue;
        }
        if (!r.feasible()) {
            continue;
        }
        ++feasible;
        if (!oracle::violations(p, r.solution().assignment).empty()) {
            ++violations;
        }
    }
    return {violations == 0 && missed == 0,
            std::to_string(feasible) + " feasible solutions checked, " + std::to_string(violations) +
                " violating, " + std::to_string(missed) + " feasibility disagreements"};
}

Outcome scalability() {
    sim::BenchmarkSpec spec;
    spec.topology = sim::Topology::Series;
    spec.actions = {50};
    spec.agents = {20};
    spec.variant = nodes::Variant::CollabMT;
    spec.repetitions = 3;
    const auto rows = sim::run_benchmark(spec);
    const auto& row = rows.at(0);
    const bool accepted = row.total_ms_mean <= kScaleTotalAcceptMs && row.per_action_ms <= kScalePerActionAcceptMs;
    const bool target = row.total_ms_mean <= kScaleTotalTargetMs && row.per_action_ms <= kScalePerActionTargetMs;
    return {accepted && row.candidates == 210,
            "series 50 actions, 20 agents, " + std::to_string(row.candidates) + " candidates: total " +
                fmt(row.total_ms_mean, 1) + " ms, per action " + fmt(row.per_action_ms, 2) + " ms, target " +
                (target ? "met" : "not met")};
}

Outcome makespan_ordering() {
    const auto doc = service::load_job(support::job_path("simulated_13.json"));
    std::map<nodes::Variant, double> span;
    for (auto v : {nodes::Variant::CollabMT, nodes::Variant::CoopMT, nodes::Variant::CoopST}) {
        sim::SimOptions options;
        options.variant = v;
        options.cost = doc.cost;
        const auto r = sim::run_sim(doc.plan, options);
        if (r.status != sim::RunStatus::Completed) {
            return {false, std::string(nodes::to_string(v)) + " did not complete: " + r.reason};
        }
        span[v] = sim::makespan(r.trace);
    }
    const double a = span[nodes::Variant::CollabMT];
    const double b = span[nodes::Variant::CoopMT];
    const double c = span[nodes::Variant::CoopST];
    return {a < b && b <= c, "collab-mt " + fmt(a, 2) + " s, coop-mt " + fmt(b, 2) + " s, coop-st " + fmt(c, 2) + " s"};
}

Outcome rejection_flow() {
    const auto doc = service::load_job(support::job_path("table_assembly_19.json"));
    sim::SimOptions options;
    options.cost = doc.cost;
    options.policies["h"] = sim::HumanPolicy::scripted({{"a6", 1}});
    const auto r = sim::run_sim(doc.plan, options);
    if (r.status != sim::RunStatus::Completed) {
        return {false, "run did not complete: " + r.reason};
    }
    bool offered_h = false;
    bool preference = false;
    bool reallocated = false;
    for (const auto& e : r.events) {
        if (e.kind == "allocation") {
            for (const auto& pair : e.payload["pairs"]) {
                if (pair["action"] == "a6") {
                    offered_h = offered_h || (!preference && pair["candidate"] == "h");
                    reallocated = reallocated || (preference && pair["candidate"] == "r");
                }
            }
        } else if (e.kind == "preference" && e.payload["candidate"] == "h" && e.payload["action"] == "a6" &&
                   e.payload["negations"] == 1 && e.payload["psi"].get<double>() > 0.0) {
            preference = true;
        }
    }
    const bool flow = offered_h && preference && reallocated && candidate_of(r, "a6") == "r" &&
                      r.trace.rejections.size() == 1;

    nodes::AllocationPlanner planner(doc.plan, nodes::Variant::CollabMT, doc.cost);
    const auto agents = free_agents(doc.plan);
    const auto before = alloc::solve(planner.build({"a6"}, agents, 0.0));
    planner.ledger().record("h", "a6", cost::NegotiationOutcome::Rejected);
    const auto p = planner.build({"a6"}, agents, 0.0);
    const auto after = alloc::solve(p);
    bool instance_ok = before.feasible() && after.feasible();
    if (instance_ok) {
        const auto h = *p.candidates.find("h");
        double alternative = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < p.candidate_count(); ++c) {
            if (c != h && p.is_feasible(c, 0)) {
                alternative = std::min(alternative, p.weight(c, 0));
            }
        }
        const bool chose_h = after.solution().candidate_for(0) == h;
        instance_ok = !(chose_h && alternative <= p.weight(h, 0));
    }

    std::mt19937_64 rng(3003);
    int exercised = 0;
    int reoffered = 0;
    for (int i = 0; i < kRandomInstances; ++i) {
        auto q = oracle::random_instance(rng, 3, 2, true);
        const auto s = alloc::solve(q);
        if (!s.feasible() || s.solution().assignment.empty()) {
            continue;
        }
        const auto chosen = s.solution().assignment.front();
        const auto alt = oracle::exhaustive(
            q, std::pair<int, int>{static_cast<int>(chosen.candidate), static_cast<int>(chosen.action)});
        if (!alt.feasible || alt.objective > s.solution().objective) {
            continue;
        }
        q.preference(chosen.candidate, chosen.action) += 1.0;
        const auto again = alloc::solve(q);
        const auto& a = again.solution().assignment;
        if (std::find(a.begin(), a.end(), chosen) != a.end()) {
            ++reoffered;
        }
        ++exercised;
    }
    return {flow && instance_ok && reoffered == 0 && exercised > 0,
            std::string("h offered a6 ") + (offered_h ? "yes" : "no") + ", preference raised " +
                (preference ? "yes" : "no") + ", a6 completed by " + candidate_of(r, "a6") + ", re-solve " +
                (instance_ok ? "ok" : "re-offers h") + ", property " + std::to_string(reoffered) + "/" +
                std::to_string(exercised) + " re-offered"};
}

Outcome cost_values() {
    std::vector<std::string> failed;
    int total = 0;
    auto expect = [&](bool ok, const std::string& name) {
        ++total;
        if (!ok) {
            failed.push_back(name);
        }
    };
    cost::WorkerAvailability w;
    expect(cost::availability_cost(w, cost::AvailabilityMode::RemainingTime) == 0.0, "available");
    w.available = false;
    w.current_action = "a";
    w.alpha = 40.0;
    w.nominal_duration = 20.0;
    w.elapsed = 0.0;
    expect(cost::availability_cost(w, cost::AvailabilityMode::RemainingTime) == 40.0, "busy at start");
    w.elapsed = 20.0;
    expect(cost::availability_cost(w, cost::AvailabilityMode::RemainingTime) == 0.0, "busy at end");
    expect(cost::availability_cost(w, cost::AvailabilityMode::Binary) == 40.0, "binary busy");

    const std::vector<double> mixed{0.0, 5.0};
    const std::vector<double> idle{0.0, 0.0};
    const std::vector<double> single{7.0};
    expect(cost::collaborative_availability(mixed) == 5.0, "pair max");
    expect(cost::collaborative_availability(idle) == 0.0, "pair idle");
    expect(cost::collaborative_availability(single) == 7.0, "single");

    expect(cost::preference_cost({0, 0}, 40.0) == 0.0, "no history");
    expect(cost::preference_cost({1, 2}, 40.0) == 20.0, "one of two");
    expect(cost::preference_cost({3, 3}, 40.0) == 40.0, "three of three");

    cost::PreferenceLedger ledger;
    ledger.set_gain("h", 40.0);
    ledger.record("h", "a", cost::NegotiationOutcome::Rejected);
    expect(ledger.entry("h", "a") == cost::PreferenceEntry{1, 1}, "fresh reject");
    ledger.record("h", "b", cost::NegotiationOutcome::Accepted);
    ledger.record("h", "b", cost::NegotiationOutcome::Rejected);
    expect(ledger.entry("h", "b") == cost::PreferenceEntry{1, 2} && ledger.cost("h", "b") == 20.0, "accept then reject");
    ledger.record("h+r", "c", cost::NegotiationOutcome::Rejected);
    expect(ledger.entry("h+r", "c") == cost::PreferenceEntry{1, 1} && ledger.entry("h", "c") == cost::PreferenceEntry{} &&
               ledger.entry("r", "c") == cost::PreferenceEntry{},
           "pair entry");

    const std::vector<std::optional<double>> three{15.0, 20.0, 25.0};
    const std::vector<std::optional<double>> one{7.0};
    const std::vector<std::optional<double>> none{std::nullopt};
    const auto g3 = cost::calibrate_gains(three);
    const auto g1 = cost::calibrate_gains(one);
    expect(g3.alpha == 25.0 && g3.psi == 25.0, "calibrate max");
    expect(g1.alpha == 7.0 && g1.psi == 7.0, "calibrate single");
    bool threw = false;
    try {
        cost::calibrate_gains(none);
    } catch (const std::exception&) {
        threw = true;
    }
    expect(threw, "calibrate empty");

    cost::DistanceGains tiny;
    tiny.epsilon = 1e-12;
    expect(close_rel(cost::distance_cost(cost::CandidateClass::Robot, 20.0, 0.5, 0.0, tiny), 60.0), "robot 0.5 m");
    cost::DistanceGains standard;
    expect(close_rel(cost::distance_cost(cost::CandidateClass::Robot, 20.0, 0.5, 0.0, standard), 20.0 + 20.0 / 0.501),
           "robot default eps");
    expect(cost::distance_cost(cost::CandidateClass::Human, 40.0, 0.1, 3.0, standard) == 40.0, "human");
    expect(close_rel(cost::distance_cost(cost::CandidateClass::Collaboration, 15.0, 1.0, 0.0, standard), 15.0),
           "collab touching");
    expect(close_rel(cost::distance_cost(cost::CandidateClass::Collaboration, 15.0, 1.0, 2.0, standard), 85.0),
           "collab 2 m");

    std::string detail = std::to_string(total - static_cast<int>(failed.size())) + "/" + std::to_string(total) + " values";
    for (const auto& f : failed) {
        detail += "; wrong " + f;
    }
    return {failed.empty(), detail};
}

Outcome distance_steering() {
    auto doc = service::load_job(support::job_path("table_assembly_19.json"));
    doc.cost.metric = nodes::CostMetric::Distance;
    const auto agents = free_agents(doc.plan);
    int checked = 0;
    int violations = 0;
    int forced = 0;
    std::vector<std::string> ids;
    for (const auto& a : doc.plan.actions) {
        if (a.position) {
            ids.push_back(a.id);
        }
    }
    for (const auto& target : ids) {
        std::vector<std::vector<std::string>> sets{{target}};
        for (const auto& other : ids) {
            if (other != target) {
                sets.push_back({target, other});
            }
        }
        for (const auto& actions : sets) {
            auto config = doc.cost;
            for (const auto& w : doc.plan.workers) {
                if (w.type == plan::WorkerType::Human) {
                    config.human_positions[w.id] = *doc.plan.action(target).position;
                }
            }
            nodes::AllocationPlanner planner(doc.plan, nodes::Variant::CollabMT, config);
            const auto p = planner.build(actions, agents, 0.0);
            const auto r = alloc::solve(p);
            if (!r.feasible()) {
                continue;
            }
            const auto j = static_cast<std::size_t>(
                std::find(p.actions.begin(), p.actions.end(), target) - p.actions.begin());
            for (std::size_t c = 0; c < p.candidate_count(); ++c) {
                const auto& members = p.candidates[c].members;
                if (members.size() != 1 ||
                    agents.at(p.candidates.workers()[members[0]]).type != plan::WorkerType::Robot) {
                    continue;
                }
                ++checked;
                const std::pair<int, int> excluded{static_cast<int>(c), static_cast<int>(j)};
                if (r.solution().candidate_for(j) != c) {
                    continue;
                }
                if (oracle::exhaustive(p, excluded).feasible) {
                    ++violations;
                } else {
                    ++forced;
                }
            }
        }
    }
    return {violations == 0 && checked > 0,
            std::to_string(checked) + " robot/action checks, " + std::to_string(violations) +
                " robot allocations with an alternative, " + std::to_string(forced) + " without one"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"isolation allocation of the simulated job", isolation},
        {"first cooperative step", first_step},
        {"solver equals brute force on random instances", oracle_equivalence},
        {"constraint property suite", constraint_suite},
        {"scalability at 50 actions and 20 agents", scalability},
        {"makespan ordering of the variants", makespan_ordering},
        {"rejection flow and monotone re-solve", rejection_flow},
        {"cost model unit values", cost_values},
        {"distance cost steers the robot away from the human", distance_steering},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
