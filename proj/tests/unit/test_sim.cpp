#include <sstream>

#include "doctest.h"

#include "hrt/service/job_document.hpp"
#include "hrt/sim/benchmark.hpp"
#include "hrt/sim/clock.hpp"
#include "hrt/sim/engine.hpp"
#include "support.hpp"

using namespace hrt;

namespace {

sim::SimResult simulate(const std::string& file, nodes::Variant variant, sim::SimOptions options = {}) {
    const auto doc = service::load_job(support::job_path(file));
    options.variant = variant;
    options.cost = doc.cost;
    return sim::run_sim(doc.plan, options);
}

std::vector<sim::Event> without_timing(std::vector<sim::Event> events) {
    for (auto& e : events) {
        e.payload.erase("solve_us");
    }
    return events;
}

std::string candidate_of(const sim::SimResult& r, const std::string& action) {
    const auto* e = r.trace.completed(action);
    return e ? e->candidate : std::string("<none>");
}

}  // namespace

TEST_CASE("makespan of simple traces") {
    CHECK(sim::makespan({}) == 0.0);
    sim::ExecutionTrace t;
    t.entries.push_back({"w1", "a", 0.0, 10.0});
    t.entries.push_back({"w2", "b", 0.0, 12.0});
    CHECK(sim::makespan(t) == 12.0);
}

TEST_CASE("overlap detection") {
    sim::ExecutionTrace t;
    t.entries.push_back({"w1", "a", 0.0, 10.0});
    t.entries.push_back({"w2", "b", 0.0, 10.0});
    t.entries.push_back({"w1", "c", 10.0, 12.0});
    CHECK(sim::overlap_violations(t).empty());
    t.entries.push_back({"w1+w2", "d", 11.0, 15.0});
    CHECK(sim::overlap_violations(t).size() >= 1);
}

TEST_CASE("collaborative run on the simulated job") {
    const auto r = simulate("simulated_13.json", nodes::Variant::CollabMT);
    REQUIRE(r.status == sim::RunStatus::Completed);
    CHECK(candidate_of(r, "a4") == "w1+w2");
    CHECK(candidate_of(r, "a13") == "w2+w3");
    const double first = r.trace.completed("a1")->start;
    CHECK(first < 0.02);
    CHECK(r.trace.completed("a5")->start == first);
    CHECK(r.trace.completed("a7")->start == first);
    CHECK(sim::overlap_violations(r.trace).empty());
    const auto doc = service::load_job(support::job_path("simulated_13.json"));
    CHECK(sim::precedence_violations(r.trace, doc.plan).empty());
    CHECK(r.candidates == 6);
    for (const auto& e : r.trace.entries) {
        CHECK(e.end - e.start == doctest::Approx(*doc.plan.duration(e.action, e.candidate)));
    }
}

TEST_CASE("makespan ordering of the three variants") {
    const auto collab = simulate("simulated_13.json", nodes::Variant::CollabMT);
    const auto coop_mt = simulate("simulated_13.json", nodes::Variant::CoopMT);
    const auto coop_st = simulate("simulated_13.json", nodes::Variant::CoopST);
    REQUIRE(collab.status == sim::RunStatus::Completed);
    REQUIRE(coop_mt.status == sim::RunStatus::Completed);
    REQUIRE(coop_st.status == sim::RunStatus::Completed);
    const double a = sim::makespan(collab.trace);
    const double b = sim::makespan(coop_mt.trace);
    const double c = sim::makespan(coop_st.trace);
    CHECK(a < b);
    CHECK(b <= c);
}

TEST_CASE("single-task cooperative run follows the isolation choices") {
    const auto r = simulate("simulated_13.json", nodes::Variant::CoopST);
    REQUIRE(r.status == sim::RunStatus::Completed);
    for (const auto& row : support::simulated_rows()) {
        CAPTURE(row.action);
        CHECK(candidate_of(r, row.action) == row.coop_st);
    }
}

TEST_CASE("cooperative variants never use collaborations") {
    for (auto v : {nodes::Variant::CoopMT, nodes::Variant::CoopST}) {
        const auto r = simulate("simulated_13.json", v);
        for (const auto& e : r.trace.entries) {
            CHECK(alloc::split_candidate_id(e.candidate).size() == 1);
        }
    }
}

TEST_CASE("scaled counting rule changes the first collaborative step") {
    sim::SimOptions options;
    auto doc = service::load_job(support::job_path("simulated_13.json"));
    options.cost = doc.cost;
    options.cost.counting = alloc::CountingRule::Scaled;
    const auto r = sim::run_sim(doc.plan, options);
    REQUIRE(r.status == sim::RunStatus::Completed);
    CHECK(alloc::split_candidate_id(candidate_of(r, "a1")).size() == 2);
    CHECK(sim::overlap_violations(r.trace).empty());
}

TEST_CASE("one action and one worker") {
    auto doc = service::parse_job(nlohmann::json::parse(R"({
      "name": "one", "workers": [{"id": "r", "type": "robot"}],
      "actions": [{"id": "a", "label": "A", "durations": {"r": 17.5}}], "structure": "a"})"));
    sim::SimOptions options;
    options.cost = doc.cost;
    const auto r = sim::run_sim(doc.plan, options);
    REQUIRE(r.status == sim::RunStatus::Completed);
    REQUIRE(r.trace.entries.size() == 1);
    CHECK(r.trace.entries[0].start < 0.02);
    CHECK(sim::makespan(r.trace) == doctest::Approx(17.5).epsilon(1e-12));
}

TEST_CASE("human rejection moves the action to the robot") {
    sim::SimOptions options;
    options.policies["h"] = sim::HumanPolicy::scripted({{"a6", 1}});
    const auto r = simulate("table_assembly_19.json", nodes::Variant::CollabMT, options);
    REQUIRE(r.status == sim::RunStatus::Completed);
    REQUIRE(r.trace.rejections.size() == 1);
    CHECK(r.trace.rejections[0].worker == "h");
    CHECK(r.trace.rejections[0].action == "a6");
    CHECK(candidate_of(r, "a6") == "r");

    bool preference_raised = false;
    for (const auto& e : r.events) {
        if (e.kind == "preference" && e.payload["candidate"] == "h" && e.payload["action"] == "a6" &&
            e.payload["negations"] == 1) {
            preference_raised = e.payload["psi"].get<double>() > 0.0;
        }
    }
    CHECK(preference_raised);
    const auto doc = service::load_job(support::job_path("table_assembly_19.json"));
    CHECK(sim::overlap_violations(r.trace).empty());
    CHECK(sim::precedence_violations(r.trace, doc.plan).empty());
}

TEST_CASE("runs are deterministic and replayable") {
    sim::SimOptions options;
    options.default_policy = sim::HumanPolicy::probabilistic(0.3);
    const auto a = simulate("table_assembly_19.json", nodes::Variant::CollabMT, options);
    const auto b = simulate("table_assembly_19.json", nodes::Variant::CollabMT, options);
    REQUIRE(a.status == sim::RunStatus::Completed);
    CHECK(a.trace == b.trace);
    CHECK(without_timing(a.events) == without_timing(b.events));

    const auto replayed = sim::replay(a.events);
    CHECK(replayed.trace == a.trace);
    CHECK(replayed.status == "completed");
    CHECK(replayed.completed.size() == 19);

    std::stringstream log;
    for (const auto& e : a.events) {
        log << sim::to_line(e) << '\n';
    }
    const auto parsed = sim::read_events(log);
    CHECK(sim::replay(parsed) == replayed);
}

TEST_CASE("event log lines") {
    sim::Event e{3, 1.25, "accept", {{"worker", "h"}, {"action", "a1"}}};
    const auto line = sim::to_line(e);
    CHECK(line.rfind("3,1.25", 0) == 0);
    CHECK(sim::parse_line(line) == e);
    CHECK_THROWS_AS(sim::parse_line("not a line"), std::invalid_argument);
}

TEST_CASE("replay ignores unknown event kinds") {
    std::vector<sim::Event> events{
        {1, 0.0, "mystery", {{"x", 1}}},
        {2, 0.0, "complete", {{"action", "a"}, {"candidate", "r"}, {"start", 0.0}, {"end", 4.0}}},
    };
    const auto state = sim::replay(events);
    CHECK(state.completed.count("a") == 1);
    CHECK(sim::makespan(state.trace) == 4.0);
}

TEST_CASE("robot fault ends the run as failed with a partial trace") {
    sim::SimOptions options;
    options.faults.emplace_back("w1", "a1", 1);
    const auto r = simulate("simulated_13.json", nodes::Variant::CollabMT, options);
    CHECK(r.status == sim::RunStatus::Failed);
    CHECK_FALSE(r.reason.empty());
    CHECK(r.trace.completed("a1") == nullptr);
}

TEST_CASE("virtual clock") {
    sim::VirtualClock clock(100.0);
    for (int i = 0; i < 250; ++i) {
        clock.advance();
    }
    CHECK(clock.now() == 2.5);
    CHECK_THROWS(sim::VirtualClock(0.0));
}

TEST_CASE("generated plans") {
    const auto series = sim::generate_plan(sim::Topology::Series, 3, 2, 1);
    const auto& seq = std::get<plan::PlanGroup>(series.structure);
    CHECK(seq.kind == plan::PlanGroup::Kind::Sequence);
    CHECK(seq.children.size() == 3);
    CHECK(series.problems().empty());

    const auto wide = sim::generate_plan(sim::Topology::Parallel, 101, 3, 1);
    const auto& par = std::get<plan::PlanGroup>(wide.structure);
    CHECK(par.kind == plan::PlanGroup::Kind::Parallel);
    CHECK(par.children.size() == 101);
    CHECK(par.threshold.value_or(par.children.size()) == 101);

    const auto x = sim::generate_plan(sim::Topology::Series, 10, 4, 42);
    const auto y = sim::generate_plan(sim::Topology::Series, 10, 4, 42);
    REQUIRE(x.actions.size() == y.actions.size());
    for (std::size_t i = 0; i < x.actions.size(); ++i) {
        CHECK(x.actions[i].durations == y.actions[i].durations);
        for (const auto& [candidate, d] : x.actions[i].durations) {
            CHECK(d >= 5.0);
            CHECK(d <= 50.0);
        }
    }
}

TEST_CASE("benchmark reports candidate counts and timings") {
    sim::BenchmarkSpec spec;
    spec.actions = {12};
    spec.agents = {3, 5, 10, 20};
    spec.repetitions = 1;
    const auto rows = sim::run_benchmark(spec);
    REQUIRE(rows.size() == 4);
    CHECK(rows.front().candidates == 6);
    CHECK(rows.back().candidates == 210);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].candidates > rows[i - 1].candidates);
    }

    sim::BenchmarkSpec tiny;
    tiny.actions = {1};
    tiny.agents = {1};
    tiny.repetitions = 3;
    const auto t = sim::run_benchmark(tiny);
    REQUIRE(t.size() == 1);
    CHECK(t[0].candidates == 1);
    CHECK(t[0].total_ms_mean < 50.0);

    sim::BenchmarkSpec bad;
    bad.actions = {0};
    bad.agents = {2};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
