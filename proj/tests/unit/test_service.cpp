#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "hrt/service/http_server.hpp"
#include "hrt/service/run_manager.hpp"
#include "hrt/service/sessions.hpp"
#include "hrt/sim/trace.hpp"
#include "support.hpp"

using namespace hrt;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

/// Short job for wall-clock runs: h and r work in parallel, then h finishes.
json quick_job(bool console = true) {
    return json::parse(std::string(R"({
      "name": "quick",
      "workers": [{"id": "h", "type": "human", "console": )") +
                       (console ? "true" : "false") + R"(}, {"id": "r", "type": "robot"}],
      "actions": [
        {"id": "a1", "label": "Pick part", "durations": {"h": 0.2, "r": 9},
         "instruction": {"kind": "placement", "text": "Put the part in S1"}},
        {"id": "a2", "label": "Fetch tool", "durations": {"h": 5, "r": 0.2}},
        {"id": "a3", "label": "Fasten", "durations": {"h": 0.3, "r": 0.4}}
      ],
      "structure": {"sequence": [{"parallel": ["a1", "a2"]}, "a3"]}
    })");
}

bool eventually(const std::function<bool()>& predicate, std::chrono::milliseconds timeout = 10s) {
    const auto end = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < end) {
        if (predicate()) {
            return true;
        }
        std::this_thread::sleep_for(5ms);
    }
    return predicate();
}

std::vector<std::string> event_kinds(const std::vector<sim::Event>& events) {
    std::vector<std::string> out;
    for (const auto& e : events) {
        out.push_back(e.kind);
    }
    return out;
}

bool has_event(const std::vector<sim::Event>& events, const std::string& kind, const json& subset) {
    for (const auto& e : events) {
        if (e.kind != kind) {
            continue;
        }
        bool all = true;
        for (const auto& [k, v] : subset.items()) {
            all = all && e.payload.contains(k) && e.payload.at(k) == v;
        }
        if (all) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("session gateway validates answers") {
    support::ManualClock clock;
    support::ScriptedGateway fallback;
    service::SessionGateway gw(clock, {"h"}, &fallback);
    CHECK(gw.has_worker("h"));
    CHECK_FALSE(gw.has_worker("r"));
    CHECK_FALSE(gw.pending("h").has_value());

    nodes::NegotiationRequest req;
    req.worker = "h";
    req.action = "a1";
    req.candidate = "h";
    req.label = "Pick";
    req.nominal_duration = 4.0;
    const auto id = gw.send_request(req);
    REQUIRE(gw.pending("h").has_value());
    CHECK(gw.pending("h")->id == id);
    CHECK(gw.pending("h")->to_json()["label"] == "Pick");
    CHECK_THROWS_AS(gw.send_request(req), std::logic_error);

    CHECK(gw.post("r", id, service::Decision::Accept) == service::PostResult::UnknownWorker);
    CHECK(gw.post("h", id + 100, service::Decision::Accept) == service::PostResult::StaleRequest);
    CHECK(gw.post("h", id, service::Decision::Complete) == service::PostResult::WrongKind);
    CHECK(gw.poll_response(id).kind == nodes::ResponseKind::Pending);

    CHECK(gw.post("h", id, service::Decision::Accept) == service::PostResult::Queued);
    CHECK(gw.post("h", id, service::Decision::Accept) == service::PostResult::Duplicate);
    CHECK(gw.post("h", id, service::Decision::Reject) == service::PostResult::Conflict);
    CHECK(gw.poll_response(id).kind == nodes::ResponseKind::Pending);

    clock.set(2.5);
    gw.drain();
    CHECK(gw.poll_response(id).kind == nodes::ResponseKind::Accepted);
    CHECK(gw.poll_response(id).time == 2.5);
    CHECK_FALSE(gw.pending("h").has_value());
    CHECK(gw.post("h", id, service::Decision::Accept) == service::PostResult::Duplicate);

    const auto done = gw.send_completion_query("h", "a1");
    REQUIRE(gw.pending("h").has_value());
    CHECK(gw.pending("h")->kind == service::RequestKind::Completion);
    CHECK(gw.pending("h")->label == "Pick");
    CHECK(gw.post("h", done, service::Decision::Accept) == service::PostResult::WrongKind);
    CHECK(gw.post("h", done, service::Decision::Complete) == service::PostResult::Queued);
    gw.drain();
    CHECK(gw.poll_response(done).kind == nodes::ResponseKind::Completed);
    CHECK(gw.outcomes().size() == 2);
}

TEST_CASE("session gateway forwards workers without a session") {
    support::ManualClock clock;
    support::ScriptedGateway fallback;
    service::SessionGateway gw(clock, {"h"}, &fallback);
    nodes::NegotiationRequest req;
    req.worker = "sim";
    req.action = "a1";
    const auto id = gw.send_request(req);
    REQUIRE(fallback.sent.size() == 1);
    fallback.answer(fallback.sent[0].id, nodes::ResponseKind::Rejected, 1.0);
    CHECK(gw.poll_response(id).kind == nodes::ResponseKind::Rejected);
    gw.cancel(id);
    CHECK(fallback.cancelled.size() == 1);
}

TEST_CASE("cancelled and overdue requests") {
    support::ManualClock clock;
    service::SessionGateway gw(clock, {"h"});
    std::vector<std::string> changes;
    gw.on_change([&changes](const std::string& w) { changes.push_back(w); });
    nodes::NegotiationRequest req;
    req.worker = "h";
    req.action = "a1";
    const auto id = gw.send_request(req);
    clock.set(10.0);
    CHECK(gw.overdue(20.0).empty());
    clock.set(30.0);
    CHECK(gw.overdue(20.0).size() == 1);
    CHECK(gw.overdue(20.0).empty());
    gw.cancel(id);
    CHECK_FALSE(gw.pending("h").has_value());
    CHECK(gw.cancelled().count(id) == 1);
    CHECK(gw.post("h", id, service::Decision::Accept) == service::PostResult::StaleRequest);
    CHECK(changes.size() >= 2);
}

TEST_CASE("simulated run completes without session traffic") {
    service::RunManager runs;
    service::RunConfig config;
    const auto id = runs.start(service::load_job(support::job_path("table_assembly_19.json")), config);
    auto run = runs.find(id);
    REQUIRE(run);
    REQUIRE(run->wait(60s));
    const auto state = run->state();
    CHECK(state["status"] == "completed");
    CHECK(state["makespan"].is_number());
    for (const auto& a : state["actions"]) {
        CHECK(a["status"] == "completed");
    }
    CHECK(run->sessions().outcomes().empty());
    CHECK_FALSE(run->has_session("h"));
    const auto kinds = event_kinds(run->events());
    CHECK(kinds.front() == "run_start");
    CHECK(std::find(kinds.begin(), kinds.end(), "run_mode") != kinds.end());
}

TEST_CASE("snapshot before the first tick") {
    service::RunConfig config;
    service::Run run("r0", service::parse_job(quick_job()), config);
    const auto state = run.state();
    CHECK(state["status"] == "running");
    for (const auto& a : state["actions"]) {
        CHECK(a["status"] == "pending");
    }
    CHECK(state["makespan"].is_null());
}

TEST_CASE("live run negotiates through the session") {
    service::RunConfig config;
    config.mode = service::RunMode::Live;
    service::Run run("live", service::parse_job(quick_job()), config);
    CHECK(run.has_session("h"));
    run.start();

    REQUIRE(eventually([&] { return run.pending("h").has_value(); }));
    auto offer = *run.pending("h");
    CHECK(offer.action == "a1");
    CHECK(offer.instruction == "Put the part in S1");
    CHECK(has_event(run.events(), "request", {{"worker", "h"}, {"action", "a1"}, {"request", offer.id}}));

    const auto state = run.state();
    std::vector<sim::Event> upto;
    for (const auto& e : run.events()) {
        if (e.seq <= state["seq"].get<std::uint64_t>()) {
            upto.push_back(e);
        }
    }
    const auto replayed = sim::replay(upto);
    for (const auto& [action, candidate] : state["allocation"].items()) {
        CHECK(replayed.allocation.at(action) == candidate.get<std::string>());
    }

    CHECK(run.post("h", offer.id + 1000, service::Decision::Accept) == service::PostResult::StaleRequest);
    CHECK(run.post("h", offer.id, service::Decision::Accept) == service::PostResult::Queued);
    REQUIRE(eventually([&] {
        auto p = run.pending("h");
        return p && p->kind == service::RequestKind::Completion;
    }));
    CHECK(run.post("h", run.pending("h")->id, service::Decision::Complete) == service::PostResult::Queued);

    REQUIRE(eventually([&] {
        auto p = run.pending("h");
        return p && p->action == "a3" && p->kind == service::RequestKind::Action;
    }));
    CHECK(run.post("h", run.pending("h")->id, service::Decision::Accept) == service::PostResult::Queued);
    REQUIRE(eventually([&] {
        auto p = run.pending("h");
        return p && p->kind == service::RequestKind::Completion;
    }));
    CHECK(run.post("h", run.pending("h")->id, service::Decision::Complete) == service::PostResult::Queued);
    REQUIRE(run.wait(10s));

    const auto final_state = run.state();
    CHECK(final_state["status"] == "completed");
    const auto trace = sim::replay(run.events()).trace;
    REQUIRE(trace.completed("a1"));
    CHECK(trace.completed("a1")->candidate == "h");
    CHECK(trace.completed("a2")->candidate == "r");
    CHECK(trace.completed("a3")->candidate == "h");
}

TEST_CASE("mixed run routes only console humans through sessions") {
    auto doc = quick_job();
    doc["workers"].push_back({{"id", "g"}, {"type", "human"}});
    doc["actions"].push_back({{"id", "a4"}, {"label", "Check"}, {"durations", {{"g", 0.1}, {"r", 3}}}});
    doc["structure"]["sequence"].push_back("a4");
    service::RunConfig config;
    config.mode = service::RunMode::Mixed;
    service::Run run("mixed", service::parse_job(doc), config);
    CHECK(run.has_session("h"));
    CHECK_FALSE(run.has_session("g"));
    run.start();
    for (int step = 0; step < 4; ++step) {
        REQUIRE(eventually([&] { return run.pending("h").has_value() || run.finished(); }));
        if (run.finished()) {
            break;
        }
        const auto p = *run.pending("h");
        CHECK(run.post("h", p.id,
                       p.kind == service::RequestKind::Action ? service::Decision::Accept
                                                              : service::Decision::Complete) ==
              service::PostResult::Queued);
        REQUIRE(eventually([&] {
            auto q = run.pending("h");
            return !q || q->id != p.id;
        }));
    }
    REQUIRE(run.wait(10s));
    CHECK(run.state()["status"] == "completed");
    const auto events = run.events();
    CHECK(has_event(events, "dispatch", {{"action", "a2"}, {"candidate", "r"}}));
    CHECK(has_event(events, "accept", {{"worker", "g"}, {"action", "a4"}}));
    CHECK(run.sessions().outcomes().size() == 4);
}

TEST_CASE("stopping a run aborts it") {
    service::RunConfig config;
    config.mode = service::RunMode::Live;
    service::Run run("s", service::parse_job(quick_job()), config);
    run.start();
    REQUIRE(eventually([&] { return run.pending("h").has_value(); }));
    run.stop();
    CHECK(run.finished());
    CHECK(run.state()["status"] == "failed");
    CHECK(run.state()["reason"] == "stopped");
}

namespace {

struct Server {
    service::RunManager runs;
    service::HttpService http;
    httplib::Client client;

    explicit Server(std::optional<service::JobDocument> job = std::nullopt)
        : http(runs, std::move(job)), client("127.0.0.1", bind_port()) {
        http.start();
        client.set_read_timeout(10, 0);
    }
    ~Server() {
        http.stop();
        runs.stop_all();
    }

    int bind_port() {
        const int port = http.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        return port;
    }

    std::pair<int, json> get(const std::string& path) {
        auto res = client.Get(path);
        REQUIRE(res);
        return {res->status, res->body.empty() ? json() : json::parse(res->body, nullptr, false)};
    }
    std::pair<int, json> post(const std::string& path, const json& body) {
        auto res = client.Post(path, body.dump(), "application/json");
        REQUIRE(res);
        return {res->status, json::parse(res->body, nullptr, false)};
    }

    json wait_pending(const std::string& worker, const std::function<bool(const json&)>& want) {
        json request;
        const bool ok = eventually([&] {
            auto [status, body] = get("/workers/" + worker + "/pending");
            request = body.value("request", json());
            return status == 200 && !request.is_null() && want(request);
        });
        REQUIRE(ok);
        return request;
    }
};

}  // namespace

TEST_CASE("http run lifecycle and errors") {
    Server s;
    CHECK(s.get("/health").first == 200);
    CHECK(s.client.Options("/runs")->status == 204);

    auto [missing, missing_body] = s.post("/runs", json::object());
    CHECK(missing == 400);
    CHECK(missing_body["error"]["code"] == "missing_job");

    auto bad_job = quick_job();
    bad_job["actions"][0]["durations"]["ghost"] = 1;
    auto [invalid, invalid_body] = s.post("/runs", {{"job", bad_job}});
    CHECK(invalid == 422);
    CHECK(invalid_body["error"]["code"] == "invalid_job");
    CHECK_FALSE(invalid_body["error"]["details"].empty());

    auto [unknown, unknown_body] = s.post("/runs", {{"job", quick_job()}, {"colour", "red"}});
    CHECK(unknown == 400);
    CHECK(unknown_body["error"]["code"] == "bad_request");

    CHECK(s.get("/runs/nope/state").first == 404);
    CHECK(s.get("/runs/nope/state").second["error"]["code"] == "unknown_run");

    auto table = json::parse(std::ifstream(support::job_path("table_assembly_19.json")));
    auto [created, created_body] = s.post("/runs", {{"job", table}, {"mode", "simulated"}, {"reject", {{"h", {{"a6", 1}}}}}});
    REQUIRE(created == 201);
    const std::string id = created_body["run"];
    CHECK(s.get("/runs").second["runs"] == json::array({id}));

    std::string stream;
    auto res = s.client.Get("/runs/" + id + "/events?since=0", [&](const char* data, std::size_t len) {
        stream.append(data, len);
        return true;
    });
    REQUIRE(res);
    CHECK(res->get_header_value("Content-Type").find("text/event-stream") != std::string::npos);
    CHECK(stream.find("event: complete") != std::string::npos);
    CHECK(stream.find("event: reject") != std::string::npos);

    REQUIRE(s.runs.find(id)->wait(30s));
    auto [code, state] = s.get("/runs/" + id + "/state");
    CHECK(code == 200);
    CHECK(state["status"] == "completed");
    CHECK(state["makespan"].get<double>() > 0.0);
    for (const auto& g : state["gantt"]) {
        if (g["action"] == "a6" && g["outcome"] == "completed") {
            CHECK(g["worker"] == "r");
        }
    }
    auto log = s.client.Get("/runs/" + id + "/log");
    REQUIRE(log);
    CHECK(log->get_header_value("Content-Type").find("text/plain") != std::string::npos);
    std::istringstream lines(log->body);
    const auto events = sim::read_events(lines);
    CHECK(sim::replay(events).status == "completed");
    CHECK(has_event(events, "preference", {{"candidate", "h"}, {"action", "a6"}, {"negations", 1}}));
}

TEST_CASE("http worker accept, reject and completion paths") {
    Server s;
    auto [created, body] = s.post("/runs", {{"job", quick_job()}, {"mode", "live"}});
    REQUIRE(created == 201);
    const std::string run = body["run"];

    CHECK(s.get("/workers/nobody/pending").first == 404);
    CHECK(s.get("/workers/nobody/pending").second["error"]["code"] == "unknown_worker");

    auto offer = s.wait_pending("h", [](const json& r) { return r["kind"] == "action"; });
    CHECK(offer["action"] == "a1");
    const auto first = offer["request"].get<std::uint64_t>();

    std::string pushed;
    std::thread listener([&] {
        httplib::Client c("127.0.0.1", s.http.port());
        c.Get("/workers/h/stream", [&](const char* data, std::size_t len) {
            pushed.append(data, len);
            return pushed.find("event: pending") == std::string::npos;
        });
    });
    listener.join();
    CHECK(pushed.find("event: pending") != std::string::npos);

    const auto before = s.get("/runs/" + run + "/state").second["actions"];
    auto [stale, stale_body] = s.post("/workers/h/decision", {{"request", first + 999}, {"decision", "accept"}});
    CHECK(stale == 409);
    CHECK(stale_body["error"]["code"] == "stale_request");
    CHECK(s.get("/runs/" + run + "/state").second["actions"][0] == before[0]);

    auto [bad, bad_body] = s.post("/workers/h/decision", {{"request", first}, {"decision", "maybe"}});
    CHECK(bad == 400);

    CHECK(s.post("/workers/h/decision", {{"request", first}, {"decision", "reject"}}).first == 202);
    CHECK(s.post("/workers/h/decision", {{"request", first}, {"decision", "reject"}}).first == 200);
    auto [conflict, conflict_body] = s.post("/workers/h/decision", {{"request", first}, {"decision", "accept"}});
    CHECK(conflict == 409);
    CHECK(conflict_body["error"]["code"] == "conflicting_decision");

    auto again = s.wait_pending("h", [&](const json& r) { return r["request"].get<std::uint64_t>() != first; });
    CHECK(again["kind"] == "action");
    CHECK(again["action"] == "a1");
    CHECK(s.post("/workers/h/decision", {{"request", again["request"]}, {"decision", "accept"}}).first == 202);

    auto done = s.wait_pending("h", [](const json& r) { return r["kind"] == "completion"; });
    CHECK(done["action"] == "a1");
    auto [wrong, wrong_body] = s.post("/workers/h/decision", {{"request", done["request"]}, {"decision", "accept"}});
    CHECK(wrong == 409);
    CHECK(wrong_body["error"]["code"] == "wrong_kind");
    CHECK(s.post("/workers/h/completion", {{"request", done["request"]}}).first == 202);

    CHECK(s.post("/workers/h/position", {{"position", {0.1, 0.2, 0.0}}}).first == 202);
    CHECK(s.post("/workers/h/position", {{"position", {0.1}}}).first == 400);

    auto next = s.wait_pending("h", [](const json& r) { return r["action"] == "a3" && r["kind"] == "action"; });
    CHECK(s.post("/workers/h/decision", {{"request", next["request"]}, {"decision", "accept"}}).first == 202);
    auto last = s.wait_pending("h", [](const json& r) { return r["kind"] == "completion"; });
    CHECK(s.post("/workers/h/completion", {{"request", last["request"]}}).first == 202);

    REQUIRE(s.runs.find(run)->wait(10s));
    auto state = s.get("/runs/" + run + "/state").second;
    CHECK(state["status"] == "completed");
    for (const auto& a : state["actions"]) {
        CHECK(a["status"] == "completed");
    }
    const auto events = s.runs.find(run)->events();
    CHECK(has_event(events, "reject", {{"worker", "h"}, {"action", "a1"}}));
    CHECK(has_event(events, "preference", {{"candidate", "h"}, {"action", "a1"}, {"negations", 1}}));
    CHECK(has_event(events, "position", {{"worker", "h"}}));
    const auto trace = sim::replay(events).trace;
    REQUIRE(trace.completed("a1"));
    CHECK(trace.completed("a1")->candidate == "h");
    CHECK(s.get("/workers/h/pending").second["request"].is_null());
}
