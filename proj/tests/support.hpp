#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hrt/alloc/problem.hpp"
#include "hrt/nodes/interfaces.hpp"
#include "hrt/plan/job_plan.hpp"

namespace support {

inline std::filesystem::path source_dir() { return HRT_SOURCE_DIR; }
inline std::filesystem::path job_path(const std::string& name) { return source_dir() / "jobs" / name; }

/// Per-action costs of the 13-action simulated job, columns
/// w1, w2, w3, w1+w2, w2+w3, w1+w3, with the expected allocation of each
/// variant when the action is allocated alone.
struct SimulatedRow {
    std::string action;
    std::array<double, 6> cost;
    std::string collab_mt;
    std::string coop_mt;
    std::string coop_st;
};

inline const std::array<std::string, 6> kSimulatedColumns{"w1", "w2", "w3", "w1+w2", "w2+w3", "w1+w3"};

inline const std::vector<SimulatedRow>& simulated_rows() {
    static const std::vector<SimulatedRow> rows{
        {"a1", {15, 20, 25, 32, 33, 29}, "w1", "w1", "w1"},
        {"a2", {27, 22, 20, 33, 31, 32}, "w3", "w3", "w3"},
        {"a3", {17, 21, 19, 25, 27, 12}, "w1+w3", "w1", "w1"},
        {"a4", {13, 14, 11, 9, 20, 17}, "w1+w2", "w1", "w3"},
        {"a5", {18, 17, 25, 27, 32, 30}, "w2", "w2", "w2"},
        {"a6", {27, 29, 31, 36, 40, 38}, "w1", "w1", "w1"},
        {"a7", {37, 35, 27, 41, 47, 42}, "w3", "w3", "w3"},
        {"a8", {38, 33, 39, 45, 43, 44}, "w2", "w2", "w2"},
        {"a9", {27, 25, 24, 30, 34, 31}, "w3", "w3", "w3"},
        {"a10", {13, 19, 18, 11, 25, 23}, "w1+w2", "w1", "w1"},
        {"a11", {17, 12, 20, 15, 23, 24}, "w2", "w2", "w2"},
        {"a12", {31, 25, 24, 38, 37, 36}, "w3", "w3", "w3"},
        {"a13", {10, 9, 12, 15, 7, 18}, "w2+w3", "w2", "w2"},
    };
    return rows;
}

inline const SimulatedRow& simulated_row(const std::string& action) {
    for (const auto& r : simulated_rows()) {
        if (r.action == action) {
            return r;
        }
    }
    throw std::out_of_range(action);
}

/// Allocation problem over `actions` of the simulated job with every worker
/// free and no preference history.
inline hrt::alloc::AllocationProblem simulated_problem(const std::vector<std::string>& actions,
                                                       hrt::alloc::Mode mode) {
    using namespace hrt::alloc;
    const std::vector<std::string> workers{"w1", "w2", "w3"};
    if (mode == Mode::Cooperative) {
        CooperativeInputs in;
        in.workers = workers;
        in.actions = actions;
        in.cost = Grid<std::optional<double>>(3, actions.size());
        for (std::size_t j = 0; j < actions.size(); ++j) {
            for (std::size_t i = 0; i < 3; ++i) {
                in.cost(i, j) = simulated_row(actions[j]).cost[i];
            }
        }
        in.availability.assign(3, 0.0);
        return build_cooperative(in);
    }
    CollaborativeInputs in;
    in.candidates = CandidateSet(workers, 2);
    in.actions = actions;
    in.cost = Grid<std::optional<double>>(in.candidates.size(), actions.size());
    for (std::size_t j = 0; j < actions.size(); ++j) {
        for (std::size_t c = 0; c < kSimulatedColumns.size(); ++c) {
            in.cost(*in.candidates.find(kSimulatedColumns[c]), j) = simulated_row(actions[j]).cost[c];
        }
    }
    in.availability.assign(in.candidates.size(), 0.0);
    return build_collaborative(in);
}

/// Clock set by hand.
class ManualClock : public hrt::nodes::Clock {
public:
    [[nodiscard]] double now() const override { return now_; }
    void set(double t) { now_ = t; }
    void advance(double dt) { now_ += dt; }

private:
    double now_ = 0.0;
};

/// Gateway whose answers are set by the test.
class ScriptedGateway : public hrt::nodes::NegotiationGateway {
public:
    struct Sent {
        hrt::nodes::RequestId id = 0;
        bool completion = false;
        hrt::nodes::NegotiationRequest request;
    };

    hrt::nodes::RequestId send_request(const hrt::nodes::NegotiationRequest& request) override {
        sent.push_back({next_, false, request});
        return next_++;
    }
    hrt::nodes::RequestId send_completion_query(const std::string& worker, const std::string& action) override {
        hrt::nodes::NegotiationRequest r;
        r.worker = worker;
        r.action = action;
        sent.push_back({next_, true, r});
        return next_++;
    }
    hrt::nodes::GatewayResponse poll_response(hrt::nodes::RequestId request) override {
        ++polls;
        auto it = answers.find(request);
        return it == answers.end() ? hrt::nodes::GatewayResponse{} : it->second;
    }
    void cancel(hrt::nodes::RequestId request) override { cancelled.push_back(request); }

    void answer(hrt::nodes::RequestId request, hrt::nodes::ResponseKind kind, double time) {
        answers[request] = {kind, time};
    }

    std::vector<Sent> sent;
    std::map<hrt::nodes::RequestId, hrt::nodes::GatewayResponse> answers;
    std::vector<hrt::nodes::RequestId> cancelled;
    int polls = 0;

private:
    hrt::nodes::RequestId next_ = 1;
};

class RecordingSink : public hrt::nodes::EventSink {
public:
    void emit(std::string_view kind, nlohmann::json payload) override {
        events.emplace_back(std::string(kind), std::move(payload));
    }
    [[nodiscard]] std::vector<nlohmann::json> of(const std::string& kind) const {
        std::vector<nlohmann::json> out;
        for (const auto& [k, p] : events) {
            if (k == kind) {
                out.push_back(p);
            }
        }
        return out;
    }

    std::vector<std::pair<std::string, nlohmann::json>> events;
};

}  // namespace support
