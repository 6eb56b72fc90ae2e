#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hrt/nodes/interfaces.hpp"

namespace hrt::service {

enum class RequestKind { Action, Completion };

std::string_view to_string(RequestKind kind);

/// What a worker currently has to answer.
struct PendingRequest {
    nodes::RequestId id = 0;
    RequestKind kind = RequestKind::Action;
    std::string action;
    std::string candidate;
    std::string label;
    bool collaborative = false;
    std::string instruction_kind;
    std::string instruction;
    double nominal_duration = 0.0;
    double sent_at = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

enum class Decision { Accept, Reject, Complete };

std::optional<Decision> parse_decision(std::string_view text);

/// Outcome of a decision or completion post.
enum class PostResult {
    Queued,          // accepted for the next tick
    Duplicate,       // same answer already given: no effect
    UnknownWorker,   // worker has no session
    StaleRequest,    // id is not the worker's pending request
    WrongKind,       // decision on a completion query or vice versa
    Conflict,        // a different answer was already given
};

std::string_view to_string(PostResult result);

/// Negotiation channel for humans answering through the service. Workers
/// without a session are forwarded to `fallback` (e.g. simulated humans)
/// under the same id space. The tick thread calls the gateway interface and
/// `drain`; API handlers call `pending` and `post`, which only validate and
/// queue. All members are safe to call concurrently.
class SessionGateway : public nodes::NegotiationGateway {
public:
    SessionGateway(const nodes::Clock& clock, std::vector<std::string> workers,
                   nodes::NegotiationGateway* fallback = nullptr);

    nodes::RequestId send_request(const nodes::NegotiationRequest& request) override;
    nodes::RequestId send_completion_query(const std::string& worker, const std::string& action) override;
    nodes::GatewayResponse poll_response(nodes::RequestId request) override;
    void cancel(nodes::RequestId request) override;

    [[nodiscard]] bool has_worker(const std::string& worker) const;
    [[nodiscard]] std::optional<PendingRequest> pending(const std::string& worker) const;
    PostResult post(const std::string& worker, nodes::RequestId request, Decision decision);

    /// Applies queued answers, stamped with the current clock. Tick thread only.
    void drain();

    /// Pending requests older than `timeout` seconds that were not reported
    /// before. Each request is reported at most once.
    std::vector<std::pair<std::string, PendingRequest>> overdue(double timeout);

    /// Called with the worker id whenever its pending request changes.
    void on_change(std::function<void(const std::string&)> listener);

    /// Requests by terminal state, for the session-safety checks.
    [[nodiscard]] std::map<nodes::RequestId, nodes::ResponseKind> outcomes() const;
    [[nodiscard]] std::set<nodes::RequestId> cancelled() const;

private:
    struct Session {
        std::optional<PendingRequest> pending;
    };
    struct Answer {
        std::string worker;
        nodes::RequestId request = 0;
        Decision decision = Decision::Accept;
    };

    nodes::RequestId open(const std::string& worker, PendingRequest request);
    void notify(const std::string& worker);

    nodes::NegotiationGateway& forward(const std::string& worker);

    const nodes::Clock& clock_;
    nodes::NegotiationGateway* fallback_;
    std::map<nodes::RequestId, nodes::RequestId> forwarded_;
    mutable std::mutex mutex_;
    std::map<std::string, Session> sessions_;
    std::map<std::string, PendingRequest> accepted_;  // last accepted action request per worker
    std::map<nodes::RequestId, std::string> owner_;
    std::map<nodes::RequestId, nodes::GatewayResponse> responses_;
    std::map<nodes::RequestId, Decision> answered_;
    std::set<nodes::RequestId> cancelled_;
    std::set<nodes::RequestId> alerted_;
    std::vector<Answer> inbox_;
    std::vector<std::function<void(const std::string&)>> listeners_;
    nodes::RequestId next_id_ = 1;
};

}  // namespace hrt::service
