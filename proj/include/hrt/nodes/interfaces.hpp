#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hrt/bt/status.hpp"
#include "hrt/plan/job_plan.hpp"

namespace hrt::nodes {

using RequestId = std::uint64_t;

enum class ResponseKind { Pending, Accepted, Rejected, Completed };

std::string_view to_string(ResponseKind kind);

struct GatewayResponse {
    ResponseKind kind = ResponseKind::Pending;
    double time = 0.0;  // when the answer was given (run clock)
};

struct NegotiationRequest {
    std::string worker;
    std::string action;
    std::string candidate;
    bool collaborative = false;
    std::string label;
    std::string instruction_kind;
    std::string instruction;
    double nominal_duration = 0.0;
};

/// Channel to the human workers. Requests are answered asynchronously;
/// nodes poll once per tick and never block.
class NegotiationGateway {
public:
    virtual ~NegotiationGateway() = default;
    virtual RequestId send_request(const NegotiationRequest& request) = 0;
    virtual RequestId send_completion_query(const std::string& worker, const std::string& action) = 0;
    virtual GatewayResponse poll_response(RequestId request) = 0;
    /// Withdraws a request that no longer needs an answer.
    virtual void cancel(RequestId request) = 0;
};

struct Primitive {
    plan::PrimitiveKind kind = plan::PrimitiveKind::Wait;
    double duration = 0.0;
    std::string detail;       // e.g. "close"/"open" for GRASP, controller name
    bool until_ack = false;   // WAIT that ends when the human acknowledges
};

using Ticket = std::uint64_t;

struct PrimitiveState {
    bt::NodeStatus status = bt::NodeStatus::Running;
    double finish_time = 0.0;
};

/// Executes robot primitives. `start_time` may lie in the past so that
/// consecutive primitives chain without tick quantisation.
class ExecutionBackend {
public:
    virtual ~ExecutionBackend() = default;
    virtual Ticket start(const std::string& robot, const std::string& action, std::size_t index,
                         const Primitive& primitive, double start_time) = 0;
    virtual PrimitiveState poll(Ticket ticket) = 0;
};

class Clock {
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual double now() const = 0;
};

class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void emit(std::string_view kind, nlohmann::json payload) = 0;
};

}  // namespace hrt::nodes
