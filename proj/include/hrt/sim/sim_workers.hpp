#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>

#include "hrt/nodes/interfaces.hpp"

namespace hrt::sim {

/// How a simulated human answers action requests. Scripted rejections are
/// consumed first; afterwards each request is rejected with
/// `reject_probability`.
struct HumanPolicy {
    std::map<std::string, int> reject_first;  // action -> number of offers to reject
    double reject_probability = 0.0;
    double reaction_delay = 0.0;  // seconds between request and answer

    static HumanPolicy always_accept() { return {}; }
    static HumanPolicy scripted(std::map<std::string, int> rejections) { return {std::move(rejections), 0.0, 0.0}; }
    static HumanPolicy probabilistic(double p) { return {{}, p, 0.0}; }
};

/// Simulated humans: answer requests per policy and report completion once
/// the nominal duration has elapsed after acceptance.
class SimGateway : public nodes::NegotiationGateway {
public:
    SimGateway(const nodes::Clock& clock, std::uint64_t seed);

    void set_default_policy(HumanPolicy policy) { default_policy_ = std::move(policy); }
    void set_policy(const std::string& worker, HumanPolicy policy) { policies_[worker] = std::move(policy); }

    nodes::RequestId send_request(const nodes::NegotiationRequest& request) override;
    nodes::RequestId send_completion_query(const std::string& worker, const std::string& action) override;
    nodes::GatewayResponse poll_response(nodes::RequestId request) override;
    void cancel(nodes::RequestId request) override;

    [[nodiscard]] std::size_t requests_sent() const { return sent_; }

private:
    struct Pending {
        nodes::ResponseKind kind = nodes::ResponseKind::Pending;
        double ready = 0.0;
        bool cancelled = false;
    };

    const HumanPolicy& policy(const std::string& worker) const;

    const nodes::Clock& clock_;
    std::mt19937_64 rng_;
    HumanPolicy default_policy_;
    std::map<std::string, HumanPolicy> policies_;
    std::map<nodes::RequestId, Pending> requests_;
    std::map<std::pair<std::string, std::string>, double> finish_;
    std::map<std::pair<std::string, std::string>, int> offers_;
    nodes::RequestId next_id_ = 1;
    std::size_t sent_ = 0;
};

/// Robot primitives that take exactly their nominal duration. Faults can be
/// injected per (robot, action, primitive index).
class SimBackend : public nodes::ExecutionBackend {
public:
    explicit SimBackend(const nodes::Clock& clock) : clock_(clock) {}

    void inject_fault(const std::string& robot, const std::string& action, std::size_t index) {
        faults_.emplace(robot, action, index);
    }

    nodes::Ticket start(const std::string& robot, const std::string& action, std::size_t index,
                        const nodes::Primitive& primitive, double start_time) override;
    nodes::PrimitiveState poll(nodes::Ticket ticket) override;

    [[nodiscard]] std::size_t primitives_started() const { return jobs_.size(); }

private:
    struct Job {
        double finish = 0.0;
        bool fault = false;
    };

    const nodes::Clock& clock_;
    std::set<std::tuple<std::string, std::string, std::size_t>> faults_;
    std::map<nodes::Ticket, Job> jobs_;
};

}  // namespace hrt::sim
