#include "hrt/sim/sim_workers.hpp"

#include <stdexcept>

namespace hrt::sim {

using nodes::GatewayResponse;
using nodes::RequestId;
using nodes::ResponseKind;

SimGateway::SimGateway(const nodes::Clock& clock, std::uint64_t seed) : clock_(clock), rng_(seed) {}

const HumanPolicy& SimGateway::policy(const std::string& worker) const {
    auto it = policies_.find(worker);
    return it == policies_.end() ? default_policy_ : it->second;
}

RequestId SimGateway::send_request(const nodes::NegotiationRequest& request) {
    const auto& p = policy(request.worker);
    const int offer = offers_[{request.worker, request.action}]++;
    bool reject = false;
    auto scripted = p.reject_first.find(request.action);
    if (scripted != p.reject_first.end() && offer < scripted->second) {
        reject = true;
    } else if (p.reject_probability > 0.0) {
        reject = std::bernoulli_distribution(p.reject_probability)(rng_);
    }
    const double answer = clock_.now() + p.reaction_delay;
    if (!reject) {
        finish_[{request.worker, request.action}] = answer + request.nominal_duration;
    }
    const RequestId id = next_id_++;
    requests_[id] = Pending{reject ? ResponseKind::Rejected : ResponseKind::Accepted, answer, false};
    ++sent_;
    return id;
}

RequestId SimGateway::send_completion_query(const std::string& worker, const std::string& action) {
    auto it = finish_.find({worker, action});
    const double ready = it == finish_.end() ? clock_.now() : it->second;
    const RequestId id = next_id_++;
    requests_[id] = Pending{ResponseKind::Completed, ready, false};
    return id;
}

GatewayResponse SimGateway::poll_response(RequestId request) {
    auto it = requests_.find(request);
    if (it == requests_.end() || it->second.cancelled || clock_.now() < it->second.ready) {
        return {ResponseKind::Pending, 0.0};
    }
    return {it->second.kind, it->second.ready};
}

void SimGateway::cancel(RequestId request) {
    auto it = requests_.find(request);
    if (it != requests_.end()) {
        it->second.cancelled = true;
    }
}

nodes::Ticket SimBackend::start(const std::string& robot, const std::string& action, std::size_t index,
                                const nodes::Primitive& primitive, double start_time) {
    if (primitive.duration < 0.0) {
        throw std::invalid_argument("primitive duration must be >= 0");
    }
    const nodes::Ticket ticket = jobs_.size() + 1;
    jobs_[ticket] = Job{start_time + primitive.duration, faults_.count({robot, action, index}) > 0};
    return ticket;
}

nodes::PrimitiveState SimBackend::poll(nodes::Ticket ticket) {
    const Job& job = jobs_.at(ticket);
    if (job.fault) {
        return {bt::NodeStatus::Failure, clock_.now()};
    }
    if (clock_.now() < job.finish) {
        return {bt::NodeStatus::Running, 0.0};
    }
    return {bt::NodeStatus::Success, job.finish};
}

}  // namespace hrt::sim
