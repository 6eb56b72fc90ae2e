#include "hrt/service/sessions.hpp"

#include <stdexcept>

namespace hrt::service {

using nlohmann::json;

std::string_view to_string(RequestKind kind) { return kind == RequestKind::Action ? "action" : "completion"; }

json PendingRequest::to_json() const {
    return json{{"request", id},
                {"kind", to_string(kind)},
                {"action", action},
                {"candidate", candidate},
                {"label", label},
                {"collaborative", collaborative},
                {"instruction", {{"kind", instruction_kind}, {"text", instruction}}},
                {"duration", nominal_duration},
                {"sent_at", sent_at}};
}

std::optional<Decision> parse_decision(std::string_view text) {
    if (text == "accept") {
        return Decision::Accept;
    }
    if (text == "reject") {
        return Decision::Reject;
    }
    if (text == "complete") {
        return Decision::Complete;
    }
    return std::nullopt;
}

std::string_view to_string(PostResult result) {
    switch (result) {
        case PostResult::Queued: return "queued";
        case PostResult::Duplicate: return "duplicate";
        case PostResult::UnknownWorker: return "unknown_worker";
        case PostResult::StaleRequest: return "stale_request";
        case PostResult::WrongKind: return "wrong_kind";
        case PostResult::Conflict: return "conflicting_decision";
    }
    return "unknown";
}

SessionGateway::SessionGateway(const nodes::Clock& clock, std::vector<std::string> workers,
                               nodes::NegotiationGateway* fallback)
    : clock_(clock), fallback_(fallback) {
    for (auto& w : workers) {
        sessions_[std::move(w)];
    }
}

nodes::NegotiationGateway& SessionGateway::forward(const std::string& worker) {
    if (fallback_ == nullptr) {
        throw std::logic_error("no negotiation channel for worker '" + worker + "'");
    }
    return *fallback_;
}

nodes::RequestId SessionGateway::open(const std::string& worker, PendingRequest request) {
    nodes::RequestId id = 0;
    {
        std::lock_guard lock(mutex_);
        auto& session = sessions_.at(worker);
        if (session.pending) {
            throw std::logic_error("worker '" + worker + "' already has pending request " +
                                   std::to_string(session.pending->id));
        }
        id = next_id_++;
        request.id = id;
        request.sent_at = clock_.now();
        owner_[request.id] = worker;
        session.pending = std::move(request);
    }
    notify(worker);
    return id;
}

nodes::RequestId SessionGateway::send_request(const nodes::NegotiationRequest& request) {
    if (!has_worker(request.worker)) {
        const auto inner = forward(request.worker).send_request(request);
        std::lock_guard lock(mutex_);
        forwarded_[next_id_] = inner;
        return next_id_++;
    }
    PendingRequest p;
    p.kind = RequestKind::Action;
    p.action = request.action;
    p.candidate = request.candidate;
    p.label = request.label;
    p.collaborative = request.collaborative;
    p.instruction_kind = request.instruction_kind;
    p.instruction = request.instruction;
    p.nominal_duration = request.nominal_duration;
    return open(request.worker, std::move(p));
}

nodes::RequestId SessionGateway::send_completion_query(const std::string& worker, const std::string& action) {
    if (!has_worker(worker)) {
        const auto inner = forward(worker).send_completion_query(worker, action);
        std::lock_guard lock(mutex_);
        forwarded_[next_id_] = inner;
        return next_id_++;
    }
    PendingRequest p;
    {
        std::lock_guard lock(mutex_);
        if (auto it = accepted_.find(worker); it != accepted_.end() && it->second.action == action) {
            p = it->second;
        }
    }
    p.kind = RequestKind::Completion;
    p.action = action;
    return open(worker, std::move(p));
}

nodes::GatewayResponse SessionGateway::poll_response(nodes::RequestId request) {
    std::unique_lock lock(mutex_);
    if (auto it = forwarded_.find(request); it != forwarded_.end()) {
        const auto inner = it->second;
        lock.unlock();
        return fallback_->poll_response(inner);
    }
    if (auto it = responses_.find(request); it != responses_.end()) {
        return it->second;
    }
    return {};
}

void SessionGateway::cancel(nodes::RequestId request) {
    std::unique_lock lock(mutex_);
    if (auto it = forwarded_.find(request); it != forwarded_.end()) {
        const auto inner = it->second;
        lock.unlock();
        fallback_->cancel(inner);
        return;
    }
    auto owner = owner_.find(request);
    if (owner == owner_.end() || responses_.count(request) || cancelled_.count(request)) {
        return;
    }
    cancelled_.insert(request);
    auto& session = sessions_.at(owner->second);
    const std::string worker = owner->second;
    if (session.pending && session.pending->id == request) {
        session.pending.reset();
        lock.unlock();
        notify(worker);
    }
}

bool SessionGateway::has_worker(const std::string& worker) const {
    std::lock_guard lock(mutex_);
    return sessions_.count(worker) > 0;
}

std::optional<PendingRequest> SessionGateway::pending(const std::string& worker) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(worker);
    if (it == sessions_.end()) {
        return std::nullopt;
    }
    return it->second.pending;
}

PostResult SessionGateway::post(const std::string& worker, nodes::RequestId request, Decision decision) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(worker);
    if (it == sessions_.end()) {
        return PostResult::UnknownWorker;
    }
    if (auto prev = answered_.find(request); prev != answered_.end() && owner_.at(request) == worker) {
        return prev->second == decision ? PostResult::Duplicate : PostResult::Conflict;
    }
    const auto& pending = it->second.pending;
    if (!pending || pending->id != request) {
        return PostResult::StaleRequest;
    }
    const bool completion = pending->kind == RequestKind::Completion;
    if (completion != (decision == Decision::Complete)) {
        return PostResult::WrongKind;
    }
    answered_[request] = decision;
    inbox_.push_back({worker, request, decision});
    return PostResult::Queued;
}

void SessionGateway::drain() {
    std::vector<std::string> changed;
    {
        std::lock_guard lock(mutex_);
        const double now = clock_.now();
        for (const auto& a : inbox_) {
            if (cancelled_.count(a.request) || responses_.count(a.request)) {
                continue;
            }
            const auto kind = a.decision == Decision::Accept   ? nodes::ResponseKind::Accepted
                              : a.decision == Decision::Reject ? nodes::ResponseKind::Rejected
                                                               : nodes::ResponseKind::Completed;
            responses_[a.request] = {kind, now};
            auto& session = sessions_.at(a.worker);
            if (kind == nodes::ResponseKind::Accepted && session.pending && session.pending->id == a.request) {
                accepted_[a.worker] = *session.pending;
            }
            if (session.pending && session.pending->id == a.request) {
                session.pending.reset();
                changed.push_back(a.worker);
            }
        }
        inbox_.clear();
    }
    for (const auto& w : changed) {
        notify(w);
    }
}

std::vector<std::pair<std::string, PendingRequest>> SessionGateway::overdue(double timeout) {
    std::lock_guard lock(mutex_);
    std::vector<std::pair<std::string, PendingRequest>> out;
    const double now = clock_.now();
    for (const auto& [worker, session] : sessions_) {
        if (session.pending && now - session.pending->sent_at >= timeout &&
            alerted_.insert(session.pending->id).second) {
            out.emplace_back(worker, *session.pending);
        }
    }
    return out;
}

void SessionGateway::on_change(std::function<void(const std::string&)> listener) {
    std::lock_guard lock(mutex_);
    listeners_.push_back(std::move(listener));
}

void SessionGateway::notify(const std::string& worker) {
    std::vector<std::function<void(const std::string&)>> listeners;
    {
        std::lock_guard lock(mutex_);
        listeners = listeners_;
    }
    for (const auto& l : listeners) {
        l(worker);
    }
}

std::map<nodes::RequestId, nodes::ResponseKind> SessionGateway::outcomes() const {
    std::lock_guard lock(mutex_);
    std::map<nodes::RequestId, nodes::ResponseKind> out;
    for (const auto& [id, r] : responses_) {
        out[id] = r.kind;
    }
    return out;
}

std::set<nodes::RequestId> SessionGateway::cancelled() const {
    std::lock_guard lock(mutex_);
    return cancelled_;
}

}  // namespace hrt::service
