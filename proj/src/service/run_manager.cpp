#include "hrt/service/run_manager.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "hrt/nodes/board.hpp"
#include "hrt/sim/trace.hpp"

namespace hrt::service {

using nlohmann::json;

std::string_view to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Simulated: return "simulated";
        case RunMode::Live: return "live";
        case RunMode::Mixed: return "mixed";
    }
    return "unknown";
}

std::optional<RunMode> parse_mode(std::string_view name) {
    if (name == "simulated") {
        return RunMode::Simulated;
    }
    if (name == "live") {
        return RunMode::Live;
    }
    if (name == "mixed") {
        return RunMode::Mixed;
    }
    return std::nullopt;
}

Run::Run(std::string id, JobDocument job, RunConfig config)
    : id_(std::move(id)), job_(std::move(job)), config_(std::move(config)) {
    if (!(config_.frequency > 0.0)) {
        throw std::invalid_argument("tick frequency must be positive");
    }
    if (config_.mode == RunMode::Simulated) {
        virtual_clock_ = std::make_unique<sim::VirtualClock>(config_.frequency);
        clock_ = virtual_clock_.get();
    } else {
        steady_clock_ = std::make_unique<sim::SteadyClock>();
        clock_ = steady_clock_.get();
    }

    std::vector<std::string> session_workers;
    for (const auto& w : job_.plan.workers) {
        const bool human = w.type == plan::WorkerType::Human;
        if ((config_.mode == RunMode::Live && human) || (config_.mode == RunMode::Mixed && human && w.console)) {
            session_workers.push_back(w.id);
        }
    }
    simulated_ = std::make_unique<sim::SimGateway>(*clock_, config_.seed);
    simulated_->set_default_policy(config_.default_policy);
    for (const auto& [worker, policy] : config_.policies) {
        simulated_->set_policy(worker, policy);
    }
    sessions_ = std::make_unique<SessionGateway>(*clock_, session_workers, simulated_.get());
    sessions_->on_change([this](const std::string& worker) {
        for (const auto& l : listeners_) {
            l(id_, worker);
        }
    });
    backend_ = std::make_unique<sim::SimBackend>(*clock_);
    log_ = std::make_unique<sim::EventLog>(*clock_);
    log_->on_append([this](const sim::Event& e) {
        if (e.kind == "request") {
            ++negotiating_[e.payload.at("action").get<std::string>()];
        } else if (e.kind == "accept") {
            --negotiating_[e.payload.at("action").get<std::string>()];
        } else if (e.kind == "reject") {
            negotiating_.erase(e.payload.at("action").get<std::string>());
        }
    });
    const auto variant = config_.variant.value_or(job_.variant.value_or(nodes::Variant::CollabMT));
    engine_ = std::make_unique<sim::RunEngine>(job_.plan, variant, job_.cost, *sessions_, *backend_, *clock_, *log_,
                                               true);
    log_->emit("run_mode", json{{"run", id_}, {"mode", to_string(config_.mode)}, {"sessions", session_workers}});
    publish();
}

Run::~Run() { stop(); }

void Run::start() {
    if (!thread_.joinable() && !finished_) {
        thread_ = std::thread([this] { loop(); });
    }
}

void Run::stop() {
    stop_ = true;
    if (thread_.joinable()) {
        thread_.join();
    }
}

bool Run::wait(std::chrono::milliseconds timeout) {
    std::unique_lock lock(state_mutex_);
    return finished_cv_.wait_for(lock, timeout, [this] { return finished_.load(); });
}

void Run::on_pending_change(std::function<void(const std::string&, const std::string&)> listener) {
    listeners_.push_back(std::move(listener));
}

void Run::apply_inputs() {
    std::vector<std::pair<std::string, cost::Vec3>> positions;
    {
        std::lock_guard lock(inputs_mutex_);
        positions.swap(positions_);
    }
    auto& distance = engine_->planner().distance();
    for (const auto& [worker, p] : positions) {
        auto& known = job_.plan.worker(worker).type == plan::WorkerType::Human ? distance.human_positions
                                                                                : distance.robot_positions;
        known[worker] = p;
        log_->emit("position", json{{"worker", worker}, {"position", {p.x, p.y, p.z}}});
    }
    sessions_->drain();
    if (config_.soft_timeout > 0.0) {
        for (const auto& [worker, request] : sessions_->overdue(config_.soft_timeout)) {
            log_->emit("alert", json{{"worker", worker},
                                     {"request", request.id},
                                     {"action", request.action},
                                     {"kind", to_string(request.kind)},
                                     {"waiting", clock_->now() - request.sent_at}});
        }
    }
}

void Run::loop() {
    using steady = std::chrono::steady_clock;
    const auto period =
        std::chrono::duration_cast<steady::duration>(std::chrono::duration<double>(1.0 / config_.frequency));
    auto next = steady::now();
    while (true) {
        apply_inputs();
        const auto status = engine_->tick();
        if (status == sim::RunStatus::Running) {
            if (stop_) {
                engine_->abort("stopped");
            } else if (clock_->now() > config_.max_time) {
                engine_->abort("time limit of " + std::to_string(config_.max_time) + " s reached");
            }
        }
        publish();
        if (engine_->status() != sim::RunStatus::Running) {
            break;
        }
        if (virtual_clock_) {
            virtual_clock_->advance();
        } else {
            next += period;
            std::this_thread::sleep_until(next);
        }
    }
    if (!config_.log_dir.empty()) {
        std::filesystem::create_directories(config_.log_dir);
        std::ofstream out(config_.log_dir / (id_ + ".log"));
        log_->write(out);
    }
    {
        std::lock_guard lock(state_mutex_);
        finished_ = true;
    }
    finished_cv_.notify_all();
}

void Run::publish() {
    const std::size_t n = log_->size();
    const bool live = !virtual_clock_;
    if (n == published_events_ && !live) {
        return;
    }
    auto snap = std::make_shared<const json>(snapshot());
    published_events_ = n;
    std::lock_guard lock(state_mutex_);
    state_ = std::move(snap);
}

json Run::snapshot() {
    nodes::AllocationBoard board(engine_->board());
    const auto events = log_->events();
    const auto replayed = sim::replay(events);

    json actions = json::array();
    for (const auto& a : job_.plan.actions) {
        json entry{{"id", a.id}, {"label", a.label}, {"collaborative", a.collaborative}};
        const auto candidate = board.candidate_of(a.id);
        std::string status = "pending";
        if (board.completed().count(a.id)) {
            status = "completed";
        } else if (board.locked().count(a.id)) {
            auto it = negotiating_.find(a.id);
            status = it != negotiating_.end() && it->second > 0 ? "negotiating" : "running";
        } else if (candidate) {
            status = "allocated";
        }
        entry["status"] = status;
        entry["candidate"] = candidate ? json(*candidate) : json(nullptr);
        for (auto it = replayed.trace.entries.rbegin(); it != replayed.trace.entries.rend(); ++it) {
            if (it->action == a.id && it->outcome == sim::Outcome::Completed) {
                entry["candidate"] = it->candidate;
                break;
            }
        }
        actions.push_back(entry);
    }

    json workers = json::array();
    const auto& agents = board.agents();
    for (const auto& w : job_.plan.workers) {
        json entry{{"id", w.id},
                   {"type", plan::to_string(w.type)},
                   {"session", sessions_->has_worker(w.id)},
                   {"available", true},
                   {"busy_action", nullptr}};
        if (auto it = agents.find(w.id); it != agents.end() && it->second.busy_action) {
            entry["available"] = false;
            entry["busy_action"] = *it->second.busy_action;
        }
        const auto pending = sessions_->pending(w.id);
        entry["pending"] = pending ? pending->to_json() : json(nullptr);
        workers.push_back(entry);
    }

    json gantt = json::array();
    for (const auto& e : replayed.trace.entries) {
        gantt.push_back({{"worker", e.candidate},
                         {"action", e.action},
                         {"start", e.start},
                         {"end", e.end},
                         {"outcome", sim::to_string(e.outcome)}});
    }
    for (const auto& action : board.locked()) {
        auto start = board.start_times().find(action);
        const auto candidate = board.candidate_of(action);
        auto negotiating = negotiating_.find(action);
        if (negotiating != negotiating_.end() && negotiating->second > 0) {
            continue;
        }
        if (start != board.start_times().end() && candidate) {
            gantt.push_back({{"worker", *candidate},
                             {"action", action},
                             {"start", start->second},
                             {"end", nullptr},
                             {"outcome", "running"}});
        }
    }

    const auto status = engine_->status();
    json out{{"run", id_},
             {"job", job_.plan.name},
             {"mode", to_string(config_.mode)},
             {"variant", nodes::to_string(engine_->planner().variant())},
             {"status", sim::to_string(status)},
             {"time", clock_->now()},
             {"seq", events.empty() ? 0 : events.back().seq},
             {"actions", actions},
             {"workers", workers},
             {"allocation", board.current_allocation()},
             {"gantt", gantt},
             {"solves", engine_->stats().solves},
             {"makespan", nullptr}};
    if (status == sim::RunStatus::Completed) {
        out["makespan"] = sim::makespan(replayed.trace);
    }
    if (!engine_->failure().empty()) {
        out["reason"] = engine_->failure();
    }
    return out;
}

json Run::state() const {
    std::lock_guard lock(state_mutex_);
    return *state_;
}

std::string Run::log_text() const {
    std::ostringstream out;
    log_->write(out);
    return out.str();
}

bool Run::has_worker(const std::string& worker) const { return job_.plan.worker_index(worker).has_value(); }

bool Run::has_session(const std::string& worker) const { return sessions_->has_worker(worker); }

std::optional<PendingRequest> Run::pending(const std::string& worker) const { return sessions_->pending(worker); }

PostResult Run::post(const std::string& worker, nodes::RequestId request, Decision decision) {
    return sessions_->post(worker, request, decision);
}

bool Run::post_position(const std::string& worker, const cost::Vec3& position) {
    if (!has_worker(worker)) {
        return false;
    }
    std::lock_guard lock(inputs_mutex_);
    positions_.emplace_back(worker, position);
    return true;
}

RunManager::~RunManager() { stop_all(); }

std::string RunManager::start(JobDocument job, RunConfig config) {
    std::shared_ptr<Run> run;
    {
        std::lock_guard lock(mutex_);
        run = std::make_shared<Run>("run-" + std::to_string(next_id_++), std::move(job), std::move(config));
        for (const auto& l : listeners_) {
            run->on_pending_change(l);
        }
        runs_.push_back(run);
    }
    run->start();
    return run->id();
}

std::shared_ptr<Run> RunManager::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    for (const auto& r : runs_) {
        if (r->id() == id) {
            return r;
        }
    }
    return nullptr;
}

std::vector<std::string> RunManager::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& r : runs_) {
        out.push_back(r->id());
    }
    return out;
}

std::shared_ptr<Run> RunManager::run_for_worker(const std::string& worker) const {
    std::lock_guard lock(mutex_);
    for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) {
        if ((*it)->has_session(worker) && !(*it)->finished()) {
            return *it;
        }
    }
    for (auto it = runs_.rbegin(); it != runs_.rend(); ++it) {
        if ((*it)->has_worker(worker)) {
            return *it;
        }
    }
    return nullptr;
}

void RunManager::stop_all() {
    std::vector<std::shared_ptr<Run>> runs;
    {
        std::lock_guard lock(mutex_);
        runs = runs_;
    }
    for (const auto& r : runs) {
        r->stop();
    }
}

void RunManager::on_pending_change(std::function<void(const std::string&, const std::string&)> listener) {
    std::lock_guard lock(mutex_);
    listeners_.push_back(std::move(listener));
}

}  // namespace hrt::service
