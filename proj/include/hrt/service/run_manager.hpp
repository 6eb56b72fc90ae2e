#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "hrt/service/job_document.hpp"
#include "hrt/service/sessions.hpp"
#include "hrt/sim/clock.hpp"
#include "hrt/sim/engine.hpp"

namespace hrt::service {

/// simulated: virtual time, simulated humans. live: wall-clock time, every
/// human answers through a session. mixed: wall-clock time, only humans
/// flagged as console workers use sessions, the others are simulated.
/// Robots always run on the simulated backend.
enum class RunMode { Simulated, Live, Mixed };

std::string_view to_string(RunMode mode);
std::optional<RunMode> parse_mode(std::string_view name);

struct RunConfig {
    RunMode mode = RunMode::Simulated;
    std::optional<nodes::Variant> variant;  // default: the job's, else collab-mt
    double frequency = 100.0;
    std::uint64_t seed = 1;
    sim::HumanPolicy default_policy;
    std::map<std::string, sim::HumanPolicy> policies;
    double soft_timeout = 120.0;  // seconds a request may stay unanswered before an alert; <= 0 disables
    double max_time = 86400.0;    // run clock seconds
    std::filesystem::path log_dir;  // when set, the event log is written there on exit
};

/// One run with its own tick thread. The thread is the only mutator of the
/// engine; API calls queue their input and read published snapshots.
class Run {
public:
    Run(std::string id, JobDocument job, RunConfig config);
    ~Run();

    Run(const Run&) = delete;
    Run& operator=(const Run&) = delete;

    void start();
    /// Aborts a running run and joins its thread.
    void stop();
    /// Blocks until the run ends or `timeout` elapses; true if it ended.
    bool wait(std::chrono::milliseconds timeout);

    [[nodiscard]] const std::string& id() const { return id_; }
    [[nodiscard]] RunMode mode() const { return config_.mode; }
    [[nodiscard]] const JobDocument& job() const { return job_; }
    [[nodiscard]] bool finished() const { return finished_; }

    /// Latest published snapshot (immutable copy).
    [[nodiscard]] nlohmann::json state() const;
    [[nodiscard]] std::vector<sim::Event> events() const { return log_->events(); }
    [[nodiscard]] std::vector<sim::Event> events_since(std::uint64_t seq) const { return log_->since(seq); }
    [[nodiscard]] std::string log_text() const;

    [[nodiscard]] bool has_worker(const std::string& worker) const;
    [[nodiscard]] bool has_session(const std::string& worker) const;
    [[nodiscard]] std::optional<PendingRequest> pending(const std::string& worker) const;
    PostResult post(const std::string& worker, nodes::RequestId request, Decision decision);
    /// False when the worker is not part of the job.
    bool post_position(const std::string& worker, const cost::Vec3& position);

    SessionGateway& sessions() { return *sessions_; }
    /// Called with (run id, worker id) when a worker's pending request changes.
    void on_pending_change(std::function<void(const std::string&, const std::string&)> listener);

private:
    void loop();
    void apply_inputs();
    void publish();
    [[nodiscard]] nlohmann::json snapshot();

    std::string id_;
    JobDocument job_;
    RunConfig config_;
    std::unique_ptr<sim::VirtualClock> virtual_clock_;
    std::unique_ptr<sim::SteadyClock> steady_clock_;
    const nodes::Clock* clock_ = nullptr;
    std::unique_ptr<sim::SimGateway> simulated_;
    std::unique_ptr<SessionGateway> sessions_;
    std::unique_ptr<sim::SimBackend> backend_;
    std::unique_ptr<sim::EventLog> log_;
    std::unique_ptr<sim::RunEngine> engine_;
    std::map<std::string, int> negotiating_;  // action -> unanswered requests
    std::vector<std::function<void(const std::string&, const std::string&)>> listeners_;

    mutable std::mutex inputs_mutex_;
    std::vector<std::pair<std::string, cost::Vec3>> positions_;

    mutable std::mutex state_mutex_;
    std::condition_variable finished_cv_;
    std::shared_ptr<const nlohmann::json> state_;
    std::size_t published_events_ = static_cast<std::size_t>(-1);

    std::atomic<bool> stop_{false};
    std::atomic<bool> finished_{false};
    std::thread thread_;
};

/// Owns the runs of a service instance.
class RunManager {
public:
    explicit RunManager(RunConfig defaults = {}) : defaults_(std::move(defaults)) {}
    ~RunManager();

    /// Creates and starts a run; returns its id.
    std::string start(JobDocument job, RunConfig config);
    std::string start(JobDocument job) { return start(std::move(job), defaults_); }

    [[nodiscard]] std::shared_ptr<Run> find(const std::string& id) const;
    [[nodiscard]] std::vector<std::string> ids() const;

    /// The most recent unfinished run in which `worker` answers through a
    /// session, else the most recent run containing the worker.
    [[nodiscard]] std::shared_ptr<Run> run_for_worker(const std::string& worker) const;

    void stop_all();

    [[nodiscard]] const RunConfig& defaults() const { return defaults_; }

    /// Called with (run id, worker id) when a worker's pending request changes.
    void on_pending_change(std::function<void(const std::string&, const std::string&)> listener);

private:
    RunConfig defaults_;
    mutable std::mutex mutex_;
    std::vector<std::shared_ptr<Run>> runs_;
    std::vector<std::function<void(const std::string&, const std::string&)>> listeners_;
    std::uint64_t next_id_ = 1;
};

}  // namespace hrt::service
