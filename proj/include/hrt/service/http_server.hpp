#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "hrt/service/job_document.hpp"
#include "hrt/service/run_manager.hpp"

namespace httplib {
class Server;
}

namespace hrt::service {

/// JSON-over-HTTP front end of a RunManager.
///
///   POST /runs                      start a run: {job?, mode?, variant?, seed?, ...}
///   GET  /runs                      run ids
///   GET  /runs/{id}/state           snapshot
///   GET  /runs/{id}/log             event log, one `seq,timestamp,kind,payload` line per event
///   GET  /runs/{id}/events          event stream (text/event-stream), `?since=seq`
///   GET  /workers/{id}/pending      pending request or null, `?run=id`
///   GET  /workers/{id}/stream       pending-request notifications (text/event-stream)
///   POST /workers/{id}/decision     {request, decision: accept|reject}
///   POST /workers/{id}/completion   {request}
///   POST /workers/{id}/position     {position: [x, y, z]}
///
/// Errors carry {"error": {"code", "message"}}; stale or unknown request ids
/// answer 409 with code "stale_request".
class HttpService {
public:
    HttpService(RunManager& runs, std::optional<JobDocument> default_job);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until `stop`; blocks.
    bool listen();
    /// Serves on a background thread.
    void start();
    void stop();

    [[nodiscard]] int port() const { return port_; }

private:
    struct Notifier {
        std::mutex mutex;
        std::condition_variable cv;
        std::uint64_t version = 0;
    };

    void routes();

    RunManager& runs_;
    std::optional<JobDocument> default_job_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = -1;

    std::shared_ptr<Notifier> notifier_ = std::make_shared<Notifier>();
    std::atomic<bool> stopping_{false};
};

}  // namespace hrt::service
