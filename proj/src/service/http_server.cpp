#include "hrt/service/http_server.hpp"

#include <algorithm>
#include <chrono>

#include "httplib.h"
#include "json.hpp"

namespace hrt::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                json details = nullptr) {
    json error{{"code", code}, {"message", message}};
    if (!details.is_null()) {
        error["details"] = std::move(details);
    }
    send_json(res, status, json{{"error", error}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) {
        return json::object();
    }
    try {
        auto body = json::parse(req.body);
        if (!body.is_object()) {
            send_error(res, 400, "bad_request", "body must be a JSON object");
            return std::nullopt;
        }
        return body;
    } catch (const json::parse_error& ex) {
        send_error(res, 400, "bad_request", std::string("malformed JSON: ") + ex.what());
        return std::nullopt;
    }
}

int status_for(PostResult result) {
    switch (result) {
        case PostResult::Queued: return 202;
        case PostResult::Duplicate: return 200;
        case PostResult::UnknownWorker: return 404;
        default: return 409;
    }
}

std::string sse_frame(const std::string& event, const json& data, std::optional<std::uint64_t> id = std::nullopt) {
    std::string out;
    if (id) {
        out += "id: " + std::to_string(*id) + "\n";
    }
    out += "event: " + event + "\ndata: " + data.dump() + "\n\n";
    return out;
}

RunConfig parse_run_config(const json& body, RunConfig config) {
    for (const auto& [key, value] : body.items()) {
        if (key == "job") {
            continue;
        }
        if (key == "mode") {
            auto mode = value.is_string() ? parse_mode(value.get<std::string>()) : std::nullopt;
            if (!mode) {
                throw std::invalid_argument("mode: expected 'simulated', 'live' or 'mixed'");
            }
            config.mode = *mode;
        } else if (key == "variant") {
            auto variant = value.is_string() ? nodes::parse_variant(value.get<std::string>()) : std::nullopt;
            if (!variant) {
                throw std::invalid_argument("variant: expected 'collab-mt', 'coop-mt' or 'coop-st'");
            }
            config.variant = *variant;
        } else if (key == "seed") {
            if (!value.is_number_unsigned()) {
                throw std::invalid_argument("seed: expected a non-negative integer");
            }
            config.seed = value.get<std::uint64_t>();
        } else if (key == "frequency" || key == "soft_timeout" || key == "max_time") {
            if (!value.is_number()) {
                throw std::invalid_argument(key + ": expected a number");
            }
            const double v = value.get<double>();
            if (key == "frequency") {
                if (!(v > 0.0)) {
                    throw std::invalid_argument("frequency: must be > 0");
                }
                config.frequency = v;
            } else if (key == "soft_timeout") {
                config.soft_timeout = v;
            } else {
                config.max_time = v;
            }
        } else if (key == "reject_probability") {
            if (!value.is_number() || value.get<double>() < 0.0 || value.get<double>() > 1.0) {
                throw std::invalid_argument("reject_probability: expected a number in [0, 1]");
            }
            config.default_policy.reject_probability = value.get<double>();
        } else if (key == "reject") {
            // {"worker": {"action": count}}
            if (!value.is_object()) {
                throw std::invalid_argument("reject: expected {worker: {action: count}}");
            }
            for (const auto& [worker, actions] : value.items()) {
                if (!actions.is_object()) {
                    throw std::invalid_argument("reject." + worker + ": expected {action: count}");
                }
                auto policy = config.default_policy;
                for (const auto& [action, count] : actions.items()) {
                    if (!count.is_number_integer() || count.get<int>() < 0) {
                        throw std::invalid_argument("reject." + worker + "." + action + ": expected a count");
                    }
                    policy.reject_first[action] = count.get<int>();
                }
                config.policies[worker] = policy;
            }
        } else {
            throw std::invalid_argument(key + ": unknown field");
        }
    }
    return config;
}

}  // namespace

HttpService::HttpService(RunManager& runs, std::optional<JobDocument> default_job)
    : runs_(runs), default_job_(std::move(default_job)), server_(std::make_unique<httplib::Server>()) {
    runs_.on_pending_change([notifier = notifier_](const std::string&, const std::string&) {
        {
            std::lock_guard lock(notifier->mutex);
            ++notifier->version;
        }
        notifier->cv.notify_all();
    });
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Headers", "Content-Type"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    return port_;
}

bool HttpService::listen() { return server_->listen_after_bind(); }

void HttpService::start() {
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpService::stop() {
    stopping_ = true;
    notifier_->cv.notify_all();
    server_->stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

void HttpService::routes() {
    auto& s = *server_;

    s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });

    s.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req, res);
        if (!body) {
            return;
        }
        std::optional<JobDocument> job = default_job_;
        try {
            if (body->contains("job")) {
                job = parse_job(body->at("job"));
            }
        } catch (const plan::JobError& ex) {
            send_error(res, 422, "invalid_job", ex.what(), ex.problems());
            return;
        }
        if (!job) {
            send_error(res, 400, "missing_job", "no job in the request and no default job configured");
            return;
        }
        try {
            auto config = parse_run_config(*body, runs_.defaults());
            const auto id = runs_.start(std::move(*job), std::move(config));
            send_json(res, 201, json{{"run", id}, {"state", runs_.find(id)->state()}});
        } catch (const std::invalid_argument& ex) {
            send_error(res, 400, "bad_request", ex.what());
        }
    });

    s.Get("/runs", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"runs", runs_.ids()}});
    });

    s.Get(R"(/runs/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        auto run = runs_.find(req.matches[1]);
        if (!run) {
            send_error(res, 404, "unknown_run", "no run '" + std::string(req.matches[1]) + "'");
            return;
        }
        send_json(res, 200, run->state());
    });

    s.Get(R"(/runs/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
        auto run = runs_.find(req.matches[1]);
        if (!run) {
            send_error(res, 404, "unknown_run", "no run '" + std::string(req.matches[1]) + "'");
            return;
        }
        res.set_content(run->log_text(), "text/plain");
    });

    s.Get(R"(/runs/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        auto run = runs_.find(req.matches[1]);
        if (!run) {
            send_error(res, 404, "unknown_run", "no run '" + std::string(req.matches[1]) + "'");
            return;
        }
        std::uint64_t since = 0;
        if (req.has_param("since")) {
            try {
                since = std::stoull(req.get_param_value("since"));
            } catch (const std::exception&) {
                send_error(res, 400, "bad_request", "since: expected a sequence number");
                return;
            }
        }
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, run, next = since](std::size_t, httplib::DataSink& sink) mutable {
                while (!stopping_) {
                    const bool finished = run->finished();
                    const auto events = run->events_since(next);
                    for (const auto& e : events) {
                        const auto frame = sse_frame(
                            e.kind, json{{"seq", e.seq}, {"time", e.time}, {"kind", e.kind}, {"payload", e.payload}},
                            e.seq);
                        if (!sink.write(frame.data(), frame.size())) {
                            return false;
                        }
                        next = e.seq;
                    }
                    if (finished && events.empty()) {
                        sink.done();
                        return true;
                    }
                    if (events.empty()) {
                        run->wait(std::chrono::milliseconds(50));
                    }
                }
                return false;
            });
    });

    auto worker_run = [this](const httplib::Request& req, httplib::Response& res,
                             const std::string& worker) -> std::shared_ptr<Run> {
        std::shared_ptr<Run> run;
        if (req.has_param("run")) {
            run = runs_.find(req.get_param_value("run"));
            if (!run) {
                send_error(res, 404, "unknown_run", "no run '" + req.get_param_value("run") + "'");
                return nullptr;
            }
        } else {
            run = runs_.run_for_worker(worker);
        }
        if (!run || !run->has_worker(worker)) {
            send_error(res, 404, "unknown_worker", "no run has worker '" + worker + "'");
            return nullptr;
        }
        return run;
    };

    auto pending_json = [](const Run& run, const std::string& worker) {
        const auto pending = run.pending(worker);
        return json{{"worker", worker},
                    {"run", run.id()},
                    {"session", run.has_session(worker)},
                    {"request", pending ? pending->to_json() : json(nullptr)}};
    };

    s.Get(R"(/workers/([^/]+)/pending)", [worker_run, pending_json](const httplib::Request& req,
                                                                   httplib::Response& res) {
        const std::string worker = req.matches[1];
        if (auto run = worker_run(req, res, worker)) {
            send_json(res, 200, pending_json(*run, worker));
        }
    });

    s.Get(R"(/workers/([^/]+)/stream)", [this, worker_run, pending_json](const httplib::Request& req,
                                                                        httplib::Response& res) {
        const std::string worker = req.matches[1];
        auto run = worker_run(req, res, worker);
        if (!run) {
            return;
        }
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, run, worker, pending_json, last = json(), seen = std::uint64_t{0}, first = true](
                std::size_t, httplib::DataSink& sink) mutable {
                while (!stopping_) {
                    auto current = pending_json(*run, worker);
                    if (first || current != last) {
                        first = false;
                        last = current;
                        const auto frame = sse_frame("pending", current);
                        return sink.write(frame.data(), frame.size());
                    }
                    if (run->finished()) {
                        const auto frame = sse_frame("finished", json{{"run", run->id()}});
                        sink.write(frame.data(), frame.size());
                        sink.done();
                        return true;
                    }
                    std::unique_lock lock(notifier_->mutex);
                    if (notifier_->cv.wait_for(lock, std::chrono::milliseconds(250),
                                               [&] { return notifier_->version != seen || stopping_; })) {
                        seen = notifier_->version;
                    } else {
                        lock.unlock();
                        static const std::string keepalive = ": keepalive\n\n";
                        if (!sink.write(keepalive.data(), keepalive.size())) {
                            return false;
                        }
                    }
                }
                return false;
            });
    });

    auto post_answer = [worker_run](const httplib::Request& req, httplib::Response& res, bool completion) {
        const std::string worker = req.matches[1];
        auto body = parse_body(req, res);
        if (!body) {
            return;
        }
        auto run = worker_run(req, res, worker);
        if (!run) {
            return;
        }
        if (!body->contains("request") || !body->at("request").is_number_unsigned()) {
            send_error(res, 400, "bad_request", "request: expected the pending request id");
            return;
        }
        std::optional<Decision> decision = Decision::Complete;
        if (!completion) {
            const auto text = body->value("decision", std::string());
            decision = parse_decision(text);
            if (!decision || *decision == Decision::Complete) {
                send_error(res, 400, "bad_request", "decision: expected 'accept' or 'reject'");
                return;
            }
        }
        const auto id = body->at("request").get<nodes::RequestId>();
        const auto result = run->post(worker, id, *decision);
        const int status = status_for(result);
        if (status >= 400) {
            send_error(res, status, to_string(result),
                       "request " + std::to_string(id) + " of worker '" + worker + "' was not applied");
            return;
        }
        send_json(res, status, json{{"status", to_string(result)}, {"request", id}, {"run", run->id()}});
    };

    s.Post(R"(/workers/([^/]+)/decision)",
           [post_answer](const httplib::Request& req, httplib::Response& res) { post_answer(req, res, false); });
    s.Post(R"(/workers/([^/]+)/completion)",
           [post_answer](const httplib::Request& req, httplib::Response& res) { post_answer(req, res, true); });

    s.Post(R"(/workers/([^/]+)/position)", [worker_run](const httplib::Request& req, httplib::Response& res) {
        const std::string worker = req.matches[1];
        auto body = parse_body(req, res);
        if (!body) {
            return;
        }
        auto run = worker_run(req, res, worker);
        if (!run) {
            return;
        }
        const auto it = body->find("position");
        if (it == body->end() || !it->is_array() || it->size() != 3 ||
            !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_number(); })) {
            send_error(res, 400, "bad_request", "position: expected [x, y, z] in metres");
            return;
        }
        run->post_position(worker, {(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>()});
        send_json(res, 202, json{{"status", "queued"}, {"run", run->id()}});
    });
}

}  // namespace hrt::service
