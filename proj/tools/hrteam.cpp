// hrteam: run, benchmark, serve and replay mixed human-robot team jobs.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrt/service/http_server.hpp"
#include "hrt/service/job_document.hpp"
#include "hrt/service/run_manager.hpp"
#include "hrt/sim/benchmark.hpp"
#include "hrt/sim/engine.hpp"
#include "hrt/sim/trace.hpp"

using nlohmann::json;

namespace {

std::vector<std::size_t> parse_range(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto dots = part.find("..");
        std::size_t step = 1;
        auto colon = part.find(':');
        if (colon != std::string::npos) {
            step = std::stoul(part.substr(colon + 1));
            part = part.substr(0, colon);
        }
        if (dots == std::string::npos) {
            out.push_back(std::stoul(part));
            continue;
        }
        const std::size_t lo = std::stoul(part.substr(0, dots));
        const std::size_t hi = std::stoul(part.substr(dots + 2));
        if (lo > hi || step == 0) {
            throw std::invalid_argument("bad range '" + text + "'");
        }
        for (std::size_t v = lo; v <= hi; v += step) {
            out.push_back(v);
        }
    }
    return out;
}

std::map<std::string, int> parse_rejections(const std::vector<std::string>& specs, std::string& worker) {
    std::map<std::string, int> out;
    for (const auto& s : specs) {
        // worker:action[:count]
        auto a = s.find(':');
        if (a == std::string::npos) {
            throw std::invalid_argument("--reject expects worker:action[:count], got '" + s + "'");
        }
        worker = s.substr(0, a);
        auto rest = s.substr(a + 1);
        auto b = rest.find(':');
        out[rest.substr(0, b)] += b == std::string::npos ? 1 : std::stoi(rest.substr(b + 1));
    }
    return out;
}

int cmd_run(const std::string& job_path, const std::string& variant_name, const std::string& metric_name,
            std::uint64_t seed, const std::string& trace_path, const std::string& gantt_path,
            const std::string& log_path, const std::vector<std::string>& rejects, double reject_probability,
            const std::string& counting) {
    auto doc = hrt::service::load_job(job_path);
    hrt::sim::SimOptions options;
    options.seed = seed;
    options.cost = doc.cost;
    options.variant = doc.variant.value_or(hrt::nodes::Variant::CollabMT);
    if (!variant_name.empty()) {
        options.variant = *hrt::nodes::parse_variant(variant_name);
    }
    if (!metric_name.empty()) {
        options.cost.metric = *hrt::nodes::parse_metric(metric_name);
    }
    if (!counting.empty()) {
        options.cost.counting = *hrt::alloc::parse_counting_rule(counting);
    }
    options.default_policy = hrt::sim::HumanPolicy::probabilistic(reject_probability);
    std::map<std::string, std::map<std::string, int>> scripted;
    for (const auto& r : rejects) {
        std::string worker;
        for (const auto& [action, n] : parse_rejections({r}, worker)) {
            scripted[worker][action] += n;
        }
    }
    for (auto& [worker, actions] : scripted) {
        auto policy = hrt::sim::HumanPolicy::scripted(actions);
        policy.reject_probability = reject_probability;
        options.policies[worker] = policy;
    }

    const auto result = hrt::sim::run_sim(doc.plan, options);
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        hrt::sim::write_trace_csv(result.trace, out);
    }
    if (!gantt_path.empty()) {
        std::ofstream out(gantt_path);
        hrt::sim::write_gantt(result.trace, out);
    }
    if (!log_path.empty()) {
        std::ofstream out(log_path);
        for (const auto& e : result.events) {
            out << hrt::sim::to_line(e) << '\n';
        }
    }
    json allocations = json::object();
    for (const auto& e : result.trace.entries) {
        if (e.outcome == hrt::sim::Outcome::Completed) {
            allocations[e.action] = e.candidate;
        }
    }
    json rejections = json::array();
    for (const auto& r : result.trace.rejections) {
        rejections.push_back({{"worker", r.worker}, {"action", r.action}, {"time", r.time}});
    }
    json summary{{"job", doc.plan.name},
                 {"variant", hrt::nodes::to_string(options.variant)},
                 {"metric", hrt::nodes::to_string(options.cost.metric)},
                 {"status", hrt::sim::to_string(result.status)},
                 {"makespan", hrt::sim::makespan(result.trace)},
                 {"allocations", allocations},
                 {"rejections", rejections},
                 {"solves", result.stats.solves},
                 {"candidates", result.candidates}};
    if (!result.reason.empty()) {
        summary["reason"] = result.reason;
    }
    std::cout << summary.dump() << '\n';
    return result.status == hrt::sim::RunStatus::Completed ? 0 : 1;
}

int cmd_bench(const std::string& topology, const std::string& actions, const std::string& agents,
              const std::string& variant, int reps, std::uint64_t seed) {
    hrt::sim::BenchmarkSpec spec;
    spec.topology = *hrt::sim::parse_topology(topology);
    spec.actions = parse_range(actions);
    spec.agents = parse_range(agents);
    spec.variant = *hrt::nodes::parse_variant(variant);
    spec.repetitions = reps;
    spec.seed = seed;
    std::cout << "topology,variant,actions,agents,candidates,reps,total_ms_mean,total_ms_stddev,per_action_ms,solves\n";
    for (const auto& row : hrt::sim::run_benchmark(spec)) {
        char line[256];
        std::snprintf(line, sizeof line, "%s,%s,%zu,%zu,%zu,%d,%.3f,%.3f,%.4f,%.1f",
                      std::string(hrt::sim::to_string(row.topology)).c_str(),
                      std::string(hrt::nodes::to_string(row.variant)).c_str(), row.actions, row.agents,
                      row.candidates, row.repetitions, row.total_ms_mean, row.total_ms_stddev, row.per_action_ms,
                      row.solves_mean);
        std::cout << line << '\n';
    }
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& trace_path) {
    std::ifstream in(log_path);
    if (!in) {
        throw std::runtime_error("cannot open log '" + log_path + "'");
    }
    const auto state = hrt::sim::replay(hrt::sim::read_events(in));
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        hrt::sim::write_trace_csv(state.trace, out);
    }
    json prefs = json::array();
    for (const auto& [key, entry] : state.preferences) {
        prefs.push_back({{"candidate", key.first},
                         {"action", key.second},
                         {"negations", entry.negations},
                         {"negotiations", entry.negotiations}});
    }
    json summary{{"status", state.status},
                 {"completed", state.completed},
                 {"makespan", hrt::sim::makespan(state.trace)},
                 {"entries", state.trace.entries.size()},
                 {"rejections", state.trace.rejections.size()},
                 {"preferences", prefs}};
    if (!state.reason.empty()) {
        summary["reason"] = state.reason;
    }
    std::cout << summary.dump() << '\n';
    return 0;
}

int cmd_serve(const std::string& job_path, const std::string& host, int port, const std::string& mode,
              const std::string& log_dir, double soft_timeout, bool start_run) {
    auto doc = hrt::service::load_job(job_path);
    hrt::service::RunConfig defaults;
    defaults.mode = *hrt::service::parse_mode(mode);
    defaults.log_dir = log_dir;
    defaults.soft_timeout = soft_timeout;

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    hrt::service::RunManager runs(defaults);
    hrt::service::HttpService http(runs, doc);
    if (http.bind(host, port) < 0) {
        std::cerr << "error: cannot bind " << host << ":" << port << '\n';
        return 2;
    }
    http.start();
    json ready{{"listening", host + ":" + std::to_string(http.port())}, {"job", doc.plan.name}, {"mode", mode}};
    if (start_run) {
        ready["run"] = runs.start(doc);
    }
    std::cout << ready.dump() << std::endl;

    int received = 0;
    sigwait(&signals, &received);
    http.stop();
    runs.stop_all();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task planning and dynamic role allocation for human-robot teams"};
    app.require_subcommand(1);

    std::string job, variant, metric, trace, gantt, log, counting;
    std::uint64_t seed = 1;
    std::vector<std::string> rejects;
    double reject_probability = 0.0;
    auto* run = app.add_subcommand("run", "Simulate a job in virtual time and print a JSON summary");
    run->add_option("job", job, "Job document")->required()->check(CLI::ExistingFile);
    run->add_option("--variant", variant, "Allocator variant")
        ->check(CLI::IsMember({"collab-mt", "coop-mt", "coop-st"}));
    run->add_option("--cost", metric, "Cost metric")->check(CLI::IsMember({"duration", "distance"}));
    run->add_option("--counting", counting, "Collaboration counting rule")
        ->check(CLI::IsMember({"epsilon", "scaled"}));
    run->add_option("--seed", seed, "Seed for simulated decisions");
    run->add_option("--trace", trace, "Write the execution trace (CSV)");
    run->add_option("--gantt", gantt, "Write a per-worker Gantt table (CSV)");
    run->add_option("--log", log, "Write the event log");
    run->add_option("--reject", rejects, "Scripted rejection worker:action[:count]");
    run->add_option("--reject-probability", reject_probability, "Probability that a human rejects a request")
        ->check(CLI::Range(0.0, 1.0));

    std::string topology = "series", actions = "1..10", agents = "3", bench_variant = "collab-mt";
    int reps = 10;
    auto* bench = app.add_subcommand("bench", "Measure allocation compute time on generated jobs (CSV)");
    bench->add_option("--topology", topology, "series or parallel")->check(CLI::IsMember({"series", "parallel"}));
    bench->add_option("--actions", actions, "Action counts, e.g. 1..101:10 or 12");
    bench->add_option("--agents", agents, "Agent counts, e.g. 3..20");
    bench->add_option("--variant", bench_variant, "Allocator variant")
        ->check(CLI::IsMember({"collab-mt", "coop-mt", "coop-st"}));
    bench->add_option("--reps", reps, "Repetitions per configuration")->check(CLI::PositiveNumber);
    bench->add_option("--seed", seed, "Seed for generated costs");

    std::string replay_log;
    auto* replay = app.add_subcommand("replay", "Rebuild the final run state from an event log");
    replay->add_option("log", replay_log, "Event log")->required()->check(CLI::ExistingFile);
    replay->add_option("--trace", trace, "Write the reconstructed trace (CSV)");

    std::string serve_job, host = "127.0.0.1", mode = "live", log_dir;
    int port = 8080;
    double soft_timeout = 120.0;
    bool start_run = false;
    auto* serve = app.add_subcommand("serve", "Serve the run API for live workers and the operator console");
    serve->add_option("job", serve_job, "Default job for new runs")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", port, "TCP port, 0 for any free port")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Address to bind");
    serve->add_option("--mode", mode, "Default run mode")->check(CLI::IsMember({"simulated", "live", "mixed"}));
    serve->add_option("--log-dir", log_dir, "Write each run's event log here when it ends");
    serve->add_option("--soft-timeout", soft_timeout, "Seconds before an unanswered request raises an alert");
    serve->add_flag("--start", start_run, "Start a run of the job immediately");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(job, variant, metric, seed, trace, gantt, log, rejects, reject_probability, counting);
        }
        if (*bench) {
            return cmd_bench(topology, actions, agents, bench_variant, reps, seed);
        }
        if (*replay) {
            return cmd_replay(replay_log, trace);
        }
        if (*serve) {
            return cmd_serve(serve_job, host, port, mode, log_dir, soft_timeout, start_run);
        }
    } catch (const hrt::plan::JobError& ex) {
        std::cerr << "invalid job:\n";
        for (const auto& p : ex.problems()) {
            std::cerr << "  " << p << '\n';
        }
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
    return 0;
}
