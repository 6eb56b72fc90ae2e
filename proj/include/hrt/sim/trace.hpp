#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hrt/cost/cost_models.hpp"
#include "hrt/plan/job_plan.hpp"
#include "hrt/sim/event_log.hpp"

namespace hrt::sim {

enum class Outcome { Completed, Rejected };

std::string_view to_string(Outcome outcome);

struct TraceEntry {
    std::string candidate;
    std::string action;
    double start = 0.0;
    double end = 0.0;
    Outcome outcome = Outcome::Completed;
    bool operator==(const TraceEntry&) const = default;
};

struct Rejection {
    std::string worker;
    std::string action;
    double time = 0.0;
    bool operator==(const Rejection&) const = default;
};

struct ExecutionTrace {
    std::vector<TraceEntry> entries;
    std::vector<Rejection> rejections;
    bool operator==(const ExecutionTrace&) const = default;

    /// Completed entry of an action, nullptr if it never completed.
    [[nodiscard]] const TraceEntry* completed(const std::string& action) const;
};

/// Latest end minus earliest start over all entries; 0 for an empty trace.
double makespan(const ExecutionTrace& trace);

/// `worker,action,start,end,outcome` lines (worker = candidate id),
/// seconds with 3 decimals.
void write_trace_csv(const ExecutionTrace& trace, std::ostream& out);

/// One row per base worker and entry, ready for a Gantt plot.
void write_gantt(const ExecutionTrace& trace, std::ostream& out);

/// Overlapping intervals of entries sharing a base worker. Touching
/// intervals are fine.
std::vector<std::string> overlap_violations(const ExecutionTrace& trace);

/// Pairs of actions whose completed intervals contradict the sequence
/// groups of the plan (a later action starting before an earlier one ends).
std::vector<std::string> precedence_violations(const ExecutionTrace& trace, const plan::JobPlan& job);

/// Run state reconstructed from an event log.
struct ReplayState {
    ExecutionTrace trace;
    std::set<std::string> completed;
    std::map<std::string, std::string> allocation;  // last published, action -> candidate
    std::map<std::pair<std::string, std::string>, cost::PreferenceEntry> preferences;
    std::string status = "running";  // running | completed | failed
    std::string reason;
    bool operator==(const ReplayState&) const = default;
};

ReplayState replay(const std::vector<Event>& events);

}  // namespace hrt::sim
