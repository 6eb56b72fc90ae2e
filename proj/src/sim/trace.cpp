#include "hrt/sim/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "hrt/alloc/candidates.hpp"

namespace hrt::sim {

std::string_view to_string(Outcome outcome) { return outcome == Outcome::Completed ? "completed" : "rejected"; }

const TraceEntry* ExecutionTrace::completed(const std::string& action) const {
    for (const auto& e : entries) {
        if (e.action == action && e.outcome == Outcome::Completed) {
            return &e;
        }
    }
    return nullptr;
}

double makespan(const ExecutionTrace& trace) {
    if (trace.entries.empty()) {
        return 0.0;
    }
    double first = trace.entries.front().start;
    double last = trace.entries.front().end;
    for (const auto& e : trace.entries) {
        first = std::min(first, e.start);
        last = std::max(last, e.end);
    }
    return last - first;
}

namespace {

std::string seconds(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", value);
    return buf;
}

}  // namespace

void write_trace_csv(const ExecutionTrace& trace, std::ostream& out) {
    out << "worker,action,start,end,outcome\n";
    for (const auto& e : trace.entries) {
        out << e.candidate << ',' << e.action << ',' << seconds(e.start) << ',' << seconds(e.end) << ','
            << to_string(e.outcome) << '\n';
    }
}

void write_gantt(const ExecutionTrace& trace, std::ostream& out) {
    out << "worker,action,candidate,start,duration,outcome\n";
    for (const auto& e : trace.entries) {
        for (const auto& w : alloc::split_candidate_id(e.candidate)) {
            out << w << ',' << e.action << ',' << e.candidate << ',' << seconds(e.start) << ','
                << seconds(e.end - e.start) << ',' << to_string(e.outcome) << '\n';
        }
    }
}

std::vector<std::string> overlap_violations(const ExecutionTrace& trace) {
    std::map<std::string, std::vector<const TraceEntry*>> by_worker;
    for (const auto& e : trace.entries) {
        for (const auto& w : alloc::split_candidate_id(e.candidate)) {
            by_worker[w].push_back(&e);
        }
    }
    std::vector<std::string> out;
    for (auto& [worker, list] : by_worker) {
        std::sort(list.begin(), list.end(), [](const TraceEntry* a, const TraceEntry* b) {
            return a->start != b->start ? a->start < b->start : a->end < b->end;
        });
        for (std::size_t i = 1; i < list.size(); ++i) {
            if (list[i]->start < list[i - 1]->end - 1e-9) {
                out.push_back(worker + ": " + list[i - 1]->action + " [" + seconds(list[i - 1]->start) + ", " +
                              seconds(list[i - 1]->end) + "] overlaps " + list[i]->action + " [" +
                              seconds(list[i]->start) + ", " + seconds(list[i]->end) + "]");
            }
        }
    }
    return out;
}

std::vector<std::string> precedence_violations(const ExecutionTrace& trace, const plan::JobPlan& job) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    struct Span {
        double start = inf;
        double done = inf;
    };
    std::vector<std::string> out;
    std::function<Span(const plan::PlanItem&)> walk = [&](const plan::PlanItem& item) -> Span {
        if (const auto* id = std::get_if<std::string>(&item)) {
            const TraceEntry* e = trace.completed(*id);
            return e ? Span{e->start, e->end} : Span{};
        }
        const auto& group = std::get<plan::PlanGroup>(item);
        std::vector<Span> spans;
        for (const auto& child : group.children) {
            spans.push_back(walk(child));
        }
        Span s;
        for (const auto& c : spans) {
            s.start = std::min(s.start, c.start);
        }
        if (group.kind == plan::PlanGroup::Kind::Sequence) {
            for (std::size_t i = 1; i < spans.size(); ++i) {
                if (spans[i].start < spans[i - 1].done - 1e-9) {
                    out.push_back("sequence step " + std::to_string(i) + " starts at " + seconds(spans[i].start) +
                                  " before step " + std::to_string(i - 1) + " is done at " +
                                  seconds(spans[i - 1].done));
                }
            }
            s.done = spans.empty() ? -inf : spans.back().done;
        } else {
            std::vector<double> ends;
            for (const auto& c : spans) {
                ends.push_back(c.done);
            }
            std::sort(ends.begin(), ends.end());
            const std::size_t m = group.threshold.value_or(ends.size());
            s.done = m == 0 || ends.empty() ? -inf : ends[m - 1];
        }
        return s;
    };
    walk(job.structure);
    return out;
}

ReplayState replay(const std::vector<Event>& events) {
    ReplayState state;
    for (const auto& e : events) {
        const auto& p = e.payload;
        if (e.kind == "allocation") {
            for (const auto& a : p.at("actions")) {
                state.allocation.erase(a.get<std::string>());
            }
            for (const auto& pair : p.at("pairs")) {
                state.allocation[pair.at("action").get<std::string>()] = pair.at("candidate").get<std::string>();
            }
        } else if (e.kind == "complete") {
            const auto action = p.at("action").get<std::string>();
            state.trace.entries.push_back({p.at("candidate").get<std::string>(), action, p.at("start").get<double>(),
                                           p.at("end").get<double>(), Outcome::Completed});
            state.completed.insert(action);
            state.allocation.erase(action);
        } else if (e.kind == "reject") {
            const auto action = p.at("action").get<std::string>();
            state.trace.entries.push_back({p.at("candidate").get<std::string>(), action,
                                           p.at("requested").get<double>(), p.at("time").get<double>(),
                                           Outcome::Rejected});
            state.trace.rejections.push_back({p.at("worker").get<std::string>(), action, p.at("time").get<double>()});
            state.allocation.erase(action);
        } else if (e.kind == "preference") {
            state.preferences[{p.at("candidate").get<std::string>(), p.at("action").get<std::string>()}] =
                cost::PreferenceEntry{p.at("negations").get<int>(), p.at("negotiations").get<int>()};
        } else if (e.kind == "run_end") {
            state.status = p.at("status").get<std::string>();
            state.reason = p.value("reason", "");
        }
    }
    return state;
}

}  // namespace hrt::sim
