#include "hrt/plan/job_plan.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>

namespace hrt::plan {

std::string_view to_string(WorkerType type) { return type == WorkerType::Human ? "human" : "robot"; }

std::string_view to_string(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::Move: return "MOVE";
        case PrimitiveKind::Grasp: return "GRASP";
        case PrimitiveKind::Release: return "RELEASE";
        case PrimitiveKind::SwitchController: return "SWITCH_CONTROLLER";
        case PrimitiveKind::Wait: return "WAIT";
    }
    return "?";
}

std::optional<PrimitiveKind> parse_primitive(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (auto k : {PrimitiveKind::Move, PrimitiveKind::Grasp, PrimitiveKind::Release, PrimitiveKind::SwitchController,
                   PrimitiveKind::Wait}) {
        if (to_string(k) == upper) {
            return k;
        }
    }
    return std::nullopt;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        out += (out.empty() ? "" : "; ") + p;
    }
    return out;
}

}  // namespace

JobError::JobError(std::vector<std::string> problems)
    : std::runtime_error("invalid job: " + join(problems)), problems_(std::move(problems)) {}

std::optional<std::string> canonical_candidate(const std::vector<WorkerSpec>& workers, std::string_view id) {
    std::vector<std::size_t> members;
    for (const auto& name : alloc::split_candidate_id(id)) {
        auto it = std::find_if(workers.begin(), workers.end(), [&](const WorkerSpec& w) { return w.id == name; });
        if (it == workers.end()) {
            return std::nullopt;
        }
        members.push_back(static_cast<std::size_t>(it - workers.begin()));
    }
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
        return std::nullopt;
    }
    std::vector<std::string> names;
    for (std::size_t m : members) {
        names.push_back(workers[m].id);
    }
    return alloc::collaboration_id(names);
}

std::vector<std::string> JobPlan::problems() const {
    std::vector<std::string> out;
    if (workers.empty()) {
        out.push_back("workers: roster is empty");
    }
    std::set<std::string> worker_names;
    for (std::size_t i = 0; i < workers.size(); ++i) {
        const auto& w = workers[i];
        const std::string where = "workers[" + std::to_string(i) + "]";
        if (w.id.empty() || w.id.find(alloc::kMemberSeparator) != std::string::npos) {
            out.push_back(where + ".id: invalid worker id '" + w.id + "'");
        } else if (!worker_names.insert(w.id).second) {
            out.push_back(where + ".id: duplicate worker '" + w.id + "'");
        }
    }
    if (actions.empty()) {
        out.push_back("actions: job has no actions");
    }
    std::set<std::string> action_names;
    for (const auto& a : actions) {
        const std::string where = "actions[" + a.id + "]";
        if (a.id.empty()) {
            out.push_back("actions: empty action id");
            continue;
        }
        if (!action_names.insert(a.id).second) {
            out.push_back(where + ": duplicate action id");
        }
        bool capable = false;
        for (const auto& [cand, seconds] : a.durations) {
            auto canon = canonical_candidate(workers, cand);
            if (!canon) {
                out.push_back(where + ".durations: unknown worker or candidate '" + cand + "'");
                continue;
            }
            if (*canon != cand) {
                out.push_back(where + ".durations: candidate '" + cand + "' not in canonical order ('" + *canon + "')");
            }
            if (!std::isfinite(seconds) || seconds <= 0.0) {
                out.push_back(where + ".durations." + cand + ": duration must be > 0");
            }
            const bool pair = cand.find(alloc::kMemberSeparator) != std::string::npos;
            if (pair && !a.collaborative) {
                out.push_back(where + ".durations." + cand + ": collaboration cost on an action not enabled as collaborative");
            }
            capable = true;
        }
        if (!capable) {
            out.push_back(where + ": no worker or collaboration can perform this action");
        }
        for (const auto& [cand, c] : a.init_costs) {
            if (!a.durations.count(cand)) {
                out.push_back(where + ".init_costs." + cand + ": no duration for this candidate");
            }
            if (!std::isfinite(c) || c < 0.0) {
                out.push_back(where + ".init_costs." + cand + ": cost must be >= 0");
            }
        }
    }

    std::map<std::string, int> seen;
    std::function<void(const PlanItem&, const std::string&)> walk = [&](const PlanItem& item, const std::string& path) {
        if (const auto* id = std::get_if<std::string>(&item)) {
            if (!action_names.count(*id)) {
                out.push_back(path + ": unknown action '" + *id + "'");
            }
            ++seen[*id];
            return;
        }
        const auto& g = std::get<PlanGroup>(item);
        if (g.children.empty()) {
            out.push_back(path + ": empty group");
        }
        if (g.threshold) {
            if (g.kind != PlanGroup::Kind::Parallel) {
                out.push_back(path + ": threshold only applies to parallel groups");
            } else if (*g.threshold < 1 || *g.threshold > g.children.size()) {
                out.push_back(path + ": threshold must be within 1.." + std::to_string(g.children.size()));
            }
        }
        for (std::size_t i = 0; i < g.children.size(); ++i) {
            walk(g.children[i], path + "[" + std::to_string(i) + "]");
        }
    };
    walk(structure, "structure");
    for (const auto& [id, count] : seen) {
        if (count > 1) {
            out.push_back("structure: action '" + id + "' referenced " + std::to_string(count) + " times");
        }
    }
    for (const auto& id : action_names) {
        if (!seen.count(id)) {
            out.push_back("structure: action '" + id + "' is never scheduled");
        }
    }
    return out;
}

void JobPlan::validate() const {
    auto found = problems();
    if (!found.empty()) {
        throw JobError(std::move(found));
    }
}

std::vector<std::string> JobPlan::worker_ids() const {
    std::vector<std::string> ids;
    for (const auto& w : workers) {
        ids.push_back(w.id);
    }
    return ids;
}

const WorkerSpec& JobPlan::worker(std::string_view id) const {
    auto idx = worker_index(id);
    if (!idx) {
        throw std::out_of_range("unknown worker '" + std::string(id) + "'");
    }
    return workers[*idx];
}

std::optional<std::size_t> JobPlan::worker_index(std::string_view id) const {
    for (std::size_t i = 0; i < workers.size(); ++i) {
        if (workers[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

const ActionSpec& JobPlan::action(std::string_view id) const {
    auto idx = action_index(id);
    if (!idx) {
        throw std::out_of_range("unknown action '" + std::string(id) + "'");
    }
    return actions[*idx];
}

std::optional<std::size_t> JobPlan::action_index(std::string_view id) const {
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

std::vector<std::string> JobPlan::structure_order() const {
    std::vector<std::string> order;
    std::function<void(const PlanItem&)> walk = [&](const PlanItem& item) {
        if (const auto* id = std::get_if<std::string>(&item)) {
            order.push_back(*id);
            return;
        }
        for (const auto& c : std::get<PlanGroup>(item).children) {
            walk(c);
        }
    };
    walk(structure);
    return order;
}

alloc::CandidateSet JobPlan::candidates(int max_combo) const { return alloc::CandidateSet(worker_ids(), max_combo); }

std::optional<double> JobPlan::duration(std::string_view action_id, std::string_view candidate) const {
    const auto& a = action(action_id);
    auto it = a.durations.find(std::string(candidate));
    if (it == a.durations.end()) {
        return std::nullopt;
    }
    return it->second;
}

}  // namespace hrt::plan
