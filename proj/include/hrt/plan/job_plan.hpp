#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hrt/alloc/candidates.hpp"
#include "hrt/cost/cost_models.hpp"

namespace hrt::plan {

enum class WorkerType { Human, Robot };

std::string_view to_string(WorkerType type);

struct WorkerSpec {
    std::string id;
    WorkerType type = WorkerType::Robot;
    bool console = false;  // answers negotiations through an operator console
};

enum class PrimitiveKind { Move, Grasp, Release, SwitchController, Wait };

std::string_view to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_primitive(std::string_view name);

struct ActionSpec {
    std::string id;
    std::string label;
    bool collaborative = false;
    std::map<std::string, double> durations;   // canonical candidate id -> seconds
    std::map<std::string, double> init_costs;  // for the distance metric
    std::optional<cost::Vec3> position;
    std::string instruction_kind;
    std::string instruction;
    std::vector<PrimitiveKind> robot_primitives;  // empty = default move-object template
};

struct PlanGroup;
using PlanItem = std::variant<std::string, PlanGroup>;

struct PlanGroup {
    enum class Kind { Sequence, Parallel };
    Kind kind = Kind::Sequence;
    std::vector<PlanItem> children;
    std::optional<std::size_t> threshold;  // parallel only
};

class JobError : public std::runtime_error {
public:
    explicit JobError(std::vector<std::string> problems);
    [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// A job: its team, its atomic actions with per-candidate durations, and
/// the sequence/parallel structure over them.
struct JobPlan {
    std::string name;
    std::vector<WorkerSpec> workers;
    std::vector<ActionSpec> actions;
    PlanItem structure;

    /// Every semantic problem found, one message each, prefixed by the
    /// offending field. Empty means valid.
    [[nodiscard]] std::vector<std::string> problems() const;

    /// Throws JobError with `problems()` when non-empty.
    void validate() const;

    [[nodiscard]] std::vector<std::string> worker_ids() const;
    [[nodiscard]] const WorkerSpec& worker(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> worker_index(std::string_view id) const;
    [[nodiscard]] const ActionSpec& action(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> action_index(std::string_view id) const;

    /// Action ids in the order they appear in `structure`.
    [[nodiscard]] std::vector<std::string> structure_order() const;

    [[nodiscard]] alloc::CandidateSet candidates(int max_combo) const;

    /// Duration of `candidate` for `action`, nullopt when not capable.
    [[nodiscard]] std::optional<double> duration(std::string_view action, std::string_view candidate) const;
};

/// Rewrites a candidate id into the roster's canonical member order
/// ("w2+w1" -> "w1+w2"); nullopt if a member is unknown or repeated.
std::optional<std::string> canonical_candidate(const std::vector<WorkerSpec>& workers, std::string_view id);

}  // namespace hrt::plan
