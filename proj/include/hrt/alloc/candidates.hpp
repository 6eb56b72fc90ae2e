#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hrt::alloc {

/// Separator used in collaboration ids: "w1+w2".
inline constexpr char kMemberSeparator = '+';

/// A single worker or a collaboration of workers.
struct Candidate {
    std::string id;
    std::vector<std::size_t> members;  // ascending base-worker indices
    std::vector<std::uint8_t> eta;     // membership vector over base workers

    [[nodiscard]] std::size_t size() const { return members.size(); }
    [[nodiscard]] bool is_collaboration() const { return members.size() > 1; }
    [[nodiscard]] bool contains(std::size_t worker) const;
};

/// Singles in roster order, then k-combinations in lexicographic order of
/// member indices, for k = 2..max_combo.
class CandidateSet {
public:
    CandidateSet() = default;
    CandidateSet(std::vector<std::string> workers, int max_combo);

    [[nodiscard]] std::size_t base_count() const { return workers_.size(); }
    [[nodiscard]] int max_combo() const { return max_combo_; }
    [[nodiscard]] std::size_t size() const { return candidates_.size(); }
    [[nodiscard]] const Candidate& operator[](std::size_t i) const { return candidates_.at(i); }
    [[nodiscard]] std::span<const Candidate> all() const { return candidates_; }
    [[nodiscard]] const std::vector<std::string>& workers() const { return workers_; }

    /// Index of a candidate id; member order in the id does not matter.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> find_members(std::span<const std::size_t> members) const;

private:
    std::vector<std::string> workers_;
    int max_combo_ = 1;
    std::vector<Candidate> candidates_;
};

CandidateSet build_candidates(std::vector<std::string> workers, int max_combo = 2);

/// Joins worker names into a collaboration id.
std::string collaboration_id(std::span<const std::string> names);

/// Splits "a+b" into {"a", "b"}; a single name yields one element.
std::vector<std::string> split_candidate_id(std::string_view id);

/// How collaborations contribute to the allocation-count constraint.
/// Epsilon: floor((k-1)(min(L,N)-1)/(N-1+eps) + 1) with eps -> 0+, so a
/// k-member candidate counts one less than the scaled rule whenever the
/// scaled quotient is a positive integer. Scaled: the same formula without
/// eps, so theta(N) = min(L,N).
enum class CountingRule { Epsilon, Scaled };

std::string_view to_string(CountingRule rule);
std::optional<CountingRule> parse_counting_rule(std::string_view name);

/// Scaled counting weight of a k-member candidate when allocating L
/// actions to N base workers: floor((k-1)(min(L,N)-1)/(N-1)) + 1, and 1
/// when N = 1.
int theta(int k, int actions, int workers);

/// Epsilon counting weight: max(1, ceil((k-1)(min(L,N)-1)/(N-1))).
int theta_epsilon(int k, int actions, int workers);

int theta(CountingRule rule, int k, int actions, int workers);

}  // namespace hrt::alloc
