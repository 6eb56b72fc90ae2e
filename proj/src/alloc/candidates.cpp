#include "hrt/alloc/candidates.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace hrt::alloc {

bool Candidate::contains(std::size_t worker) const {
    return std::binary_search(members.begin(), members.end(), worker);
}

CandidateSet::CandidateSet(std::vector<std::string> workers, int max_combo)
    : workers_(std::move(workers)), max_combo_(max_combo) {
    const std::size_t n = workers_.size();
    if (n == 0) {
        throw std::invalid_argument("candidate set needs at least one worker");
    }
    if (max_combo < 1) {
        throw std::invalid_argument("max_combo must be >= 1");
    }
    std::set<std::string> unique(workers_.begin(), workers_.end());
    if (unique.size() != n) {
        throw std::invalid_argument("duplicate worker id in roster");
    }
    for (const auto& w : workers_) {
        if (w.empty() || w.find(kMemberSeparator) != std::string::npos) {
            throw std::invalid_argument("invalid worker id '" + w + "'");
        }
    }

    const std::size_t k_max = std::min<std::size_t>(static_cast<std::size_t>(max_combo), n);
    std::vector<std::size_t> combo;
    std::function<void(std::size_t, std::size_t)> enumerate = [&](std::size_t start, std::size_t k) {
        if (combo.size() == k) {
            Candidate c;
            c.members = combo;
            c.eta.assign(n, 0);
            std::vector<std::string> names;
            for (std::size_t m : combo) {
                c.eta[m] = 1;
                names.push_back(workers_[m]);
            }
            c.id = collaboration_id(names);
            candidates_.push_back(std::move(c));
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            combo.push_back(i);
            enumerate(i + 1, k);
            combo.pop_back();
        }
    };
    for (std::size_t k = 1; k <= k_max; ++k) {
        enumerate(0, k);
    }
}

std::optional<std::size_t> CandidateSet::find(std::string_view id) const {
    std::vector<std::size_t> members;
    for (const auto& name : split_candidate_id(id)) {
        auto it = std::find(workers_.begin(), workers_.end(), name);
        if (it == workers_.end()) {
            return std::nullopt;
        }
        members.push_back(static_cast<std::size_t>(it - workers_.begin()));
    }
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
        return std::nullopt;
    }
    return find_members(members);
}

std::optional<std::size_t> CandidateSet::find_members(std::span<const std::size_t> members) const {
    std::vector<std::size_t> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
        if (candidates_[i].members == sorted) {
            return i;
        }
    }
    return std::nullopt;
}

CandidateSet build_candidates(std::vector<std::string> workers, int max_combo) {
    return CandidateSet(std::move(workers), max_combo);
}

std::string collaboration_id(std::span<const std::string> names) {
    std::string id;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) {
            id += kMemberSeparator;
        }
        id += names[i];
    }
    return id;
}

std::vector<std::string> split_candidate_id(std::string_view id) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = id.find(kMemberSeparator, start);
        parts.emplace_back(id.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

int theta(int k, int actions, int workers) {
    if (workers < 1 || k < 1 || k > workers || actions < 1) {
        throw std::invalid_argument("theta requires 1 <= k <= N and L >= 1");
    }
    if (workers == 1) {
        return 1;
    }
    const int cap = std::min(actions, workers);
    return (k - 1) * (cap - 1) / (workers - 1) + 1;
}

int theta_epsilon(int k, int actions, int workers) {
    if (workers < 1 || k < 1 || k > workers || actions < 1) {
        throw std::invalid_argument("theta requires 1 <= k <= N and L >= 1");
    }
    if (workers == 1) {
        return 1;
    }
    const int x = (k - 1) * (std::min(actions, workers) - 1);
    return x == 0 ? 1 : (x - 1) / (workers - 1) + 1;
}

int theta(CountingRule rule, int k, int actions, int workers) {
    return rule == CountingRule::Epsilon ? theta_epsilon(k, actions, workers) : theta(k, actions, workers);
}

std::string_view to_string(CountingRule rule) { return rule == CountingRule::Epsilon ? "epsilon" : "scaled"; }

std::optional<CountingRule> parse_counting_rule(std::string_view name) {
    if (name == "epsilon") {
        return CountingRule::Epsilon;
    }
    if (name == "scaled") {
        return CountingRule::Scaled;
    }
    return std::nullopt;
}

}  // namespace hrt::alloc
