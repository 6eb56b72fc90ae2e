#include "doctest.h"

#include "hrt/alloc/candidates.hpp"
#include "oracle.hpp"

using namespace hrt::alloc;

TEST_CASE("candidate counts") {
    CHECK(CandidateSet({"w1", "w2", "w3"}, 2).size() == 6);
    CHECK(CandidateSet({"w1"}, 2).size() == 1);
    std::vector<std::string> twenty;
    for (int i = 1; i <= 20; ++i) {
        twenty.push_back("w" + std::to_string(i));
    }
    CHECK(CandidateSet(twenty, 2).size() == 20 * 21 / 2);
    CHECK(CandidateSet(twenty, 1).size() == 20);
}

TEST_CASE("candidate order and membership vectors") {
    CandidateSet set({"w1", "w2", "w3"}, 2);
    std::vector<std::string> ids;
    for (const auto& c : set.all()) {
        ids.push_back(c.id);
    }
    CHECK(ids == std::vector<std::string>{"w1", "w2", "w3", "w1+w2", "w1+w3", "w2+w3"});
    CHECK(set[4].eta == std::vector<std::uint8_t>{1, 0, 1});
    CHECK(set[0].eta == std::vector<std::uint8_t>{1, 0, 0});
    CHECK(set[5].members == std::vector<std::size_t>{1, 2});
    CHECK(set[5].is_collaboration());
    CHECK_FALSE(set[1].is_collaboration());
    CHECK(set[3].contains(1));
    CHECK_FALSE(set[3].contains(2));
    for (const auto& c : set.all()) {
        int ones = 0;
        for (auto e : c.eta) {
            ones += e;
        }
        CHECK(ones == static_cast<int>(c.size()));
    }
}

TEST_CASE("candidate lookup ignores member order") {
    CandidateSet set({"h", "r"}, 2);
    CHECK(set.find("h+r") == set.find("r+h"));
    CHECK(set.find("h+r").value() == 2);
    CHECK_FALSE(set.find("x").has_value());
    std::vector<std::size_t> members{0, 1};
    CHECK(set.find_members(members) == 2);
    CHECK(split_candidate_id("h+r") == std::vector<std::string>{"h", "r"});
    CHECK(split_candidate_id("h") == std::vector<std::string>{"h"});
    std::vector<std::string> names{"a", "b"};
    CHECK(collaboration_id(names) == "a+b");
}

TEST_CASE("three-member candidates") {
    CandidateSet set({"a", "b", "c", "d"}, 3);
    CHECK(set.size() == 4 + 6 + 4);
    CHECK(set[set.size() - 1].id == "b+c+d");
}

TEST_CASE("scaled counting weight") {
    CHECK(theta(2, 1, 3) == 1);
    CHECK(theta(1, 5, 3) == 1);
    CHECK(theta(1, 1, 1) == 1);
    for (int n = 2; n <= 6; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int l = n; l <= n + 2; ++l) {
                CHECK(theta(k, l, n) == k);
            }
        }
    }
}

TEST_CASE("counting weights agree with the floor formula") {
    for (auto rule : {CountingRule::Epsilon, CountingRule::Scaled}) {
        for (int n = 1; n <= 8; ++n) {
            for (int l = 1; l <= 9; ++l) {
                for (int k = 1; k <= std::max(1, n); ++k) {
                    CAPTURE(n);
                    CAPTURE(l);
                    CAPTURE(k);
                    CHECK(theta(rule, k, l, n) == oracle::counting_weight(rule, k, l, n));
                }
            }
        }
    }
}

TEST_CASE("epsilon counting weight") {
    CHECK(theta_epsilon(2, 3, 3) == 1);
    CHECK(theta_epsilon(3, 3, 3) == 2);
    CHECK(theta_epsilon(2, 1, 3) == 1);
    CHECK(theta_epsilon(2, 4, 4) == 1);
    CHECK(theta_epsilon(1, 9, 9) == 1);
    CHECK(theta(CountingRule::Scaled, 2, 3, 3) == 2);
    CHECK(parse_counting_rule("epsilon") == CountingRule::Epsilon);
    CHECK(parse_counting_rule("scaled") == CountingRule::Scaled);
    CHECK_FALSE(parse_counting_rule("other").has_value());
    CHECK(to_string(CountingRule::Scaled) == "scaled");
}
