// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "codetrans/edit_script.hpp"
#include "codetrans/util.hpp"

using namespace codetrans;

namespace {

// Independent Levenshtein oracle: distance only, plain DP, written separately
// from the backtracing implementation it checks.
unsigned oracle_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<unsigned> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<unsigned>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<unsigned>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            unsigned sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> random_tokens(SplitMix64& rng, std::size_t max_len,
                                       int alphabet_size) {
    std::size_t len = rng.next_below(max_len + 1);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back("t" + std::to_string(rng.next_below(alphabet_size)));
    }
    return out;
}

}  // namespace

TEST_CASE("identical lists produce an empty script") {
    std::vector<std::string> v = {"a", "b", "c"};
    CHECK(edit_script(v, v).empty());
}

TEST_CASE("single replace") {
    std::vector<std::string> before = {"a", "b", "c"};
    std::vector<std::string> after = {"a", "x", "c"};
    auto script = edit_script(before, after);
    REQUIRE(script.size() == 1);
    CHECK(script[0].kind == EditKind::Replace);
    CHECK(script[0].position == 1);
    CHECK(script[0].before_tokens == std::vector<std::string>{"b"});
    CHECK(script[0].after_tokens == std::vector<std::string>{"x"});
}

TEST_CASE("pure insert and pure delete") {
    std::vector<std::string> shorter = {"a", "c"};
    std::vector<std::string> longer = {"a", "b", "c"};
    auto ins = edit_script(shorter, longer);
    REQUIRE(ins.size() == 1);
    CHECK(ins[0].kind == EditKind::Insert);
    CHECK(apply_edit_script(ins, shorter) == longer);

    auto del = edit_script(longer, shorter);
    REQUIRE(del.size() == 1);
    CHECK(del[0].kind == EditKind::Delete);
    CHECK(apply_edit_script(del, longer) == shorter);
}

TEST_CASE("replace preferred over insert+delete on equal cost") {
    std::vector<std::string> before = {"a"};
    std::vector<std::string> after = {"b"};
    auto script = edit_script(before, after);
    REQUIRE(script.size() == 1);
    CHECK(script[0].kind == EditKind::Replace);
}

TEST_CASE("script length equals oracle distance and round-trips, 1000 random pairs") {
    SplitMix64 rng(20240811);
    for (int trial = 0; trial < 1000; ++trial) {
        auto before = random_tokens(rng, 20, 5);
        auto after = random_tokens(rng, 20, 5);
        auto script = edit_script(before, after);
        CAPTURE(trial);
        CHECK(script.size() == oracle_distance(before, after));
        CHECK(apply_edit_script(script, before) == after);
    }
}

TEST_CASE("determinism: same input gives identical scripts") {
    SplitMix64 rng(7);
    auto before = random_tokens(rng, 15, 4);
    auto after = random_tokens(rng, 15, 4);
    auto s1 = edit_script(before, after);
    auto s2 = edit_script(before, after);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].kind == s2[i].kind);
        CHECK(s1[i].position == s2[i].position);
        CHECK(s1[i].before_tokens == s2[i].before_tokens);
        CHECK(s1[i].after_tokens == s2[i].after_tokens);
    }
}

TEST_CASE("empty edge cases") {
    std::vector<std::string> empty;
    std::vector<std::string> abc = {"a", "b", "c"};
    CHECK(edit_script(empty, empty).empty());
    auto grow = edit_script(empty, abc);
    CHECK(grow.size() == 3);
    CHECK(apply_edit_script(grow, empty) == abc);
    auto shrink = edit_script(abc, empty);
    CHECK(shrink.size() == 3);
    CHECK(apply_edit_script(shrink, abc) == empty);
}
