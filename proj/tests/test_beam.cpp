// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "codetrans/beam.hpp"
#include "codetrans/train.hpp"

using namespace codetrans;

namespace {

ModelParams toy_params(int vocab, std::uint64_t seed, bool random = true) {
    ModelConfig c;
    c.hidden_units = 4;
    c.embedding_dim = 4;
    SplitMix64 rng(seed);
    ModelParams p = ModelParams::init(c, vocab, rng);
    if (!random) {
        for (auto& [name, tensor] : p.registry()) tensor->setZero();
    }
    return p;
}

// Hand-built 4-token-vocabulary model: zero weights, so each step's
// distribution is the output bias alone. Emittable tokens are SOS, EOS and
// UNK with fixed probabilities 0.3 / 0.5 / 0.2.
ModelParams constant_model() {
    ModelParams p = toy_params(4, 0, false);
    p.out_b(Vocabulary::kSos, 0) = std::log(0.3);
    p.out_b(Vocabulary::kEos, 0) = std::log(0.5);
    p.out_b(Vocabulary::kUnk, 0) = std::log(0.2);
    return p;
}

// Independent oracle: enumerate every complete sequence (EOS-terminated with
// at most max_len-1 content tokens, or truncated at exactly max_len), score
// each by replaying decode_step, sort by (score desc, tokens lex asc).
struct OracleSeq {
    std::vector<int> tokens;
    double log_prob;
};

double rescore(const ModelParams& params, const std::vector<int>& src,
               const std::vector<int>& tokens, bool add_eos) {
    EncoderOutput enc = encode(params, src);
    DecoderState state = initial_decoder_state(params, enc);
    double total = 0.0;
    int prev = Vocabulary::kSos;
    for (int tok : tokens) {
        auto logp = decode_step(params, {prev}, state, enc);
        total += logp(tok, 0);
        prev = tok;
    }
    if (add_eos) {
        auto logp = decode_step(params, {prev}, state, enc);
        total += logp(Vocabulary::kEos, 0);
    }
    return total;
}

std::vector<OracleSeq> enumerate_all(const ModelParams& params, const std::vector<int>& src,
                                     int max_len) {
    std::vector<OracleSeq> out;
    std::vector<int> emittable;
    for (int v = 0; v < params.vocab_size; ++v) {
        if (v != Vocabulary::kPad && v != Vocabulary::kEos) emittable.push_back(v);
    }
    // content strings of length L < max_len end with EOS; length == max_len truncates
    std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& prefix) {
        if (static_cast<int>(prefix.size()) < max_len) {
            out.push_back({prefix, rescore(params, src, prefix, true)});
        } else {
            out.push_back({prefix, rescore(params, src, prefix, false)});
            return;
        }
        for (int v : emittable) {
            prefix.push_back(v);
            rec(prefix);
            prefix.pop_back();
        }
    };
    std::vector<int> prefix;
    rec(prefix);
    std::sort(out.begin(), out.end(), [](const OracleSeq& a, const OracleSeq& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        return a.tokens < b.tokens;
    });
    return out;
}

}  // namespace

TEST_CASE("beam equals exhaustive enumeration on the hand-built model") {
    ModelParams params = constant_model();
    std::vector<int> src = {Vocabulary::kUnk, Vocabulary::kSos};
    for (int max_len = 1; max_len <= 4; ++max_len) {
        auto oracle = enumerate_all(params, src, max_len);
        for (int k = 1; k <= 8; ++k) {
            auto beam = beam_search(params, src, k, max_len);
            std::size_t expect = std::min<std::size_t>(k, oracle.size());
            CAPTURE(max_len);
            CAPTURE(k);
            REQUIRE(beam.size() == expect);
            for (std::size_t i = 0; i < expect; ++i) {
                CHECK(beam[i].tokens == oracle[i].tokens);
                CHECK(std::abs(beam[i].log_prob - oracle[i].log_prob) <= 1e-6);
            }
        }
    }
}

TEST_CASE("beam k=1 equals greedy decoding on 100 random models") {
    for (int trial = 0; trial < 100; ++trial) {
        ModelParams params = toy_params(7, 1000 + trial);
        std::vector<int> src = {4 + trial % 3, 5, 6};
        int max_len = 6;
        auto beam = beam_search(params, src, 1, max_len);
        auto greedy = greedy_decode(params, src, max_len);
        REQUIRE(beam.size() == 1);
        CAPTURE(trial);
        CHECK(beam[0].tokens == greedy.tokens);
        CHECK(beam[0].log_prob == doctest::Approx(greedy.log_prob).epsilon(1e-12));
        CHECK(beam[0].finished == greedy.finished);
    }
}

TEST_CASE("returned scores are exact sums under independent re-scoring") {
    for (int trial = 0; trial < 10; ++trial) {
        ModelParams params = toy_params(8, 2000 + trial);
        std::vector<int> src = {4, 5, 6, 7};
        auto beam = beam_search(params, src, 5, 8);
        for (const auto& seq : beam) {
            double rescored = rescore(params, src, seq.tokens, seq.finished);
            CHECK(std::abs(rescored - seq.log_prob) <= 1e-5);
        }
    }
}

TEST_CASE("results are distinct and strictly ordered") {
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams params = toy_params(9, 3000 + trial);
        std::vector<int> src = {4, 8, 5};
        auto beam = beam_search(params, src, 6, 7);
        std::set<std::vector<int>> seen;
        for (const auto& seq : beam) CHECK(seen.insert(seq.tokens).second);
        for (std::size_t i = 1; i < beam.size(); ++i) {
            bool ordered = beam[i - 1].log_prob > beam[i].log_prob ||
                           (beam[i - 1].log_prob == beam[i].log_prob &&
                            beam[i - 1].tokens < beam[i].tokens);
            CHECK(ordered);
        }
    }
}

TEST_CASE("equal-score hypotheses order lexicographically") {
    // make SOS and UNK equally likely; EOS too
    ModelParams params = toy_params(4, 0, false);
    auto beam = beam_search(params, {Vocabulary::kUnk}, 3, 1);
    // all three length-1 outcomes tie at log(1/3)
    REQUIRE(beam.size() == 3);
    CHECK(beam[0].tokens.empty());  // EOS first: empty content sorts lowest
    CHECK(beam[1].tokens == std::vector<int>{Vocabulary::kSos});
    CHECK(beam[2].tokens == std::vector<int>{Vocabulary::kUnk});
    CHECK(beam[0].log_prob == doctest::Approx(std::log(1.0 / 3)).epsilon(1e-12));
}

TEST_CASE("invalid arguments are rejected") {
    ModelParams params = toy_params(5, 1);
    CHECK_THROWS_AS(beam_search(params, {}, 3, 5), std::invalid_argument);
    CHECK_THROWS_AS(beam_search(params, {4}, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(beam_search(params, {4}, 1, 0), std::invalid_argument);
}

TEST_CASE("default decode budget") {
    CHECK(default_max_len(10) == 30);
    CHECK(default_max_len(60) == 120);  // capped
}

TEST_CASE("length normalization only rescales reported scores") {
    ModelParams params = constant_model();
    BeamOptions opts;
    opts.length_normalize = true;
    auto plain = beam_search(params, {Vocabulary::kUnk}, 4, 3);
    auto normed = beam_search(params, {Vocabulary::kUnk}, 4, 3, opts);
    REQUIRE(plain.size() == normed.size());
    for (const auto& seq : normed) {
        for (const auto& p : plain) {
            if (p.tokens == seq.tokens && !seq.tokens.empty()) {
                CHECK(seq.log_prob ==
                      doctest::Approx(p.log_prob / (seq.tokens.size() + 1)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("translate: candidates with unmapped IDs are dropped and counted") {
    // vocabulary containing an ID the input never maps: VAR_9
    Vocabulary vocab({"void", "f", "(", ")", "{", "}", "VAR_9", "METHOD_0", "VAR_0", ";"});
    ModelConfig c;
    c.hidden_units = 4;
    c.embedding_dim = 4;
    SplitMix64 rng(5);
    ModelParams params = ModelParams::init(c, vocab.size(), rng);
    for (auto& [name, tensor] : params.registry()) tensor->setZero();
    params.out_b(vocab.index_of("VAR_9"), 0) = 8.0;  // model happily hallucinates VAR_9
    params.out_b(Vocabulary::kEos, 0) = 4.0;

    std::size_t dropped = 0;
    auto candidates = translate(params, vocab, IdiomList{}, "void f() { }", 3, &dropped);
    CHECK(dropped > 0);
    for (const auto& cand : candidates) {
        CHECK(std::find(cand.tokens.begin(), cand.tokens.end(), "VAR_9") == cand.tokens.end());
    }
}

TEST_CASE("translate produces at most k distinct candidates") {
    ModelParams params = toy_params(6, 8);
    Vocabulary vocab({"void", "x"});
    std::size_t dropped = 0;
    auto candidates = translate(params, vocab, IdiomList{}, "void x() { }", 10, &dropped);
    CHECK(candidates.size() + dropped <= 10);
    std::set<std::vector<std::string>> token_lists;
    for (const auto& cand : candidates) CHECK(token_lists.insert(cand.tokens).second);
}
