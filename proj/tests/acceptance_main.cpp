// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one function per criterion, each printing a PASS/FAIL
// line. Run `acceptance` for everything or `acceptance N` for one criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "codetrans/beam.hpp"
#include "codetrans/dataset.hpp"
#include "codetrans/edit_script.hpp"
#include "codetrans/eval.hpp"
#include "codetrans/fixtures.hpp"
#include "codetrans/gradcheck.hpp"
#include "codetrans/pipeline.hpp"
#include "codetrans/train.hpp"
#include "codetrans/util.hpp"

using namespace codetrans;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> stripped(const std::string& source) {
    return token_texts(strip_nonsemantic(tokenize(source)));
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion1_round_trip() {
    fixtures::GenOptions opt;
    opt.pairs = 120;
    opt.seed = 101;
    auto pairs = fixtures::generate_pairs(opt);
    std::vector<std::string> methods = fixtures::handwritten_methods();
    for (const auto& p : pairs) {
        methods.push_back(p.before.source_text);
        methods.push_back(p.after.source_text);
    }
    if (methods.size() < 200)
        return {false, "fixture corpus too small: " + std::to_string(methods.size())};

    auto idioms = compute_idioms(pairs, 50);
    std::size_t failures = 0;
    for (const auto& m : methods) {
        IdMapping mapping;
        auto tokens = abstract_source(m, idioms, mapping);
        std::string rebuilt = concretize(tokens, mapping);
        if (stripped(rebuilt) != stripped(m)) ++failures;
    }
    return {failures == 0, std::to_string(methods.size()) + " methods, " +
                               std::to_string(failures) + " round-trip failures"};
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion2_shared_mapping() {
    fixtures::GenOptions opt;
    opt.pairs = 150;
    opt.seed = 202;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 50);
    if (pairs.size() < 100) return {false, "need 100 generated pairs"};

    std::size_t violations = 0;
    for (const auto& pair : pairs) {
        auto ap = abstract_pair(pair, idioms);
        auto before_texts = stripped(pair.before.source_text);
        auto after_texts = stripped(pair.after.source_text);

        std::map<std::string, std::string> b_id;  // concrete text -> ID in am_b
        for (std::size_t i = 0; i < ap.am_b.size(); ++i) {
            if (is_abstract_id(ap.am_b[i])) b_id[before_texts[i]] = ap.am_b[i];
        }
        for (std::size_t i = 0; i < ap.am_a.size(); ++i) {
            if (!is_abstract_id(ap.am_a[i])) continue;
            auto it = b_id.find(after_texts[i]);
            if (it != b_id.end() && it->second != ap.am_a[i]) ++violations;
        }

        // density: per category the suffixes are exactly 0..n-1
        std::map<int, std::set<int>> suffixes;
        for (const auto* side : {&ap.am_b, &ap.am_a}) {
            for (const auto& t : *side) {
                int number = -1;
                auto cat = parse_abstract_id(t, &number);
                if (cat) suffixes[int(*cat)].insert(number);
            }
        }
        for (const auto& [cat, numbers] : suffixes) {
            int expect = 0;
            for (int n : numbers) {
                if (n != expect++) ++violations;
            }
        }
    }
    return {violations == 0, std::to_string(pairs.size()) + " pairs, " +
                                 std::to_string(violations) + " violations"};
}

// ---------------------------------------------------------------- criterion 3
Outcome criterion3_vocabulary_reduction() {
    fixtures::GenOptions opt;
    opt.pairs = 500;
    opt.seed = 303;
    auto pairs = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(pairs, 50);
    auto stats = vocab_stats(pairs, idioms);

    std::size_t subset_violations = 0;
    for (const auto& pair : pairs) {
        auto ap = abstract_pair(pair, idioms);
        for (const auto* side : {&ap.am_b, &ap.am_a}) {
            for (const auto& t : *side) {
                bool ok = is_abstract_id(t) || idioms.contains(t) || is_java_keyword(t) ||
                          t == "true" || t == "false" || t == "null";
                if (!ok) {
                    // separators/operators: single token, neither identifier nor literal
                    auto toks = tokenize(t);
                    ok = toks.size() == 1 && (toks[0].kind == TokenKind::Separator ||
                                              toks[0].kind == TokenKind::Operator);
                }
                if (!ok) ++subset_violations;
            }
        }
    }

    bool reduced = stats.abstracted_vocab_size * 5 <= stats.raw_vocab_size;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "raw %zu -> abstracted %zu (%.1f%%), %zu subset violations",
                  stats.raw_vocab_size, stats.abstracted_vocab_size,
                  100.0 * stats.abstracted_vocab_size / stats.raw_vocab_size, subset_violations);
    return {reduced && subset_violations == 0, detail};
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion4_filtering() {
    auto make = [](std::vector<std::string> b, std::vector<std::string> a) {
        AbstractedPair p;
        p.am_b = std::move(b);
        p.am_a = std::move(a);
        return p;
    };
    IdiomList idioms;
    idioms.entries = {"size", "0"};
    idioms.counts = {10, 10};
    idioms.k = 2;
    idioms.rebuild_index();

    // twelve hand-built pairs with known expressibility
    std::vector<std::pair<AbstractedPair, bool>> labeled = {
        {make({"VAR_0", "=", "VAR_1", ";"}, {"VAR_1", "=", "VAR_0", ";"}), true},
        {make({"void", "METHOD_0", "(", ")", ";"}, {"void", "METHOD_0", "(", "STRING_3", ")", ";"}),
         false},
        {make({"return", "VAR_0", ";"}, {"return", "size", ";"}), true},
        {make({"VAR_0", ".", "METHOD_0", "(", ")", ";"},
              {"if", "(", "VAR_0", "!=", "null", ")", "{", "VAR_0", ".", "METHOD_0", "(", ")",
               ";", "}"}),
         true},
        {make({"return", "VAR_0", ";"}, {"return", "width", ";"}), false},
        {make({"return", "VAR_0", ";"}, {"return", "VAR_0", "+", "0", ";"}), true},
        {make({"int", "VAR_0", "=", "INT_0", ";", "return", "VAR_0", ";"},
              {"return", "INT_0", ";"}),
         true},
        {make({"return", "INT_0", ";"}, {"return", "INT_1", ";"}), false},
        {make({"void", "METHOD_0", "(", ")", "{", "}"},
              {"final", "void", "METHOD_0", "(", ")", "{", "}"}),
         true},
        {make({"STRING_0", ";"}, {"STRING_0", ";", "STRING_0", ";"}), true},
        {make({"STRING_0", ";"}, {"STRING_0", ";", "STRING_1", ";"}), false},
        {make({"if", "(", "VAR_0", ">=", "size", ")", "{", "return", "TYPE_0", ";", "}"},
              {"if", "(", "VAR_0", ">", "size", ")", "{", "return", "TYPE_0", ";", "}"}),
         true},
    };

    std::size_t errors = 0;
    for (const auto& [pair, expected] : labeled) {
        if (is_expressible(pair, idioms) != expected) ++errors;
    }

    // bucket boundary routing at 50 / 51 / 100 / 101 tokens
    auto sized = [&](std::size_t nb, std::size_t na) {
        return make(std::vector<std::string>(nb, ";"), std::vector<std::string>(na, ";"));
    };
    BucketedPairs buckets =
        bucket_by_size({sized(50, 10), sized(51, 10), sized(100, 10), sized(101, 10)});
    bool routing = buckets.small.size() == 1 && buckets.medium.size() == 2 &&
                   buckets.discarded == 1;

    return {errors == 0 && routing,
            std::to_string(labeled.size()) + " labeled pairs, " + std::to_string(errors) +
                " classification errors, boundary routing " + (routing ? "ok" : "wrong")};
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion5_gradient_check() {
    auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_spot;
    int variant = 0;
    for (CellKind cell : {CellKind::Gru, CellKind::Lstm}) {
        for (int layers : {1, 2}) {
            ModelConfig c;
            c.cell = cell;
            c.layers = layers;
            c.hidden_units = 8;
            c.embedding_dim = 8;
            SplitMix64 rng(500 + variant++);
            ModelParams params = ModelParams::init(c, 20, rng);
            std::vector<SeqPair> batch = {{{4, 9, 12, 5}, {6, 11, 7}},
                                          {{8, 15, 19}, {10, 4, 13, 14}}};
            auto result = gradient_check(params, batch);
            if (result.max_rel_error > worst) {
                worst = result.max_rel_error;
                worst_spot = std::string(cell_kind_name(cell)) + " L" +
                             std::to_string(layers) + " " + result.worst_tensor;
            }
        }
    }
    double elapsed = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "max rel error %.3g (%s), %.1f s", worst,
                  worst_spot.c_str(), elapsed);
    return {worst <= 1e-4 && elapsed < 60.0, detail};
}

// shared by criteria 6 and 7
Dataset dataset_from_pairs(const std::vector<MethodPair>& concrete, const IdiomList& idioms) {
    std::vector<AbstractedPair> abstracted;
    for (const auto& p : concrete) abstracted.push_back(abstract_pair(p, idioms));
    Dataset ds;
    ds.train = abstracted;
    ds.valid = abstracted;
    ds.test = abstracted;
    ds.name = "overfit";
    return ds;
}

// ---------------------------------------------------------------- criterion 6
Outcome criterion6_overfit() {
    auto start = std::chrono::steady_clock::now();
    fixtures::GenOptions opt;
    opt.pairs = 80;
    opt.seed = 606;
    opt.ambiguous_renames = false;
    auto generated = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(generated, 30);

    // keep 50 pairs with distinct abstract inputs so the mapping is a function
    std::vector<MethodPair> chosen;
    std::set<std::vector<std::string>> seen;
    for (const auto& p : generated) {
        auto ap = abstract_pair(p, idioms);
        if (seen.insert(ap.am_b).second) chosen.push_back(p);
        if (chosen.size() == 50) break;
    }
    if (chosen.size() != 50) return {false, "could not assemble 50 distinct pairs"};

    Dataset ds = dataset_from_pairs(chosen, idioms);

    // desk-scale configuration
    ModelConfig config;
    config.cell = CellKind::Gru;
    config.layers = 1;
    config.hidden_units = 64;
    config.embedding_dim = 64;
    config.batch_size = 16;
    config.learning_rate = 0.5;
    config.max_steps = 5000;
    config.eval_interval = 50;
    config.seed = 42;
    TrainResult result = train(config, ds, idioms, /*target_train_loss=*/0.02);

    auto batch = encode_pairs(result.checkpoint.vocab, ds.train);
    double final_nll = loss(result.checkpoint.params, batch);
    auto [count, pct] =
        perfect_predictions(result.checkpoint.params, result.checkpoint.vocab, ds.train, 1);
    double elapsed = seconds_since(start);

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "NLL %.4f after %d steps, train PP@1 %zu/50 (%.0f%%), %.0f s", final_nll,
                  result.steps_run, count, pct, elapsed);
    return {final_nll < 0.05 && count == 50 && result.steps_run <= 5000 && elapsed < 600.0,
            detail};
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion7_generalization() {
    auto start = std::chrono::steady_clock::now();
    fixtures::GenOptions opt;
    opt.pairs = 500;
    opt.seed = 707;
    opt.ambiguous_renames = true;
    auto generated = fixtures::generate_pairs(opt);
    auto idioms = compute_idioms(generated, 30);

    std::vector<AbstractedPair> abstracted;
    for (const auto& p : generated) abstracted.push_back(abstract_pair(p, idioms));
    auto kept = filter_unchanged(filter_expressible(abstracted, idioms));
    BucketedPairs buckets = bucket_by_size(kept);
    Dataset ds = dedup_split(buckets.small, 4242);
    ds.name = "generalization";

    ModelConfig config;
    config.cell = CellKind::Gru;
    config.layers = 1;
    config.hidden_units = 64;
    config.embedding_dim = 64;
    config.batch_size = 16;
    config.learning_rate = 1.0;
    config.max_steps = 5000;
    config.eval_interval = 100;
    config.lr_patience = 400;
    config.seed = 7;
    TrainResult result = train(config, ds, idioms, /*target_train_loss=*/0.01);

    auto [c1, p1] =
        perfect_predictions(result.checkpoint.params, result.checkpoint.vocab, ds.test, 1);
    auto [c10, p10] =
        perfect_predictions(result.checkpoint.params, result.checkpoint.vocab, ds.test, 10);
    double elapsed = seconds_since(start);

    char detail[240];
    std::snprintf(detail, sizeof(detail),
                  "%zu generated, splits %zu/%zu/%zu, PP@1 %zu (%.2f%%), PP@10 %zu (%.2f%%), "
                  "%d steps, %.0f s",
                  generated.size(), ds.train.size(), ds.valid.size(), ds.test.size(), c1, p1,
                  c10, p10, result.steps_run, elapsed);
    return {p10 >= 80.0 && c10 > c1 && elapsed < 1800.0, detail};
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion8_beam_correctness() {
    // hand-built 4-token-vocabulary model with a constant distribution
    ModelConfig c;
    c.hidden_units = 4;
    c.embedding_dim = 4;
    SplitMix64 rng(1);
    ModelParams params = ModelParams::init(c, 4, rng);
    for (auto& [name, tensor] : params.registry()) tensor->setZero();
    params.out_b(Vocabulary::kSos, 0) = std::log(0.3);
    params.out_b(Vocabulary::kEos, 0) = std::log(0.5);
    params.out_b(Vocabulary::kUnk, 0) = std::log(0.2);

    std::vector<int> src = {Vocabulary::kUnk, Vocabulary::kSos};

    auto rescore = [&](const std::vector<int>& tokens, bool add_eos) {
        EncoderOutput enc = encode(params, src);
        DecoderState state = initial_decoder_state(params, enc);
        double total = 0.0;
        int prev = Vocabulary::kSos;
        for (int tok : tokens) {
            auto logp = decode_step(params, {prev}, state, enc);
            total += logp(tok, 0);
            prev = tok;
        }
        if (add_eos) total += decode_step(params, {prev}, state, enc)(Vocabulary::kEos, 0);
        return total;
    };

    std::size_t mismatches = 0;
    double worst_gap = 0.0;
    for (int max_len = 1; max_len <= 4; ++max_len) {
        // enumerate all complete sequences
        struct Seq {
            std::vector<int> tokens;
            double lp;
        };
        std::vector<Seq> all;
        std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& prefix) {
            if (static_cast<int>(prefix.size()) < max_len) {
                all.push_back({prefix, rescore(prefix, true)});
            } else {
                all.push_back({prefix, rescore(prefix, false)});
                return;
            }
            for (int v : {Vocabulary::kSos, Vocabulary::kUnk}) {
                prefix.push_back(v);
                rec(prefix);
                prefix.pop_back();
            }
        };
        std::vector<int> prefix;
        rec(prefix);
        std::sort(all.begin(), all.end(), [](const Seq& a, const Seq& b) {
            if (a.lp != b.lp) return a.lp > b.lp;
            return a.tokens < b.tokens;
        });

        for (int k = 1; k <= 8; ++k) {
            auto beam = beam_search(params, src, k, max_len);
            std::size_t expect = std::min<std::size_t>(k, all.size());
            if (beam.size() != expect) {
                ++mismatches;
                continue;
            }
            for (std::size_t i = 0; i < expect; ++i) {
                if (beam[i].tokens != all[i].tokens) ++mismatches;
                worst_gap = std::max(worst_gap, std::abs(beam[i].log_prob - all[i].lp));
            }
        }
    }

    // k=1 equals greedy on 100 random models
    std::size_t greedy_mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ModelConfig rc;
        rc.hidden_units = 4;
        rc.embedding_dim = 4;
        SplitMix64 r2(8000 + trial);
        ModelParams rp = ModelParams::init(rc, 7, r2);
        std::vector<int> rsrc = {4 + trial % 3, 5, 6};
        auto beam = beam_search(rp, rsrc, 1, 6);
        auto greedy = greedy_decode(rp, rsrc, 6);
        if (beam.size() != 1 || beam[0].tokens != greedy.tokens ||
            std::abs(beam[0].log_prob - greedy.log_prob) > 1e-9)
            ++greedy_mismatches;
    }

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "%zu enumeration mismatches, score gap %.2g, %zu greedy mismatches",
                  mismatches, worst_gap, greedy_mismatches);
    return {mismatches == 0 && worst_gap <= 1e-6 && greedy_mismatches == 0, detail};
}

// ---------------------------------------------------------------- criterion 9
Outcome criterion9_edit_script() {
    // independent DP oracle (distance only)
    auto oracle = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
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
    };

    SplitMix64 rng(909);
    std::size_t failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::string> a, b;
        for (std::size_t i = 0, n = rng.next_below(21); i < n; ++i)
            a.push_back("t" + std::to_string(rng.next_below(6)));
        for (std::size_t i = 0, n = rng.next_below(21); i < n; ++i)
            b.push_back("t" + std::to_string(rng.next_below(6)));
        auto script = edit_script(a, b);
        if (script.size() != oracle(a, b)) ++failures;
        if (apply_edit_script(script, a) != b) ++failures;
    }
    return {failures == 0, "1000 random pairs, " + std::to_string(failures) + " failures"};
}

// --------------------------------------------------------------- criterion 10
Outcome criterion10_determinism() {
    auto run = [](const fs::path& workdir) {
        fs::remove_all(workdir);
        PipelineConfig cfg;
        cfg.workdir = workdir;
        cfg.fixture_pairs = 120;
        cfg.fixture_seed = 10;
        cfg.idiom_k = 30;
        cfg.data_seed = 42;
        cfg.model.hidden_units = 32;
        cfg.model.embedding_dim = 32;
        cfg.model.batch_size = 16;
        cfg.model.max_steps = 400;
        cfg.model.eval_interval = 50;
        cfg.model.learning_rate = 1.0;
        cfg.model.seed = 7;
        cfg.eval_threads = 2;
        for (const char* stage :
             {"gen-fixture", "ingest", "extract", "abstract", "build", "train", "eval"}) {
            run_stage(stage, cfg);
        }
        return cfg;
    };

    auto base = fs::temp_directory_path();
    PipelineConfig a = run(base / "codetrans_accept_det_a");
    PipelineConfig b = run(base / "codetrans_accept_det_b");

    std::size_t differing = 0;
    std::vector<std::string> checked;
    for (const char* rel :
         {"datasets/local_small/train.ndjson", "datasets/local_small/valid.ndjson",
          "datasets/local_small/test.ndjson", "datasets/local_small/manifest.json",
          "ckpt/train_log.csv", "report/report.csv"}) {
        if (read_file(a.workdir / rel) != read_file(b.workdir / rel)) {
            ++differing;
            checked.push_back(rel);
        }
    }
    fs::remove_all(a.workdir);
    fs::remove_all(b.workdir);
    std::string detail = "6 artifacts compared, " + std::to_string(differing) + " differ";
    for (const auto& f : checked) detail += " [" + f + "]";
    return {differing == 0, detail};
}

struct Criterion {
    int number;
    const char* title;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "abstraction round trip", criterion1_round_trip},
        {2, "shared-mapping property", criterion2_shared_mapping},
        {3, "vocabulary reduction", criterion3_vocabulary_reduction},
        {4, "filtering correctness", criterion4_filtering},
        {5, "gradient check", criterion5_gradient_check},
        {6, "overfit experiment", criterion6_overfit},
        {7, "generalization experiment", criterion7_generalization},
        {8, "beam correctness", criterion8_beam_correctness},
        {9, "edit-script oracle", criterion9_edit_script},
        {10, "end-to-end determinism", criterion10_determinism},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& criterion : criteria()) {
        if (only != 0 && criterion.number != only) continue;
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d: %s — %s\n", outcome.pass ? "PASS" : "FAIL",
                    criterion.number, criterion.title, outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
