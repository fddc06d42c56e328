// SPDX-License-Identifier: Apache-2.0
#include "codetrans/eval.hpp"

#include <cmath>
#include <cstdio>

#include "codetrans/beam.hpp"
#include "codetrans/train.hpp"
#include "codetrans/util.hpp"

namespace codetrans {

double round_pct(std::size_t count, std::size_t size) {
    if (size == 0) return 0.0;
    double pct = 100.0 * static_cast<double>(count) / static_cast<double>(size);
    return std::round(pct * 100.0) / 100.0;
}

namespace {

struct InstanceResult {
    bool abstract_match = false;
    bool concrete_match = false;
    bool concretize_failed = false;
};

InstanceResult evaluate_instance(const ModelParams& params, const Vocabulary& vocab,
                                 const AbstractedPair& pair, int k) {
    InstanceResult res;
    std::vector<int> src = vocab.encode(pair.am_b);
    int max_len = default_max_len(static_cast<int>(src.size()));
    auto sequences = beam_search(params, src, k, max_len);
    for (const auto& seq : sequences) {
        std::vector<std::string> texts = vocab.decode(seq.tokens);
        if (texts == pair.am_a) {
            res.abstract_match = true;
            try {
                concretize(texts, pair.mapping);
                res.concrete_match = true;
            } catch (const ConcretizeError&) {
                res.concretize_failed = true;
            }
            break;
        }
    }
    return res;
}

}  // namespace

std::pair<std::size_t, double> perfect_predictions(const ModelParams& params,
                                                   const Vocabulary& vocab,
                                                   const std::vector<AbstractedPair>& test_set,
                                                   int k, unsigned nthreads) {
    if (test_set.empty()) throw UserError("empty test set");
    std::vector<InstanceResult> results(test_set.size());
    parallel_for(test_set.size(), nthreads, [&](std::size_t i) {
        results[i] = evaluate_instance(params, vocab, test_set[i], k);
    });
    std::size_t count = 0;
    for (const auto& r : results) count += r.abstract_match ? 1 : 0;
    return {count, round_pct(count, test_set.size())};
}

EvalReport evaluate(const ModelParams& params, const Vocabulary& vocab, const Dataset& dataset,
                    const std::vector<int>& ks, unsigned nthreads) {
    if (dataset.test.empty()) throw UserError("dataset has an empty test split");
    EvalReport report;
    report.dataset_name = dataset.name.empty() ? "dataset" : dataset.name;
    report.bucket = bucket_name(dataset.bucket);
    report.test_size = dataset.test.size();
    report.config_digest = fnv1a64_hex(model_config_to_json(params.config));

    for (int k : ks) {
        std::vector<InstanceResult> results(dataset.test.size());
        parallel_for(dataset.test.size(), nthreads, [&](std::size_t i) {
            results[i] = evaluate_instance(params, vocab, dataset.test[i], k);
        });
        EvalRow row;
        row.k = k;
        for (const auto& r : results) {
            row.perfect += r.abstract_match ? 1 : 0;
            row.concrete += r.concrete_match ? 1 : 0;
            row.concretize_failures += r.concretize_failed ? 1 : 0;
        }
        row.pct = round_pct(row.perfect, report.test_size);
        report.rows.push_back(row);
    }
    return report;
}

std::string render_report_text(const EvalReport& report) {
    if (report.rows.empty()) throw UserError("empty evaluation report");
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "Perfect predictions: %s (%s), test size %zu\n",
                  report.dataset_name.c_str(), report.bucket.c_str(), report.test_size);
    out += buf;
    std::snprintf(buf, sizeof(buf), "config digest: %s\n", report.config_digest.c_str());
    out += buf;
    out += "  beam   perfect       pct   concrete   conc_failures\n";
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "  %4d   %7zu   %6.2f%%   %8zu   %13zu\n", row.k,
                      row.perfect, row.pct, row.concrete, row.concretize_failures);
        out += buf;
    }
    return out;
}

std::string render_report_csv(const EvalReport& report) {
    if (report.rows.empty()) throw UserError("empty evaluation report");
    std::string out = "dataset,bucket,k,count,size,pct\n";
    char buf[256];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%d,%zu,%zu,%.2f\n", report.dataset_name.c_str(),
                      report.bucket.c_str(), row.k, row.perfect, report.test_size, row.pct);
        out += buf;
    }
    return out;
}

}  // namespace codetrans
