// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "codetrans/dataset.hpp"
#include "codetrans/model.hpp"
#include "codetrans/vocab.hpp"

namespace codetrans {

struct EvalRow {
    int k = 0;
    std::size_t perfect = 0;         // abstract-level exact matches
    double pct = 0.0;                // 100 * perfect / test_size, 2 decimals
    std::size_t concrete = 0;        // matches that also concretize cleanly
    std::size_t concretize_failures = 0;
};

struct EvalReport {
    std::string dataset_name;
    std::string bucket;
    std::size_t test_size = 0;
    std::string config_digest;
    std::vector<EvalRow> rows;
};

// Counts test pairs for which some beam candidate equals am_a token-for-token
// (the decoded candidate texts against the abstracted target). Evaluation is
// per-instance parallel with an ordered reduction.
std::pair<std::size_t, double> perfect_predictions(const ModelParams& params,
                                                   const Vocabulary& vocab,
                                                   const std::vector<AbstractedPair>& test_set,
                                                   int k, unsigned nthreads = 0);

EvalReport evaluate(const ModelParams& params, const Vocabulary& vocab, const Dataset& dataset,
                    const std::vector<int>& ks = {1, 5, 10}, unsigned nthreads = 0);

// Fixed-width text table; errors on an empty report.
std::string render_report_text(const EvalReport& report);
// CSV schema: dataset,bucket,k,count,size,pct
std::string render_report_csv(const EvalReport& report);

double round_pct(std::size_t count, std::size_t size);

}  // namespace codetrans
