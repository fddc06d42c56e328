// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "codetrans/dataset.hpp"
#include "codetrans/model.hpp"

namespace codetrans {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything the staged pipeline needs; populated from the CLI (flags,
// config file, environment overrides).
struct PipelineConfig {
    std::filesystem::path workdir = "work";

    // mine / ingest
    std::string server_url;
    std::string project = "default";
    std::filesystem::path corpus_root;  // local pre/post tree

    // abstraction & dataset
    int idiom_k = 300;
    SizeBucket bucket = SizeBucket::Small;
    std::uint64_t data_seed = 42;
    std::string dataset_name = "local";

    ModelConfig model;
    double target_train_loss = 0.0;

    // fixture generation
    std::size_t fixture_pairs = 500;
    std::uint64_t fixture_seed = 7;

    std::vector<int> eval_ks = {1, 5, 10};
    unsigned eval_threads = 0;
    std::filesystem::path checkpoint_override;  // explicit --ckpt

    std::filesystem::path corpus_dir() const { return workdir / "corpus"; }
    std::filesystem::path pairs_file() const { return corpus_dir() / "pairs.ndjson"; }
    std::filesystem::path method_pairs_file() const {
        return corpus_dir() / "method_pairs.ndjson";
    }
    std::filesystem::path abstracted_file() const { return corpus_dir() / "abstracted.ndjson"; }
    std::filesystem::path idioms_file() const { return corpus_dir() / "idioms.txt"; }
    std::filesystem::path dataset_dir() const {
        return workdir / "datasets" / (dataset_name + "_" + bucket_name(bucket));
    }
    std::filesystem::path checkpoint_file() const {
        return checkpoint_override.empty() ? workdir / "ckpt" / "model.ckpt"
                                           : checkpoint_override;
    }
    std::filesystem::path train_log_file() const { return workdir / "ckpt" / "train_log.csv"; }
    std::filesystem::path report_dir() const { return workdir / "report"; }
    std::filesystem::path manifest_file() const { return workdir / "run_manifest.ndjson"; }
    std::filesystem::path default_fixture_root() const { return workdir / "fixture_corpus"; }
};

// Runs one named stage (gen-fixture, mine, ingest, extract, abstract, build,
// train, eval, stats). Checks prerequisites with actionable errors, writes
// outputs atomically, and appends a manifest record with input/output
// digests, the stage seed, and the tool version.
void run_stage(const std::string& stage, PipelineConfig& config,
               const std::function<void(const std::string&)>& log = {});

const std::vector<std::string>& pipeline_stages();

}  // namespace codetrans
