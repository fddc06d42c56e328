// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "codetrans/abstraction.hpp"
#include "codetrans/dataset.hpp"
#include "codetrans/model.hpp"

namespace codetrans {

// Best-validation parameter snapshot plus everything inference needs: the
// vocabulary the indices refer to and the idiom list used for abstraction.
struct Checkpoint {
    ModelParams params;
    int step = 0;
    double validation_loss = 0.0;
    Vocabulary vocab;
    IdiomList idioms;
};

struct TrainLogEntry {
    int step = 0;
    double train_loss = 0.0;
    double valid_loss = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainLogEntry> log;
    int steps_run = 0;
};

// Seeded SGD training with bucketing and padding, gradient clipping at
// config.grad_clip, learning-rate halving when validation stalls, and
// checkpoint selection at minimum validation loss. Deterministic given the
// seed. Throws on divergence (non-finite loss).
//
// target_train_loss > 0 stops early once a minibatch loss drops below it.
TrainResult train(const ModelConfig& config, const Dataset& dataset, const IdiomList& idioms,
                  double target_train_loss = 0.0,
                  const std::function<void(const TrainLogEntry&)>& progress = {});

// Encodes abstracted pairs with the vocabulary.
std::vector<SeqPair> encode_pairs(const Vocabulary& vocab,
                                  const std::vector<AbstractedPair>& pairs);

std::string train_log_csv(const std::vector<TrainLogEntry>& log);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ModelConfig <-> JSON (used by the checkpoint header and the CLI).
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& json_text);

}  // namespace codetrans
