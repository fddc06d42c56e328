// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "codetrans/util.hpp"
#include "codetrans/vocab.hpp"

namespace codetrans {

enum class CellKind { Gru, Lstm };
const char* cell_kind_name(CellKind kind);
CellKind cell_kind_from_name(const std::string& name);

struct ModelConfig {
    CellKind cell = CellKind::Gru;
    int layers = 1;
    int hidden_units = 64;
    int embedding_dim = 64;
    double learning_rate = 0.5;
    int max_steps = 5000;
    int batch_size = 16;
    std::vector<int> buckets = {25, 50, 100};  // sequence length bands, ascending

    int eval_interval = 50;   // steps between validation evaluations
    int lr_patience = 200;    // steps without validation improvement before halving
    double grad_clip = 5.0;   // global norm
    double init_scale = 0.08; // uniform init range
    std::uint64_t seed = 42;

    void validate() const;
};

// One recurrent cell; gates are packed row-blocks: GRU [update; reset;
// candidate] (3H rows), LSTM [input; forget; output; candidate] (4H rows).
struct CellParams {
    Eigen::MatrixXd w_in;   // gates*H × I
    Eigen::MatrixXd w_rec;  // gates*H × H
    Eigen::MatrixXd bias;   // gates*H × 1
};

// All trainable tensors. The same struct doubles as a gradient accumulator
// via zeros_like.
struct ModelParams {
    ModelConfig config;
    int vocab_size = 0;

    Eigen::MatrixXd embedding;  // V × E, shared by encoder and decoder

    std::vector<CellParams> encoder_fwd;  // per layer; layer 0 input E, rest 2H
    std::vector<CellParams> encoder_bwd;
    std::vector<CellParams> decoder;  // layer 0 input E, rest H

    std::vector<Eigen::MatrixXd> dec_init_w;  // per layer H × 2H
    std::vector<Eigen::MatrixXd> dec_init_b;  // H × 1

    Eigen::MatrixXd attn_w_state;  // H × H
    Eigen::MatrixXd attn_w_enc;    // H × 2H
    Eigen::MatrixXd attn_b;        // H × 1
    Eigen::MatrixXd attn_v;        // H × 1

    Eigen::MatrixXd combine_w;  // H × 3H, input [s_top; context]
    Eigen::MatrixXd combine_b;  // H × 1
    Eigen::MatrixXd out_w;      // V × H
    Eigen::MatrixXd out_b;      // V × 1

    static ModelParams init(const ModelConfig& config, int vocab_size, SplitMix64& rng);
    static ModelParams zeros_like(const ModelParams& other);

    // Stable-ordered named views over every tensor.
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> registry();
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> registry() const;

    double global_grad_norm() const;
    void check_finite() const;  // throws on NaN/Inf
};

// Bidirectional encoder states for one batch; columns are batch elements.
struct EncoderOutput {
    std::vector<Eigen::MatrixXd> states;     // per position t: 2H × B
    std::vector<Eigen::MatrixXd> attn_keys;  // per position t: H × B (precomputed)
    Eigen::MatrixXd mask;                    // n × B, 1 real / 0 padded
    std::vector<Eigen::MatrixXd> fwd_final;  // per layer H × B
    std::vector<Eigen::MatrixXd> bwd_final;  // per layer H × B
    int batch() const { return states.empty() ? 0 : static_cast<int>(states[0].cols()); }
    int length() const { return static_cast<int>(states.size()); }
};

struct DecoderState {
    std::vector<Eigen::MatrixXd> h;  // per layer H × B
    std::vector<Eigen::MatrixXd> c;  // per layer H × B, LSTM only
};

struct SeqPair {
    std::vector<int> src;  // am_b token indices
    std::vector<int> tgt;  // am_a token indices (no SOS/EOS)
};

// Runs the bidirectional encoder over a padded batch of sequences.
EncoderOutput encode(const ModelParams& params, const std::vector<std::vector<int>>& batch_src);
// Single-sequence convenience (batch of one).
EncoderOutput encode(const ModelParams& params, const std::vector<int>& src);

DecoderState initial_decoder_state(const ModelParams& params, const EncoderOutput& enc);

// Additive-score attention over the encoder states for decoder state s_top
// (H × B). Returns the context (2H × B) and the weights (n × B); weights are
// non-negative and sum to 1 per column.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attention_context(const ModelParams& params,
                                                              const Eigen::MatrixXd& s_top,
                                                              const EncoderOutput& enc);

// Advances the decoder one step for each column and returns log-probabilities
// over the vocabulary (V × B). PAD is masked to -inf when mask_pad is set
// (inference); the training loss path uses the full softmax.
Eigen::MatrixXd decode_step(const ModelParams& params, const std::vector<int>& prev_tokens,
                            DecoderState& state, const EncoderOutput& enc, bool mask_pad = true);

// Mean negative log likelihood over non-PAD target positions. The target of
// each sequence is tgt followed by EOS.
double loss(const ModelParams& params, const std::vector<SeqPair>& batch);

// Same forward as loss, plus full backpropagation; gradients are accumulated
// into grads (zeroed first).
double loss_and_gradients(const ModelParams& params, const std::vector<SeqPair>& batch,
                          ModelParams& grads);

}  // namespace codetrans
