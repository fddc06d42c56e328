// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "codetrans/abstraction.hpp"
#include "codetrans/model.hpp"
#include "codetrans/vocab.hpp"

namespace codetrans {

// A partial or complete decode: token indices (SOS and the terminating EOS
// excluded), cumulative log-probability over every emitted step (the EOS
// step included), and the recurrent state needed to extend it.
struct Hypothesis {
    std::vector<int> tokens;
    double log_prob = 0.0;
    DecoderState state;
    bool finished = false;
};

struct BeamOptions {
    bool length_normalize = false;  // plain probability ranking by default
};

struct DecodedSequence {
    std::vector<int> tokens;
    double log_prob = 0.0;
    bool finished = false;  // EOS emitted (false = truncated at max_len)
};

// Default decode budget: 2x input length + 10, capped at 120.
int default_max_len(int input_len);

// Keeps the k most probable hypotheses per step, expanding each live one
// over the whole vocabulary (PAD masked). Finished hypotheses hold beam
// slots until k finished exist or max_len is reached. Results are sorted by
// (log_prob desc, tokens lexicographic asc) and are all distinct; k = 1
// reproduces greedy decoding exactly.
std::vector<DecodedSequence> beam_search(const ModelParams& params, const std::vector<int>& src,
                                         int k, int max_len, const BeamOptions& opts = {});

// Argmax decoding, ties to the lowest token index.
DecodedSequence greedy_decode(const ModelParams& params, const std::vector<int>& src,
                              int max_len);

struct TranslateCandidate {
    std::string source;               // concretized, pretty-printed
    std::vector<std::string> tokens;  // abstracted token texts
    double log_prob = 0.0;
};

// Full inference for one concrete method: abstract, beam-decode, concretize
// each candidate. Candidates whose concretization hits an unmapped ID are
// dropped (counted in *dropped), preserving order.
std::vector<TranslateCandidate> translate(const ModelParams& params, const Vocabulary& vocab,
                                          const IdiomList& idioms,
                                          const std::string& method_source, int k,
                                          std::size_t* dropped = nullptr);

}  // namespace codetrans
