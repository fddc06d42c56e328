// SPDX-License-Identifier: Apache-2.0
#include "codetrans/beam.hpp"

#include <algorithm>
#include <limits>

namespace codetrans {

using Eigen::MatrixXd;

namespace {

// Replicates a single-sequence encoding across B columns so one decode_step
// advances every hypothesis at once.
EncoderOutput tile_encoding(const EncoderOutput& enc, int b) {
    EncoderOutput out;
    auto tile = [b](const MatrixXd& m) {
        MatrixXd t(m.rows(), b);
        for (int i = 0; i < b; ++i) t.col(i) = m.col(0);
        return t;
    };
    out.states.reserve(enc.states.size());
    out.attn_keys.reserve(enc.attn_keys.size());
    for (const auto& s : enc.states) out.states.push_back(tile(s));
    for (const auto& k : enc.attn_keys) out.attn_keys.push_back(tile(k));
    out.mask = MatrixXd(enc.mask.rows(), b);
    for (int i = 0; i < b; ++i) out.mask.col(i) = enc.mask.col(0);
    for (const auto& f : enc.fwd_final) out.fwd_final.push_back(tile(f));
    for (const auto& f : enc.bwd_final) out.bwd_final.push_back(tile(f));
    return out;
}

DecoderState gather_states(const std::vector<const Hypothesis*>& hyps, int hidden, int layers) {
    DecoderState st;
    int b = static_cast<int>(hyps.size());
    for (int l = 0; l < layers; ++l) {
        MatrixXd h(hidden, b), c(hidden, b);
        for (int i = 0; i < b; ++i) {
            h.col(i) = hyps[i]->state.h[l].col(0);
            c.col(i) = hyps[i]->state.c[l].col(0);
        }
        st.h.push_back(std::move(h));
        st.c.push_back(std::move(c));
    }
    return st;
}

DecoderState extract_column(const DecoderState& st, int col) {
    DecoderState out;
    for (const auto& h : st.h) out.h.push_back(h.col(col));
    for (const auto& c : st.c) out.c.push_back(c.col(col));
    return out;
}

bool candidate_before(const DecodedSequence& a, const DecodedSequence& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.tokens < b.tokens;
}

struct Candidate {
    double log_prob = 0.0;
    int parent = -1;                 // live-hypothesis column; -1 = carried finished
    int token = -1;                  // appended token; kEos finishes the parent
    const Hypothesis* carried = nullptr;
    const std::vector<int>* parent_tokens = nullptr;

    bool finishes() const { return carried != nullptr || token == Vocabulary::kEos; }
    std::size_t content_len() const {
        return parent_tokens->size() + (carried == nullptr && token != Vocabulary::kEos ? 1 : 0);
    }
    int content_at(std::size_t i) const {
        return i < parent_tokens->size() ? (*parent_tokens)[i] : token;
    }
};

// Order: score descending, then content tokens lexicographically ascending,
// finished before live on a full tie.
bool candidate_order(const Candidate& a, const Candidate& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    std::size_t la = a.content_len(), lb = b.content_len();
    std::size_t n = std::min(la, lb);
    for (std::size_t i = 0; i < n; ++i) {
        int av = a.content_at(i), bv = b.content_at(i);
        if (av != bv) return av < bv;
    }
    if (la != lb) return la < lb;
    if (a.finishes() != b.finishes()) return a.finishes();
    return false;
}

}  // namespace

int default_max_len(int input_len) { return std::min(2 * input_len + 10, 120); }

std::vector<DecodedSequence> beam_search(const ModelParams& params, const std::vector<int>& src,
                                         int k, int max_len, const BeamOptions& opts) {
    if (src.empty()) throw std::invalid_argument("beam_search: empty input");
    if (k < 1 || max_len < 1) throw std::invalid_argument("beam_search: k and max_len must be >= 1");

    const int hidden = params.config.hidden_units;
    const int layers = params.config.layers;

    EncoderOutput enc1 = encode(params, src);
    std::vector<Hypothesis> beam(1);
    beam[0].state = initial_decoder_state(params, enc1);

    std::vector<EncoderOutput> tiles;  // tiles[b-1] = encoding tiled to width b
    auto tiled = [&](int b) -> const EncoderOutput& {
        while (static_cast<int>(tiles.size()) < b) {
            tiles.push_back(tile_encoding(enc1, static_cast<int>(tiles.size()) + 1));
        }
        return tiles[b - 1];
    };

    for (int step = 0; step < max_len; ++step) {
        std::vector<const Hypothesis*> live;
        std::vector<const Hypothesis*> done;
        for (const auto& h : beam) (h.finished ? done : live).push_back(&h);
        if (live.empty()) break;

        std::vector<int> prev(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            prev[i] = live[i]->tokens.empty() ? Vocabulary::kSos : live[i]->tokens.back();
        }
        DecoderState st = gather_states(live, hidden, layers);
        MatrixXd logp = decode_step(params, prev, st, tiled(static_cast<int>(live.size())));

        // k * |V| expansions of the live set, plus carried finished ones.
        std::vector<Candidate> candidates;
        candidates.reserve(live.size() * params.vocab_size + done.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            for (int v = 0; v < params.vocab_size; ++v) {
                if (v == Vocabulary::kPad) continue;
                Candidate c;
                c.log_prob = live[i]->log_prob + logp(v, static_cast<int>(i));
                c.parent = static_cast<int>(i);
                c.token = v;
                c.parent_tokens = &live[i]->tokens;
                candidates.push_back(c);
            }
        }
        for (const auto* h : done) {
            Candidate c;
            c.log_prob = h->log_prob;
            c.carried = h;
            c.parent_tokens = &h->tokens;
            candidates.push_back(c);
        }

        std::size_t keep = std::min<std::size_t>(k, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                          candidate_order);
        candidates.resize(keep);

        std::vector<Hypothesis> next;
        next.reserve(keep);
        bool all_finished = true;
        for (const Candidate& c : candidates) {
            Hypothesis h;
            if (c.carried) {
                h = *c.carried;
            } else {
                h.tokens = *c.parent_tokens;
                h.log_prob = c.log_prob;
                if (c.token == Vocabulary::kEos) {
                    h.finished = true;
                } else {
                    h.tokens.push_back(c.token);
                    h.state = extract_column(st, c.parent);
                }
            }
            if (!h.finished) all_finished = false;
            next.push_back(std::move(h));
        }
        beam = std::move(next);
        if (all_finished) break;
    }

    std::vector<DecodedSequence> results;
    results.reserve(beam.size());
    for (const auto& h : beam) {
        DecodedSequence seq;
        seq.tokens = h.tokens;
        seq.log_prob = h.log_prob;
        if (opts.length_normalize && !h.tokens.empty()) {
            seq.log_prob = h.log_prob / static_cast<double>(h.tokens.size() + 1);
        }
        seq.finished = h.finished;
        results.push_back(std::move(seq));
    }
    std::sort(results.begin(), results.end(), candidate_before);
    return results;
}

DecodedSequence greedy_decode(const ModelParams& params, const std::vector<int>& src,
                              int max_len) {
    if (src.empty()) throw std::invalid_argument("greedy_decode: empty input");
    EncoderOutput enc = encode(params, src);
    DecoderState state = initial_decoder_state(params, enc);
    DecodedSequence out;
    int prev = Vocabulary::kSos;
    for (int step = 0; step < max_len; ++step) {
        MatrixXd logp = decode_step(params, {prev}, state, enc);
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int v = 0; v < params.vocab_size; ++v) {
            if (v == Vocabulary::kPad) continue;
            if (logp(v, 0) > best_score) {
                best_score = logp(v, 0);
                best = v;
            }
        }
        out.log_prob += best_score;
        if (best == Vocabulary::kEos) {
            out.finished = true;
            break;
        }
        out.tokens.push_back(best);
        prev = best;
    }
    return out;
}

std::vector<TranslateCandidate> translate(const ModelParams& params, const Vocabulary& vocab,
                                          const IdiomList& idioms,
                                          const std::string& method_source, int k,
                                          std::size_t* dropped) {
    IdMapping mapping;
    std::vector<std::string> am_b = abstract_source(method_source, idioms, mapping);
    if (am_b.empty()) throw UserError("input method has no tokens");
    std::vector<int> src = vocab.encode(am_b);

    auto sequences = beam_search(params, src, k, default_max_len(static_cast<int>(src.size())));
    std::vector<TranslateCandidate> out;
    std::size_t failures = 0;
    for (const auto& seq : sequences) {
        TranslateCandidate cand;
        cand.tokens = vocab.decode(seq.tokens);
        cand.log_prob = seq.log_prob;
        try {
            cand.source = concretize(cand.tokens, mapping);
        } catch (const ConcretizeError&) {
            ++failures;
            continue;
        }
        out.push_back(std::move(cand));
    }
    if (dropped) *dropped = failures;
    return out;
}

}  // namespace codetrans
