// SPDX-License-Identifier: Apache-2.0
#include "codetrans/model.hpp"

#include <algorithm>
#include <cmath>

namespace codetrans {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

const char* cell_kind_name(CellKind kind) { return kind == CellKind::Gru ? "gru" : "lstm"; }

CellKind cell_kind_from_name(const std::string& name) {
    if (name == "gru") return CellKind::Gru;
    if (name == "lstm") return CellKind::Lstm;
    throw UserError("unknown cell kind: " + name + " (expected gru or lstm)");
}

void ModelConfig::validate() const {
    if (layers < 1) throw UserError("layers must be >= 1");
    if (hidden_units < 1 || embedding_dim < 1) throw UserError("model dims must be positive");
    if (batch_size < 1) throw UserError("batch_size must be positive");
    if (max_steps < 1) throw UserError("max_steps must be positive");
    if (learning_rate < 0) throw UserError("learning_rate must not be negative");
    if (!std::is_sorted(buckets.begin(), buckets.end()))
        throw UserError("buckets must be ascending");
}

namespace {

int gate_count(CellKind kind) { return kind == CellKind::Gru ? 3 : 4; }

MatrixXd sigmoid(const MatrixXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

MatrixXd uniform_matrix(int rows, int cols, double scale, SplitMix64& rng) {
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = (rng.next_double() * 2.0 - 1.0) * scale;
    return m;
}

CellParams init_cell(CellKind kind, int input_dim, int hidden, double scale, SplitMix64& rng) {
    CellParams cp;
    int g = gate_count(kind);
    cp.w_in = uniform_matrix(g * hidden, input_dim, scale, rng);
    cp.w_rec = uniform_matrix(g * hidden, hidden, scale, rng);
    cp.bias = MatrixXd::Zero(g * hidden, 1);
    if (kind == CellKind::Lstm) {
        // forget-gate bias starts at 1 so early training does not wash out state
        cp.bias.block(hidden, 0, hidden, 1).setOnes();
    }
    return cp;
}

// Per-step cell cache for backpropagation.
struct StepCache {
    MatrixXd x, h_prev, c_prev;
    MatrixXd z, r, g, rh;            // GRU
    MatrixXd i, f, o, gc, c_cell, tc;  // LSTM
    MatrixXd h_cell;
    RowVectorXd mask;  // size 0 = unmasked step
};

void cell_forward(const CellParams& cp, CellKind kind, int hidden, const MatrixXd& x,
                  const MatrixXd& h_prev, const MatrixXd& c_prev, const RowVectorXd* mask,
                  MatrixXd& h_out, MatrixXd& c_out, StepCache* cache) {
    const int B = static_cast<int>(x.cols());
    MatrixXd pre = cp.w_in * x;
    pre.colwise() += VectorXd(cp.bias.col(0));
    MatrixXd h_cell, c_cell;

    if (kind == CellKind::Gru) {
        MatrixXd rec = cp.w_rec.topRows(2 * hidden) * h_prev;
        MatrixXd z = sigmoid(pre.topRows(hidden) + rec.topRows(hidden));
        MatrixXd r = sigmoid(pre.middleRows(hidden, hidden) + rec.bottomRows(hidden));
        MatrixXd rh = (r.array() * h_prev.array()).matrix();
        MatrixXd g =
            (pre.bottomRows(hidden) + cp.w_rec.bottomRows(hidden) * rh).array().tanh().matrix();
        h_cell = (z.array() * h_prev.array() + (1.0 - z.array()) * g.array()).matrix();
        c_cell = MatrixXd::Zero(hidden, B);
        if (cache) {
            cache->z = std::move(z);
            cache->r = std::move(r);
            cache->rh = std::move(rh);
            cache->g = std::move(g);
        }
    } else {
        MatrixXd a = pre + cp.w_rec * h_prev;
        MatrixXd i = sigmoid(a.topRows(hidden));
        MatrixXd f = sigmoid(a.middleRows(hidden, hidden));
        MatrixXd o = sigmoid(a.middleRows(2 * hidden, hidden));
        MatrixXd gc = a.bottomRows(hidden).array().tanh().matrix();
        c_cell = (f.array() * c_prev.array() + i.array() * gc.array()).matrix();
        MatrixXd tc = c_cell.array().tanh().matrix();
        h_cell = (o.array() * tc.array()).matrix();
        if (cache) {
            cache->i = std::move(i);
            cache->f = std::move(f);
            cache->o = std::move(o);
            cache->gc = std::move(gc);
            cache->c_cell = c_cell;
            cache->tc = std::move(tc);
        }
    }

    if (mask) {
        // Carry the previous state through padded positions.
        h_out = (h_cell.array().rowwise() * mask->array() +
                 h_prev.array().rowwise() * (1.0 - mask->array()))
                    .matrix();
        c_out = (c_cell.array().rowwise() * mask->array() +
                 c_prev.array().rowwise() * (1.0 - mask->array()))
                    .matrix();
    } else {
        h_out = h_cell;
        c_out = c_cell;
    }

    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->c_prev = c_prev;
        cache->h_cell = std::move(h_cell);
        cache->mask = mask ? *mask : RowVectorXd();
    }
}

void cell_backward(const CellParams& cp, CellKind kind, int hidden, const StepCache& cache,
                   const MatrixXd& dh_out, const MatrixXd& dc_out, CellParams& dcp,
                   MatrixXd& dh_prev, MatrixXd& dc_prev, MatrixXd& dx) {
    MatrixXd dh_cell = dh_out;
    MatrixXd dc_cell = dc_out;
    MatrixXd carry_h = MatrixXd::Zero(dh_out.rows(), dh_out.cols());
    MatrixXd carry_c = carry_h;
    if (cache.mask.size() > 0) {
        dh_cell = (dh_out.array().rowwise() * cache.mask.array()).matrix();
        carry_h = (dh_out.array().rowwise() * (1.0 - cache.mask.array())).matrix();
        dc_cell = (dc_out.array().rowwise() * cache.mask.array()).matrix();
        carry_c = (dc_out.array().rowwise() * (1.0 - cache.mask.array())).matrix();
    }

    if (kind == CellKind::Gru) {
        const auto& z = cache.z;
        const auto& r = cache.r;
        const auto& g = cache.g;
        MatrixXd dz = (dh_cell.array() * (cache.h_prev.array() - g.array())).matrix();
        MatrixXd dg = (dh_cell.array() * (1.0 - z.array())).matrix();
        MatrixXd dh_acc = (dh_cell.array() * z.array()).matrix();

        MatrixXd dag = (dg.array() * (1.0 - g.array().square())).matrix();
        MatrixXd drh = cp.w_rec.bottomRows(hidden).transpose() * dag;
        MatrixXd dr = (drh.array() * cache.h_prev.array()).matrix();
        dh_acc += (drh.array() * r.array()).matrix();

        MatrixXd daz = (dz.array() * z.array() * (1.0 - z.array())).matrix();
        MatrixXd dar = (dr.array() * r.array() * (1.0 - r.array())).matrix();

        MatrixXd da(3 * hidden, dh_out.cols());
        da.topRows(hidden) = daz;
        da.middleRows(hidden, hidden) = dar;
        da.bottomRows(hidden) = dag;

        dh_acc += cp.w_rec.topRows(hidden).transpose() * daz;
        dh_acc += cp.w_rec.middleRows(hidden, hidden).transpose() * dar;

        dx = cp.w_in.transpose() * da;
        dcp.w_in += da * cache.x.transpose();
        dcp.w_rec.topRows(2 * hidden) += da.topRows(2 * hidden) * cache.h_prev.transpose();
        dcp.w_rec.bottomRows(hidden) += dag * cache.rh.transpose();
        dcp.bias += da.rowwise().sum();

        dh_prev = dh_acc + carry_h;
        dc_prev = carry_c;
    } else {
        const auto& i = cache.i;
        const auto& f = cache.f;
        const auto& o = cache.o;
        const auto& gc = cache.gc;
        const auto& tc = cache.tc;
        MatrixXd do_ = (dh_cell.array() * tc.array()).matrix();
        MatrixXd dct =
            dc_cell + (dh_cell.array() * o.array() * (1.0 - tc.array().square())).matrix();
        MatrixXd di = (dct.array() * gc.array()).matrix();
        MatrixXd df = (dct.array() * cache.c_prev.array()).matrix();
        MatrixXd dgc = (dct.array() * i.array()).matrix();
        dc_prev = (dct.array() * f.array()).matrix() + carry_c;

        MatrixXd da(4 * hidden, dh_out.cols());
        da.topRows(hidden) = (di.array() * i.array() * (1.0 - i.array())).matrix();
        da.middleRows(hidden, hidden) = (df.array() * f.array() * (1.0 - f.array())).matrix();
        da.middleRows(2 * hidden, hidden) =
            (do_.array() * o.array() * (1.0 - o.array())).matrix();
        da.bottomRows(hidden) = (dgc.array() * (1.0 - gc.array().square())).matrix();

        dh_prev = cp.w_rec.transpose() * da + carry_h;
        dx = cp.w_in.transpose() * da;
        dcp.w_in += da * cache.x.transpose();
        dcp.w_rec += da * cache.h_prev.transpose();
        dcp.bias += da.rowwise().sum();
    }
}

MatrixXd log_softmax_cols(const MatrixXd& logits) {
    MatrixXd out = logits;
    for (int b = 0; b < out.cols(); ++b) {
        double mx = out.col(b).maxCoeff();
        out.col(b).array() -= mx;
        double lse = std::log(out.col(b).array().exp().sum());
        out.col(b).array() -= lse;
    }
    return out;
}

struct DirTrace {
    std::vector<StepCache> caches;  // indexed by position t
    std::vector<MatrixXd> h;        // h[t] = state after position t was processed
    MatrixXd final_h, final_c;
};

struct EncTrace {
    std::vector<MatrixXd> emb;                     // per t: E × B
    std::vector<std::vector<MatrixXd>> layer_out;  // per layer, per t: 2H × B
    std::vector<DirTrace> fwd, bwd;                // per layer
};

// Runs the full bidirectional encoder. src_steps[t][b] is the token at
// position t of batch column b (PAD at padded slots).
EncoderOutput encoder_forward(const ModelParams& p, const std::vector<std::vector<int>>& src_steps,
                              const MatrixXd& mask, EncTrace* trace) {
    const int n = static_cast<int>(src_steps.size());
    const int B = static_cast<int>(src_steps[0].size());
    const int H = p.config.hidden_units;
    const int L = p.config.layers;
    const CellKind kind = p.config.cell;

    EncoderOutput enc;
    enc.mask = mask;
    if (trace) {
        trace->fwd.resize(L);
        trace->bwd.resize(L);
        trace->layer_out.resize(L);
    }

    std::vector<MatrixXd> inputs(n);
    for (int t = 0; t < n; ++t) {
        MatrixXd x(p.config.embedding_dim, B);
        for (int b = 0; b < B; ++b) x.col(b) = p.embedding.row(src_steps[t][b]).transpose();
        inputs[t] = std::move(x);
    }
    if (trace) trace->emb = inputs;

    for (int layer = 0; layer < L; ++layer) {
        DirTrace fwd, bwd;
        fwd.caches.resize(n);
        fwd.h.resize(n);
        bwd.caches.resize(n);
        bwd.h.resize(n);

        MatrixXd h = MatrixXd::Zero(H, B), c = MatrixXd::Zero(H, B);
        for (int t = 0; t < n; ++t) {
            RowVectorXd m = mask.row(t);
            MatrixXd h_new, c_new;
            cell_forward(p.encoder_fwd[layer], kind, H, inputs[t], h, c, &m, h_new, c_new,
                         trace ? &fwd.caches[t] : nullptr);
            h = std::move(h_new);
            c = std::move(c_new);
            fwd.h[t] = h;
        }
        fwd.final_h = h;
        fwd.final_c = c;

        h.setZero();
        c.setZero();
        for (int t = n - 1; t >= 0; --t) {
            RowVectorXd m = mask.row(t);
            MatrixXd h_new, c_new;
            cell_forward(p.encoder_bwd[layer], kind, H, inputs[t], h, c, &m, h_new, c_new,
                         trace ? &bwd.caches[t] : nullptr);
            h = std::move(h_new);
            c = std::move(c_new);
            bwd.h[t] = h;
        }
        bwd.final_h = h;
        bwd.final_c = c;

        std::vector<MatrixXd> outputs(n);
        for (int t = 0; t < n; ++t) {
            MatrixXd o(2 * H, B);
            o.topRows(H) = fwd.h[t];
            o.bottomRows(H) = bwd.h[t];
            outputs[t] = std::move(o);
        }
        enc.fwd_final.push_back(fwd.final_h);
        enc.bwd_final.push_back(bwd.final_h);
        if (trace) {
            trace->fwd[layer] = std::move(fwd);
            trace->bwd[layer] = std::move(bwd);
            trace->layer_out[layer] = outputs;
        }
        inputs = std::move(outputs);
    }

    enc.states = std::move(inputs);
    enc.attn_keys.resize(n);
    for (int t = 0; t < n; ++t) {
        MatrixXd k = p.attn_w_enc * enc.states[t];
        k.colwise() += VectorXd(p.attn_b.col(0));
        enc.attn_keys[t] = std::move(k);
    }
    return enc;
}

struct AttnResult {
    MatrixXd q;        // H × B
    MatrixXd weights;  // n × B
    MatrixXd ctx;      // 2H × B
};

AttnResult attention_forward(const ModelParams& p, const MatrixXd& s_top,
                             const EncoderOutput& enc) {
    const int n = enc.length();
    const int B = static_cast<int>(s_top.cols());
    AttnResult res;
    res.q = p.attn_w_state * s_top;
    MatrixXd scores(n, B);
    for (int t = 0; t < n; ++t) {
        MatrixXd tt = (enc.attn_keys[t] + res.q).array().tanh().matrix();
        scores.row(t) = p.attn_v.col(0).transpose() * tt;
    }
    // Padded positions never receive attention mass.
    scores = (scores.array() * enc.mask.array() - 1e30 * (1.0 - enc.mask.array())).matrix();
    MatrixXd weights(n, B);
    for (int b = 0; b < B; ++b) {
        double mx = scores.col(b).maxCoeff();
        VectorXd e = (scores.col(b).array() - mx).exp();
        weights.col(b) = e / e.sum();
    }
    MatrixXd ctx = MatrixXd::Zero(2 * p.config.hidden_units, B);
    for (int t = 0; t < n; ++t) {
        ctx += (enc.states[t].array().rowwise() * weights.row(t).array()).matrix();
    }
    res.weights = std::move(weights);
    res.ctx = std::move(ctx);
    return res;
}

struct DecodeStepTrace {
    std::vector<StepCache> cells;  // per layer
    AttnResult attn;
    MatrixXd s_top;
    MatrixXd comb_in;  // 3H × B = [s_top; ctx]
    MatrixXd u;        // H × B (tanh applied)
    MatrixXd probs;    // V × B
    std::vector<int> inputs;   // prev tokens per column
    std::vector<int> targets;  // -1 = inactive column at this step
};

// One decoder step shared by training and inference; returns logits.
MatrixXd decode_forward(const ModelParams& p, const std::vector<int>& prev_tokens,
                        DecoderState& state, const EncoderOutput& enc, DecodeStepTrace* trace) {
    const int B = static_cast<int>(prev_tokens.size());
    const int H = p.config.hidden_units;
    const int L = p.config.layers;

    MatrixXd x(p.config.embedding_dim, B);
    for (int b = 0; b < B; ++b) x.col(b) = p.embedding.row(prev_tokens[b]).transpose();

    if (trace) trace->cells.resize(L);
    MatrixXd input = std::move(x);
    for (int layer = 0; layer < L; ++layer) {
        MatrixXd h_new, c_new;
        cell_forward(p.decoder[layer], p.config.cell, H, input, state.h[layer], state.c[layer],
                     nullptr, h_new, c_new, trace ? &trace->cells[layer] : nullptr);
        state.h[layer] = h_new;
        state.c[layer] = std::move(c_new);
        input = std::move(h_new);  // feed upward
    }
    const MatrixXd& s_top = state.h[L - 1];

    AttnResult attn = attention_forward(p, s_top, enc);

    MatrixXd comb_in(3 * H, B);
    comb_in.topRows(H) = s_top;
    comb_in.bottomRows(2 * H) = attn.ctx;
    MatrixXd u_pre = p.combine_w * comb_in;
    u_pre.colwise() += VectorXd(p.combine_b.col(0));
    MatrixXd u = u_pre.array().tanh().matrix();

    MatrixXd logits = p.out_w * u;
    logits.colwise() += VectorXd(p.out_b.col(0));

    if (trace) {
        trace->attn = std::move(attn);
        trace->s_top = s_top;
        trace->comb_in = std::move(comb_in);
        trace->u = std::move(u);
        trace->inputs = prev_tokens;
    }
    return logits;
}

struct PaddedBatch {
    std::vector<std::vector<int>> src_steps;  // n × B
    MatrixXd src_mask;                        // n × B
    std::vector<std::vector<int>> dec_inputs;   // m × B
    std::vector<std::vector<int>> dec_targets;  // m × B, -1 inactive
    int n = 0, m = 0, batch = 0, active_targets = 0;
};

PaddedBatch pad_batch(const std::vector<SeqPair>& batch, int vocab_size) {
    if (batch.empty()) throw UserError("empty batch");
    PaddedBatch pb;
    pb.batch = static_cast<int>(batch.size());
    for (const auto& ex : batch) {
        if (ex.src.empty()) throw std::invalid_argument("empty source sequence");
        for (int v : ex.src)
            if (v < 0 || v >= vocab_size) throw std::invalid_argument("token index out of range");
        for (int v : ex.tgt)
            if (v < 0 || v >= vocab_size) throw std::invalid_argument("token index out of range");
        pb.n = std::max(pb.n, static_cast<int>(ex.src.size()));
        pb.m = std::max(pb.m, static_cast<int>(ex.tgt.size()) + 1);  // +1 for EOS
    }
    pb.src_steps.assign(pb.n, std::vector<int>(pb.batch, Vocabulary::kPad));
    pb.src_mask = MatrixXd::Zero(pb.n, pb.batch);
    pb.dec_inputs.assign(pb.m, std::vector<int>(pb.batch, Vocabulary::kPad));
    pb.dec_targets.assign(pb.m, std::vector<int>(pb.batch, -1));
    for (int b = 0; b < pb.batch; ++b) {
        const auto& ex = batch[b];
        for (std::size_t t = 0; t < ex.src.size(); ++t) {
            pb.src_steps[t][b] = ex.src[t];
            pb.src_mask(static_cast<int>(t), b) = 1.0;
        }
        int tlen = static_cast<int>(ex.tgt.size());
        for (int t = 0; t <= tlen; ++t) {
            pb.dec_inputs[t][b] = t == 0 ? Vocabulary::kSos : ex.tgt[t - 1];
            pb.dec_targets[t][b] = t < tlen ? ex.tgt[t] : Vocabulary::kEos;
            ++pb.active_targets;
        }
    }
    return pb;
}

// Forward pass and optional full backward pass over one padded batch.
double loss_impl(const ModelParams& p, const std::vector<SeqPair>& batch, ModelParams* grads) {
    const int H = p.config.hidden_units;
    const int L = p.config.layers;
    const CellKind kind = p.config.cell;
    PaddedBatch pb = pad_batch(batch, p.vocab_size);
    const int B = pb.batch;

    EncTrace enc_trace;
    EncoderOutput enc = encoder_forward(p, pb.src_steps, pb.src_mask, grads ? &enc_trace : nullptr);

    // Decoder initial states: per-layer tanh projection of the encoder finals.
    DecoderState state;
    std::vector<MatrixXd> init_in(L), init_s0(L);
    for (int layer = 0; layer < L; ++layer) {
        MatrixXd cat(2 * H, B);
        cat.topRows(H) = enc.fwd_final[layer];
        cat.bottomRows(H) = enc.bwd_final[layer];
        MatrixXd pre = p.dec_init_w[layer] * cat;
        pre.colwise() += VectorXd(p.dec_init_b[layer].col(0));
        MatrixXd s0 = pre.array().tanh().matrix();
        init_in[layer] = std::move(cat);
        init_s0[layer] = s0;
        state.h.push_back(std::move(s0));
        state.c.push_back(MatrixXd::Zero(H, B));
    }

    double total_nll = 0.0;
    std::vector<DecodeStepTrace> steps(grads ? pb.m : 0);
    for (int t = 0; t < pb.m; ++t) {
        DecodeStepTrace* tr = grads ? &steps[t] : nullptr;
        MatrixXd logits = decode_forward(p, pb.dec_inputs[t], state, enc, tr);
        MatrixXd logp = log_softmax_cols(logits);
        for (int b = 0; b < B; ++b) {
            int target = pb.dec_targets[t][b];
            if (target >= 0) total_nll -= logp(target, b);
        }
        if (grads) {
            tr->probs = logp.array().exp().matrix();
            tr->targets = pb.dec_targets[t];
        }
    }
    double mean_nll = total_nll / pb.active_targets;
    if (!grads) return mean_nll;

    // ---- backward ----
    ModelParams& g = *grads;
    const double inv_n = 1.0 / pb.active_targets;
    const int n = pb.n;

    std::vector<MatrixXd> denc_states(n, MatrixXd::Zero(2 * H, B));
    std::vector<MatrixXd> dkeys(n, MatrixXd::Zero(H, B));
    std::vector<MatrixXd> dcarry_h(L, MatrixXd::Zero(H, B));
    std::vector<MatrixXd> dcarry_c(L, MatrixXd::Zero(H, B));

    for (int t = pb.m - 1; t >= 0; --t) {
        const DecodeStepTrace& tr = steps[t];

        MatrixXd dlogits = tr.probs;
        for (int b = 0; b < B; ++b) {
            int target = tr.targets[b];
            if (target >= 0) {
                dlogits(target, b) -= 1.0;
                dlogits.col(b) *= inv_n;
            } else {
                dlogits.col(b).setZero();
            }
        }

        g.out_w += dlogits * tr.u.transpose();
        g.out_b += dlogits.rowwise().sum();
        MatrixXd du = p.out_w.transpose() * dlogits;
        MatrixXd du_pre = (du.array() * (1.0 - tr.u.array().square())).matrix();
        g.combine_w += du_pre * tr.comb_in.transpose();
        g.combine_b += du_pre.rowwise().sum();
        MatrixXd dcomb_in = p.combine_w.transpose() * du_pre;
        MatrixXd ds_top = dcomb_in.topRows(H);
        MatrixXd dctx = dcomb_in.bottomRows(2 * H);

        // attention backward
        const AttnResult& at = tr.attn;
        MatrixXd da(n, B);
        for (int tt = 0; tt < n; ++tt) {
            da.row(tt) = (enc.states[tt].array() * dctx.array()).colwise().sum();
            denc_states[tt] += (dctx.array().rowwise() * at.weights.row(tt).array()).matrix();
        }
        RowVectorXd dot = (at.weights.array() * da.array()).colwise().sum();
        MatrixXd de = (at.weights.array() * (da.array().rowwise() - dot.array())).matrix();
        MatrixXd dq = MatrixXd::Zero(H, B);
        for (int tt = 0; tt < n; ++tt) {
            MatrixXd tanh_t = (enc.attn_keys[tt] + at.q).array().tanh().matrix();
            MatrixXd dtanh = p.attn_v.col(0) * de.row(tt);
            MatrixXd dpre = (dtanh.array() * (1.0 - tanh_t.array().square())).matrix();
            g.attn_v += tanh_t * de.row(tt).transpose();
            dkeys[tt] += dpre;
            dq += dpre;
        }
        g.attn_w_state += dq * tr.s_top.transpose();
        ds_top += p.attn_w_state.transpose() * dq;

        // cells, top layer downward
        MatrixXd dh_cur = ds_top + dcarry_h[L - 1];
        MatrixXd dx_above;
        for (int layer = L - 1; layer >= 0; --layer) {
            if (layer < L - 1) dh_cur = dcarry_h[layer] + dx_above;
            MatrixXd dh_prev, dc_prev, dx;
            cell_backward(p.decoder[layer], kind, H, tr.cells[layer], dh_cur, dcarry_c[layer],
                          g.decoder[layer], dh_prev, dc_prev, dx);
            dcarry_h[layer] = std::move(dh_prev);
            dcarry_c[layer] = std::move(dc_prev);
            dx_above = std::move(dx);
        }
        for (int b = 0; b < B; ++b) {
            g.embedding.row(tr.inputs[b]) += dx_above.col(b).transpose();
        }
    }

    // initial-state projections
    std::vector<MatrixXd> dfwd_final(L), dbwd_final(L);
    for (int layer = 0; layer < L; ++layer) {
        MatrixXd ds0 = dcarry_h[layer];
        MatrixXd dpre = (ds0.array() * (1.0 - init_s0[layer].array().square())).matrix();
        g.dec_init_w[layer] += dpre * init_in[layer].transpose();
        g.dec_init_b[layer] += dpre.rowwise().sum();
        MatrixXd dcat = p.dec_init_w[layer].transpose() * dpre;
        dfwd_final[layer] = dcat.topRows(H);
        dbwd_final[layer] = dcat.bottomRows(H);
    }

    // attention keys fold into the top-layer encoder states
    for (int t = 0; t < n; ++t) {
        g.attn_w_enc += dkeys[t] * enc.states[t].transpose();
        g.attn_b += dkeys[t].rowwise().sum();
        denc_states[t] += p.attn_w_enc.transpose() * dkeys[t];
    }

    // encoder backward, top layer downward
    std::vector<MatrixXd> dlayer_out = std::move(denc_states);
    for (int layer = L - 1; layer >= 0; --layer) {
        std::vector<MatrixXd> dinputs(n, MatrixXd::Zero(
            layer == 0 ? p.config.embedding_dim : 2 * H, B));

        // forward direction: reverse of processing order (t descending)
        MatrixXd dh = dfwd_final[layer];
        MatrixXd dc = MatrixXd::Zero(H, B);
        for (int t = n - 1; t >= 0; --t) {
            MatrixXd dh_t = dh + dlayer_out[t].topRows(H);
            MatrixXd dh_prev, dc_prev, dx;
            cell_backward(p.encoder_fwd[layer], kind, H, enc_trace.fwd[layer].caches[t], dh_t, dc,
                          g.encoder_fwd[layer], dh_prev, dc_prev, dx);
            dh = std::move(dh_prev);
            dc = std::move(dc_prev);
            dinputs[t] += dx;
        }

        // backward direction: processed t = n-1..0, so BPTT runs t ascending
        dh = dbwd_final[layer];
        dc.setZero();
        for (int t = 0; t < n; ++t) {
            MatrixXd dh_t = dh + dlayer_out[t].bottomRows(H);
            MatrixXd dh_prev, dc_prev, dx;
            cell_backward(p.encoder_bwd[layer], kind, H, enc_trace.bwd[layer].caches[t], dh_t, dc,
                          g.encoder_bwd[layer], dh_prev, dc_prev, dx);
            dh = std::move(dh_prev);
            dc = std::move(dc_prev);
            dinputs[t] += dx;
        }

        if (layer == 0) {
            for (int t = 0; t < n; ++t) {
                for (int b = 0; b < B; ++b) {
                    g.embedding.row(pb.src_steps[t][b]) += dinputs[t].col(b).transpose();
                }
            }
        } else {
            dlayer_out = std::move(dinputs);
        }
    }

    return mean_nll;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, int vocab_size, SplitMix64& rng) {
    config.validate();
    if (vocab_size < 4) throw UserError("vocabulary too small");
    ModelParams p;
    p.config = config;
    p.vocab_size = vocab_size;
    const int H = config.hidden_units;
    const int E = config.embedding_dim;
    const double s = config.init_scale;

    p.embedding = uniform_matrix(vocab_size, E, s, rng);
    for (int layer = 0; layer < config.layers; ++layer) {
        int enc_in = layer == 0 ? E : 2 * H;
        int dec_in = layer == 0 ? E : H;
        p.encoder_fwd.push_back(init_cell(config.cell, enc_in, H, s, rng));
        p.encoder_bwd.push_back(init_cell(config.cell, enc_in, H, s, rng));
        p.decoder.push_back(init_cell(config.cell, dec_in, H, s, rng));
        p.dec_init_w.push_back(uniform_matrix(H, 2 * H, s, rng));
        p.dec_init_b.push_back(Eigen::MatrixXd::Zero(H, 1));
    }
    p.attn_w_state = uniform_matrix(H, H, s, rng);
    p.attn_w_enc = uniform_matrix(H, 2 * H, s, rng);
    p.attn_b = Eigen::MatrixXd::Zero(H, 1);
    p.attn_v = uniform_matrix(H, 1, s, rng);
    p.combine_w = uniform_matrix(H, 3 * H, s, rng);
    p.combine_b = Eigen::MatrixXd::Zero(H, 1);
    p.out_w = uniform_matrix(vocab_size, H, s, rng);
    p.out_b = Eigen::MatrixXd::Zero(vocab_size, 1);
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    ModelParams p = other;
    for (auto& [name, tensor] : p.registry()) tensor->setZero();
    return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> ModelParams::registry() {
    std::vector<std::pair<std::string, Eigen::MatrixXd*>> r;
    r.emplace_back("embedding", &embedding);
    auto add_cell = [&r](const std::string& prefix, CellParams& cp) {
        r.emplace_back(prefix + ".w_in", &cp.w_in);
        r.emplace_back(prefix + ".w_rec", &cp.w_rec);
        r.emplace_back(prefix + ".bias", &cp.bias);
    };
    for (std::size_t l = 0; l < encoder_fwd.size(); ++l) {
        add_cell("enc_fwd" + std::to_string(l), encoder_fwd[l]);
        add_cell("enc_bwd" + std::to_string(l), encoder_bwd[l]);
        add_cell("dec" + std::to_string(l), decoder[l]);
        r.emplace_back("dec_init_w" + std::to_string(l), &dec_init_w[l]);
        r.emplace_back("dec_init_b" + std::to_string(l), &dec_init_b[l]);
    }
    r.emplace_back("attn_w_state", &attn_w_state);
    r.emplace_back("attn_w_enc", &attn_w_enc);
    r.emplace_back("attn_b", &attn_b);
    r.emplace_back("attn_v", &attn_v);
    r.emplace_back("combine_w", &combine_w);
    r.emplace_back("combine_b", &combine_b);
    r.emplace_back("out_w", &out_w);
    r.emplace_back("out_b", &out_b);
    return r;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> ModelParams::registry() const {
    auto mut = const_cast<ModelParams*>(this)->registry();
    std::vector<std::pair<std::string, const Eigen::MatrixXd*>> r;
    r.reserve(mut.size());
    for (auto& [name, tensor] : mut) r.emplace_back(name, tensor);
    return r;
}

double ModelParams::global_grad_norm() const {
    double sq = 0.0;
    for (auto& [name, tensor] : registry()) sq += tensor->squaredNorm();
    return std::sqrt(sq);
}

void ModelParams::check_finite() const {
    for (auto& [name, tensor] : registry()) {
        if (!tensor->allFinite())
            throw std::runtime_error("non-finite values in tensor " + name);
    }
}

EncoderOutput encode(const ModelParams& params, const std::vector<std::vector<int>>& batch_src) {
    if (batch_src.empty()) throw std::invalid_argument("empty batch");
    int n = 0;
    for (const auto& s : batch_src) {
        if (s.empty()) throw std::invalid_argument("empty source sequence");
        for (int v : s)
            if (v < 0 || v >= params.vocab_size)
                throw std::invalid_argument("token index out of range");
        n = std::max(n, static_cast<int>(s.size()));
    }
    int B = static_cast<int>(batch_src.size());
    std::vector<std::vector<int>> steps(n, std::vector<int>(B, Vocabulary::kPad));
    MatrixXd mask = MatrixXd::Zero(n, B);
    for (int b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < batch_src[b].size(); ++t) {
            steps[t][b] = batch_src[b][t];
            mask(static_cast<int>(t), b) = 1.0;
        }
    }
    return encoder_forward(params, steps, mask, nullptr);
}

EncoderOutput encode(const ModelParams& params, const std::vector<int>& src) {
    return encode(params, std::vector<std::vector<int>>{src});
}

DecoderState initial_decoder_state(const ModelParams& params, const EncoderOutput& enc) {
    const int H = params.config.hidden_units;
    const int B = enc.batch();
    DecoderState state;
    for (int layer = 0; layer < params.config.layers; ++layer) {
        MatrixXd cat(2 * H, B);
        cat.topRows(H) = enc.fwd_final[layer];
        cat.bottomRows(H) = enc.bwd_final[layer];
        MatrixXd pre = params.dec_init_w[layer] * cat;
        pre.colwise() += VectorXd(params.dec_init_b[layer].col(0));
        state.h.push_back(pre.array().tanh().matrix());
        state.c.push_back(MatrixXd::Zero(H, B));
    }
    return state;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attention_context(const ModelParams& params,
                                                              const Eigen::MatrixXd& s_top,
                                                              const EncoderOutput& enc) {
    AttnResult res = attention_forward(params, s_top, enc);
    return {res.ctx, res.weights};
}

Eigen::MatrixXd decode_step(const ModelParams& params, const std::vector<int>& prev_tokens,
                            DecoderState& state, const EncoderOutput& enc, bool mask_pad) {
    for (int v : prev_tokens)
        if (v < 0 || v >= params.vocab_size) throw std::invalid_argument("token index out of range");
    MatrixXd logits = decode_forward(params, prev_tokens, state, enc, nullptr);
    if (mask_pad) logits.row(Vocabulary::kPad).setConstant(-1e30);
    return log_softmax_cols(logits);
}

double loss(const ModelParams& params, const std::vector<SeqPair>& batch) {
    return loss_impl(params, batch, nullptr);
}

double loss_and_gradients(const ModelParams& params, const std::vector<SeqPair>& batch,
                          ModelParams& grads) {
    for (auto& [name, tensor] : grads.registry()) tensor->setZero();
    return loss_impl(params, batch, &grads);
}

}  // namespace codetrans
