// SPDX-License-Identifier: Apache-2.0
#include "codetrans/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

using nlohmann::json;

std::vector<SeqPair> encode_pairs(const Vocabulary& vocab,
                                  const std::vector<AbstractedPair>& pairs) {
    std::vector<SeqPair> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) {
        out.push_back(SeqPair{vocab.encode(p.am_b), vocab.encode(p.am_a)});
    }
    return out;
}

namespace {

std::size_t target_positions(const std::vector<SeqPair>& pairs) {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.tgt.size() + 1;  // +1 for EOS
    return n;
}

// Position-weighted mean NLL over a whole set, evaluated in fixed-size
// chunks so batching never changes the result definition.
double evaluate_loss(const ModelParams& params, const std::vector<SeqPair>& pairs,
                     int batch_size) {
    double total = 0.0;
    std::size_t positions = 0;
    for (std::size_t i = 0; i < pairs.size(); i += batch_size) {
        std::size_t hi = std::min(pairs.size(), i + batch_size);
        std::vector<SeqPair> chunk(pairs.begin() + i, pairs.begin() + hi);
        std::size_t chunk_positions = target_positions(chunk);
        total += loss(params, chunk) * static_cast<double>(chunk_positions);
        positions += chunk_positions;
    }
    return total / static_cast<double>(positions);
}

int bucket_index(const std::vector<int>& bounds, int length) {
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        if (length <= bounds[i]) return static_cast<int>(i);
    }
    return static_cast<int>(bounds.size());  // overflow band
}

// One epoch's batches: shuffled order, grouped into length buckets, each
// batch drawn from a single bucket; partial buckets flush at the end.
std::vector<std::vector<std::size_t>> plan_epoch(const std::vector<SeqPair>& train,
                                                 const ModelConfig& config, SplitMix64& rng) {
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> queues(config.buckets.size() + 1);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t idx : order) {
        int len = static_cast<int>(
            std::max(train[idx].src.size(), train[idx].tgt.size() + 1));
        auto& q = queues[bucket_index(config.buckets, len)];
        q.push_back(idx);
        if (q.size() == static_cast<std::size_t>(config.batch_size)) {
            batches.push_back(q);
            q.clear();
        }
    }
    for (auto& q : queues) {
        if (!q.empty()) batches.push_back(q);
    }
    return batches;
}

}  // namespace

TrainResult train(const ModelConfig& config, const Dataset& dataset, const IdiomList& idioms,
                  double target_train_loss,
                  const std::function<void(const TrainLogEntry&)>& progress) {
    config.validate();
    if (dataset.train.empty() || dataset.valid.empty())
        throw UserError("training requires non-empty train and valid splits");

    Vocabulary vocab;
    {
        std::vector<std::vector<std::string>> seqs;
        for (const auto& p : dataset.train) {
            seqs.push_back(p.am_b);
            seqs.push_back(p.am_a);
        }
        vocab = Vocabulary::build(seqs);
    }
    std::vector<SeqPair> train_pairs = encode_pairs(vocab, dataset.train);
    std::vector<SeqPair> valid_pairs = encode_pairs(vocab, dataset.valid);

    SplitMix64 rng(config.seed);
    ModelParams params = ModelParams::init(config, vocab.size(), rng);
    ModelParams grads = ModelParams::zeros_like(params);

    TrainResult result;
    result.checkpoint.vocab = vocab;
    result.checkpoint.idioms = idioms;
    result.checkpoint.validation_loss = std::numeric_limits<double>::infinity();

    double lr = config.learning_rate;
    int best_step = -1;
    int step = 0;
    bool stop = false;
    double last_train_loss = 0.0;

    while (step < config.max_steps && !stop) {
        auto batches = plan_epoch(train_pairs, config, rng);
        for (const auto& batch_idx : batches) {
            std::vector<SeqPair> batch;
            batch.reserve(batch_idx.size());
            for (std::size_t i : batch_idx) batch.push_back(train_pairs[i]);

            double batch_loss = loss_and_gradients(params, batch, grads);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("training diverged: non-finite loss at step " +
                                         std::to_string(step));
            double norm = grads.global_grad_norm();
            double scale = lr;
            if (norm > config.grad_clip) scale = lr * config.grad_clip / norm;
            auto preg = params.registry();
            auto greg = grads.registry();
            for (std::size_t i = 0; i < preg.size(); ++i) {
                *preg[i].second -= scale * (*greg[i].second);
            }
            ++step;
            last_train_loss = batch_loss;

            if (step % config.eval_interval == 0 || step == config.max_steps) {
                double valid_loss = evaluate_loss(params, valid_pairs, config.batch_size);
                if (!std::isfinite(valid_loss))
                    throw std::runtime_error("training diverged: non-finite validation loss");
                TrainLogEntry entry{step, batch_loss, valid_loss};
                result.log.push_back(entry);
                if (progress) progress(entry);

                if (valid_loss < result.checkpoint.validation_loss) {
                    result.checkpoint.params = params;
                    result.checkpoint.step = step;
                    result.checkpoint.validation_loss = valid_loss;
                    best_step = step;
                } else if (step - best_step >= config.lr_patience) {
                    lr *= 0.5;
                    best_step = step;  // restart the patience window
                }
            }
            if (target_train_loss > 0.0 && last_train_loss < target_train_loss) {
                stop = true;
            }
            if (step >= config.max_steps || stop) break;
        }
    }

    if (!std::isfinite(result.checkpoint.validation_loss)) {
        // max_steps smaller than eval_interval: snapshot the final params
        result.checkpoint.params = params;
        result.checkpoint.step = step;
        result.checkpoint.validation_loss =
            evaluate_loss(params, valid_pairs, config.batch_size);
    }
    result.checkpoint.params.check_finite();
    result.steps_run = step;
    return result;
}

std::string train_log_csv(const std::vector<TrainLogEntry>& log) {
    std::string out = "step,train_loss,valid_loss\n";
    char buf[128];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", e.step, e.train_loss, e.valid_loss);
        out += buf;
    }
    return out;
}

std::string model_config_to_json(const ModelConfig& c) {
    json j;
    j["cell"] = cell_kind_name(c.cell);
    j["layers"] = c.layers;
    j["hidden_units"] = c.hidden_units;
    j["embedding_dim"] = c.embedding_dim;
    j["learning_rate"] = c.learning_rate;
    j["max_steps"] = c.max_steps;
    j["batch_size"] = c.batch_size;
    j["buckets"] = c.buckets;
    j["eval_interval"] = c.eval_interval;
    j["lr_patience"] = c.lr_patience;
    j["grad_clip"] = c.grad_clip;
    j["init_scale"] = c.init_scale;
    j["seed"] = c.seed;
    return j.dump();
}

ModelConfig model_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    ModelConfig c;
    c.cell = cell_kind_from_name(j.value("cell", "gru"));
    c.layers = j.value("layers", c.layers);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.buckets = j.value("buckets", c.buckets);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
    c.lr_patience = j.value("lr_patience", c.lr_patience);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

namespace {
constexpr char kCkptMagic[8] = {'C', 'T', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    json header;
    header["config"] = json::parse(model_config_to_json(ckpt.params.config));
    header["vocab_size"] = ckpt.params.vocab_size;
    header["step"] = ckpt.step;
    header["validation_loss"] = ckpt.validation_loss;
    std::vector<std::string> vocab_tokens(ckpt.vocab.tokens().begin() + 4,
                                          ckpt.vocab.tokens().end());
    header["vocab"] = vocab_tokens;
    header["idioms"] = ckpt.idioms.to_text();
    std::string header_text = header.dump();

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UserError("cannot write checkpoint: " + path.string());
        out.write(kCkptMagic, sizeof(kCkptMagic));
        write_u64(out, header_text.size());
        out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
        for (auto& [name, tensor] : ckpt.params.registry()) {
            write_u64(out, name.size());
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            write_u64(out, static_cast<std::uint64_t>(tensor->rows()));
            write_u64(out, static_cast<std::uint64_t>(tensor->cols()));
            out.write(reinterpret_cast<const char*>(tensor->data()),
                      static_cast<std::streamsize>(sizeof(double) * tensor->size()));
        }
        if (!out) throw UserError("checkpoint write failed: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
        throw UserError("not a checkpoint file: " + path.string());
    std::uint64_t header_len = read_u64(in);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    json header = json::parse(header_text);

    Checkpoint ckpt;
    ModelConfig config = model_config_from_json(header.at("config").dump());
    int vocab_size = header.at("vocab_size").get<int>();
    ckpt.step = header.value("step", 0);
    ckpt.validation_loss = header.value("validation_loss", 0.0);
    ckpt.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
    ckpt.idioms = IdiomList::from_text(header.value("idioms", ""));

    SplitMix64 rng(0);
    ckpt.params = ModelParams::init(config, vocab_size, rng);
    for (auto& [name, tensor] : ckpt.params.registry()) {
        std::uint64_t name_len = read_u64(in);
        std::string got(name_len, '\0');
        in.read(got.data(), static_cast<std::streamsize>(name_len));
        if (got != name) throw UserError("checkpoint tensor mismatch: expected " + name +
                                         ", found " + got);
        std::uint64_t rows = read_u64(in), cols = read_u64(in);
        if (static_cast<Eigen::Index>(rows) != tensor->rows() ||
            static_cast<Eigen::Index>(cols) != tensor->cols())
            throw UserError("checkpoint tensor shape mismatch for " + name);
        in.read(reinterpret_cast<char*>(tensor->data()),
                static_cast<std::streamsize>(sizeof(double) * tensor->size()));
    }
    if (!in) throw UserError("truncated checkpoint: " + path.string());
    if (ckpt.vocab.size() != vocab_size)
        throw UserError("checkpoint vocabulary size mismatch");
    return ckpt;
}

}  // namespace codetrans
