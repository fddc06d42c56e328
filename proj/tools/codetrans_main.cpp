// SPDX-License-Identifier: Apache-2.0
//
// codetrans: learns method-level code transformations from before/after
// review corpora and replays them with a seq2seq model under beam search.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "codetrans/beam.hpp"
#include "codetrans/pipeline.hpp"
#include "codetrans/token.hpp"
#include "codetrans/train.hpp"
#include "codetrans/util.hpp"

namespace {

using namespace codetrans;

std::string escape_text(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '\n') out += "\\n";
        else if (c == '\t') out += "\\t";
        else if (c == '\r') out += "\\r";
        else out += c;
    }
    return out;
}

int cmd_tokenize(const std::string& file) {
    auto source = read_file(file);
    auto roled = classify_roles(tokenize(source));
    for (const auto& rt : roled) {
        std::printf("%d:%d %s %s %s\n", rt.token.line, rt.token.col,
                    token_kind_name(rt.token.kind), role_name(rt.role, rt.category),
                    escape_text(rt.token.text).c_str());
    }
    return 0;
}

int cmd_translate(const std::string& ckpt_path, const std::string& in_file, int k) {
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    std::string source = read_file(in_file);
    std::size_t dropped = 0;
    auto candidates = translate(ckpt.params, ckpt.vocab, ckpt.idioms, source, k, &dropped);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::printf("# candidate %zu  log_prob=%.6f\n%s", i + 1, candidates[i].log_prob,
                    candidates[i].source.c_str());
    }
    if (dropped > 0)
        std::fprintf(stderr, "warning: %zu candidate(s) dropped (unmapped IDs)\n", dropped);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"code-transformation learning pipeline"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "config file with long-option values");

    PipelineConfig cfg;
    std::string bucket = "small";
    std::string cell = "gru";
    std::string workdir = "work";
    std::string corpus_root;

    app.add_option("--workdir,--out", workdir, "artifact directory")
        ->envname("CODETRANS_WORKDIR");
    app.add_option("--k", cfg.idiom_k, "idiom list size")->envname("CODETRANS_IDIOM_K");
    app.add_option("--bucket", bucket, "size bucket: small|medium")
        ->envname("CODETRANS_BUCKET");
    app.add_option("--seed", cfg.data_seed, "dataset shuffle seed")
        ->envname("CODETRANS_SEED");
    app.add_option("--dataset", cfg.dataset_name, "dataset name")
        ->envname("CODETRANS_DATASET");

    app.add_option("--cell", cell, "recurrent cell: gru|lstm");
    app.add_option("--layers", cfg.model.layers, "encoder/decoder layers");
    app.add_option("--hidden", cfg.model.hidden_units, "hidden units");
    app.add_option("--embedding", cfg.model.embedding_dim, "embedding dimension");
    app.add_option("--lr", cfg.model.learning_rate, "learning rate");
    app.add_option("--steps", cfg.model.max_steps, "max training steps");
    app.add_option("--batch", cfg.model.batch_size, "batch size");
    app.add_option("--train-seed", cfg.model.seed, "parameter init / batching seed");
    app.add_option("--target-train-loss", cfg.target_train_loss,
                   "stop early when a minibatch loss drops below this");

    auto* mine = app.add_subcommand("mine", "crawl merged changes from a review server");
    mine->add_option("--server", cfg.server_url, "review server base URL")->required();
    mine->add_option("--project", cfg.project, "project name");

    auto* ingest = app.add_subcommand("ingest", "read a local pre/post corpus tree");
    ingest->add_option("--root", corpus_root, "corpus root directory");

    auto* gen = app.add_subcommand("gen-fixture", "generate a synthetic review corpus");
    gen->add_option("--root", corpus_root, "output corpus directory");
    gen->add_option("--pairs", cfg.fixture_pairs, "number of method pairs");
    gen->add_option("--fixture-seed", cfg.fixture_seed, "generator seed");

    auto* tokenize_cmd = app.add_subcommand("tokenize", "dump the roled token stream of a file");
    std::string tokenize_file;
    tokenize_cmd->add_option("file", tokenize_file, "Java source file")->required();

    app.add_subcommand("extract", "extract changed method pairs");
    app.add_subcommand("abstract", "abstract method pairs and compute idioms");
    app.add_subcommand("build", "filter, bucket, dedup and split the dataset");
    app.add_subcommand("train", "train the encoder-decoder model");
    app.add_subcommand("stats", "report raw vs abstracted vocabulary sizes");

    auto* eval_cmd = app.add_subcommand("eval", "perfect-prediction evaluation");
    std::string eval_ckpt;
    eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file (default: workdir ckpt)");
    eval_cmd->add_option("--beams", cfg.eval_ks, "beam sizes to evaluate")->delimiter(',');
    eval_cmd->add_option("--threads", cfg.eval_threads, "evaluation threads (0 = auto)");

    auto* translate_cmd = app.add_subcommand("translate", "propose transformations for a method");
    std::string tr_ckpt, tr_in;
    int tr_k = 10;
    translate_cmd->add_option("--ckpt", tr_ckpt, "checkpoint file")->required();
    translate_cmd->add_option("--in", tr_in, "file holding one Java method")->required();
    translate_cmd->add_option("--beam,-k", tr_k, "number of candidates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        cfg.workdir = workdir;
        if (!corpus_root.empty()) cfg.corpus_root = corpus_root;
        if (bucket != "small" && bucket != "medium")
            throw UserError("--bucket must be small or medium");
        cfg.bucket = bucket == "small" ? SizeBucket::Small : SizeBucket::Medium;
        cfg.model.cell = cell_kind_from_name(cell);

        if (tokenize_cmd->parsed()) return cmd_tokenize(tokenize_file);
        if (translate_cmd->parsed()) return cmd_translate(tr_ckpt, tr_in, tr_k);
        if (eval_cmd->parsed() && !eval_ckpt.empty()) cfg.checkpoint_override = eval_ckpt;

        std::string stage = app.get_subcommands().front()->get_name();
        run_stage(stage, cfg, [](const std::string& msg) { std::cout << msg << "\n"; });
        return 0;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
