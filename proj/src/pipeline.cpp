// SPDX-License-Identifier: Apache-2.0
#include "codetrans/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "codetrans/corpus.hpp"
#include "codetrans/eval.hpp"
#include "codetrans/fixtures.hpp"
#include "codetrans/gerrit.hpp"
#include "codetrans/train.hpp"
#include "codetrans/util.hpp"

namespace codetrans {

using nlohmann::json;

namespace {

void require_file(const std::filesystem::path& path, const std::string& producer) {
    if (!std::filesystem::exists(path))
        throw UserError(path.string() + " not found — run `" + producer + "` first");
}

std::string digest_file(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

struct ManifestEntry {
    std::string stage;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
    std::uint64_t seed = 0;
};

void append_manifest(const PipelineConfig& cfg, const ManifestEntry& entry) {
    json j;
    j["stage"] = entry.stage;
    j["tool_version"] = kToolVersion;
    j["seed"] = entry.seed;
    json in = json::object(), out = json::object();
    for (const auto& [p, d] : entry.inputs) in[p] = d;
    for (const auto& [p, d] : entry.outputs) out[p] = d;
    j["inputs"] = std::move(in);
    j["outputs"] = std::move(out);
    std::filesystem::create_directories(cfg.manifest_file().parent_path());
    std::ofstream f(cfg.manifest_file(), std::ios::app);
    f << j.dump() << '\n';
}

void stage_gen_fixture(PipelineConfig& cfg, ManifestEntry& entry,
                       const std::function<void(const std::string&)>& log) {
    auto root = cfg.corpus_root.empty() ? cfg.default_fixture_root() : cfg.corpus_root;
    fixtures::GenOptions options;
    options.pairs = cfg.fixture_pairs;
    options.seed = cfg.fixture_seed;
    auto pairs = fixtures::generate_pairs(options);
    fixtures::write_corpus_tree(root, pairs);
    cfg.corpus_root = root;
    entry.seed = cfg.fixture_seed;
    entry.outputs.emplace_back(root.string(), std::to_string(pairs.size()) + " pairs");
    if (log) log("fixture corpus with " + std::to_string(pairs.size()) + " pairs at " +
                 root.string());
}

void stage_mine(PipelineConfig& cfg, ManifestEntry& entry,
                const std::function<void(const std::string&)>& log) {
    if (cfg.server_url.empty()) throw UserError("mine requires --server URL");
    std::filesystem::create_directories(cfg.corpus_dir());
    GerritClientConfig gc;
    gc.base_url = cfg.server_url;
    GerritClient client(gc);
    MineStats stats = mine_project(client, cfg.project, cfg.pairs_file(), log);
    entry.inputs.emplace_back(cfg.server_url + "/" + cfg.project, "remote");
    entry.outputs.emplace_back(cfg.pairs_file().string(), digest_file(cfg.pairs_file()));
    if (log) log("mined " + std::to_string(stats.pairs_written) + " file pairs (" +
                 std::to_string(stats.files_skipped) + " skipped)");
}

void stage_ingest(PipelineConfig& cfg, ManifestEntry& entry,
                  const std::function<void(const std::string&)>& log) {
    auto root = cfg.corpus_root.empty() ? cfg.default_fixture_root() : cfg.corpus_root;
    if (!std::filesystem::is_directory(root))
        throw UserError("corpus root not found: " + root.string() +
                        " — run `gen-fixture` or pass --root");
    auto pairs = ingest_local_corpus(root);
    std::filesystem::create_directories(cfg.corpus_dir());
    save_file_pairs(cfg.pairs_file(), pairs);
    entry.inputs.emplace_back(root.string(), "tree");
    entry.outputs.emplace_back(cfg.pairs_file().string(), digest_file(cfg.pairs_file()));
    if (log) log("ingested " + std::to_string(pairs.size()) + " file pairs");
}

void stage_extract(PipelineConfig& cfg, ManifestEntry& entry,
                   const std::function<void(const std::string&)>& log) {
    require_file(cfg.pairs_file(), "ingest (or mine)");
    auto file_pairs = load_file_pairs(cfg.pairs_file());

    std::vector<std::vector<MethodPair>> per_file(file_pairs.size());
    std::vector<char> skipped(file_pairs.size(), 0);
    parallel_for(file_pairs.size(), 0, [&](std::size_t i) {
        const FilePair& fp = file_pairs[i];
        try {
            auto pre = extract_methods(fp.pre_text);
            auto post = extract_methods(fp.post_text);
            for (auto& d : pre) d.file_path = fp.path;
            for (auto& d : post) d.file_path = fp.path;
            per_file[i] = changed_pairs(match_methods(pre, post), fp.change_id);
        } catch (const std::exception&) {
            skipped[i] = 1;  // unbalanced or unlexable file
        }
    });

    std::vector<MethodPair> pairs;
    std::size_t skip_count = 0;
    for (std::size_t i = 0; i < per_file.size(); ++i) {
        skip_count += skipped[i];
        pairs.insert(pairs.end(), per_file[i].begin(), per_file[i].end());
    }
    std::sort(pairs.begin(), pairs.end(), [](const MethodPair& a, const MethodPair& b) {
        if (a.change_id != b.change_id) return a.change_id < b.change_id;
        if (a.before.file_path != b.before.file_path) return a.before.file_path < b.before.file_path;
        return a.before.start_line < b.before.start_line;
    });
    save_method_pairs(cfg.method_pairs_file(), pairs);
    entry.inputs.emplace_back(cfg.pairs_file().string(), digest_file(cfg.pairs_file()));
    entry.outputs.emplace_back(cfg.method_pairs_file().string(),
                               digest_file(cfg.method_pairs_file()));
    if (log) log("extracted " + std::to_string(pairs.size()) + " changed method pairs (" +
                 std::to_string(skip_count) + " files skipped)");
}

void stage_abstract(PipelineConfig& cfg, ManifestEntry& entry,
                    const std::function<void(const std::string&)>& log) {
    require_file(cfg.method_pairs_file(), "extract");
    auto pairs = load_method_pairs(cfg.method_pairs_file());
    if (pairs.empty()) throw UserError("method-pair corpus is empty");

    IdiomList idioms = compute_idioms(pairs, cfg.idiom_k);
    write_file_atomic(cfg.idioms_file(), idioms.to_text());

    std::vector<AbstractedPair> abstracted;
    std::size_t failures = 0;
    for (const auto& pair : pairs) {
        try {
            abstracted.push_back(abstract_pair(pair, idioms));
        } catch (const std::exception&) {
            ++failures;
        }
    }
    save_abstracted_pairs(cfg.abstracted_file(), abstracted);
    entry.inputs.emplace_back(cfg.method_pairs_file().string(),
                              digest_file(cfg.method_pairs_file()));
    entry.outputs.emplace_back(cfg.abstracted_file().string(),
                               digest_file(cfg.abstracted_file()));
    entry.outputs.emplace_back(cfg.idioms_file().string(), digest_file(cfg.idioms_file()));
    if (log) log("abstracted " + std::to_string(abstracted.size()) + " pairs (" +
                 std::to_string(failures) + " failed), idiom K=" + std::to_string(cfg.idiom_k));
}

void stage_build(PipelineConfig& cfg, ManifestEntry& entry,
                 const std::function<void(const std::string&)>& log) {
    require_file(cfg.abstracted_file(), "abstract");
    require_file(cfg.idioms_file(), "abstract");
    auto pairs = load_abstracted_pairs(cfg.abstracted_file());
    IdiomList idioms = IdiomList::from_text(read_file(cfg.idioms_file()));

    auto kept = filter_unchanged(filter_expressible(pairs, idioms));
    BucketedPairs buckets = bucket_by_size(kept);
    const auto& selected = cfg.bucket == SizeBucket::Small ? buckets.small : buckets.medium;
    Dataset dataset = dedup_split(selected, cfg.data_seed);
    dataset.name = cfg.dataset_name;
    dataset.bucket = cfg.bucket;
    save_dataset(cfg.dataset_dir(), dataset);

    entry.seed = cfg.data_seed;
    entry.inputs.emplace_back(cfg.abstracted_file().string(),
                              digest_file(cfg.abstracted_file()));
    for (const char* f : {"train.ndjson", "valid.ndjson", "test.ndjson", "manifest.json"}) {
        entry.outputs.emplace_back((cfg.dataset_dir() / f).string(),
                                   digest_file(cfg.dataset_dir() / f));
    }
    if (log)
        log("dataset " + cfg.dataset_name + "/" + bucket_name(cfg.bucket) + ": " +
            std::to_string(dataset.train.size()) + "/" + std::to_string(dataset.valid.size()) +
            "/" + std::to_string(dataset.test.size()) + " (discarded " +
            std::to_string(buckets.discarded) + " long, " +
            std::to_string(dataset.leakage_warnings) + " leakage warnings)");
}

void stage_train(PipelineConfig& cfg, ManifestEntry& entry,
                 const std::function<void(const std::string&)>& log) {
    require_file(cfg.dataset_dir() / "manifest.json", "build");
    require_file(cfg.idioms_file(), "abstract");
    Dataset dataset = load_dataset(cfg.dataset_dir());
    IdiomList idioms = IdiomList::from_text(read_file(cfg.idioms_file()));

    TrainResult result = train(cfg.model, dataset, idioms, cfg.target_train_loss,
                               [&](const TrainLogEntry& e) {
                                   if (log)
                                       log("step " + std::to_string(e.step) + " train " +
                                           std::to_string(e.train_loss) + " valid " +
                                           std::to_string(e.valid_loss));
                               });
    std::filesystem::create_directories(cfg.checkpoint_file().parent_path());
    save_checkpoint(cfg.checkpoint_file(), result.checkpoint);
    write_file_atomic(cfg.train_log_file(), train_log_csv(result.log));

    entry.seed = cfg.model.seed;
    for (const char* f : {"train.ndjson", "valid.ndjson"}) {
        entry.inputs.emplace_back((cfg.dataset_dir() / f).string(),
                                  digest_file(cfg.dataset_dir() / f));
    }
    entry.outputs.emplace_back(cfg.checkpoint_file().string(),
                               digest_file(cfg.checkpoint_file()));
    entry.outputs.emplace_back(cfg.train_log_file().string(),
                               digest_file(cfg.train_log_file()));
    if (log)
        log("best checkpoint at step " + std::to_string(result.checkpoint.step) +
            ", validation loss " + std::to_string(result.checkpoint.validation_loss));
}

void stage_eval(PipelineConfig& cfg, ManifestEntry& entry,
                const std::function<void(const std::string&)>& log) {
    require_file(cfg.checkpoint_file(), "train");
    require_file(cfg.dataset_dir() / "manifest.json", "build");
    Checkpoint ckpt = load_checkpoint(cfg.checkpoint_file());
    Dataset dataset = load_dataset(cfg.dataset_dir());

    EvalReport report =
        evaluate(ckpt.params, ckpt.vocab, dataset, cfg.eval_ks, cfg.eval_threads);
    std::filesystem::create_directories(cfg.report_dir());
    write_file_atomic(cfg.report_dir() / "report.csv", render_report_csv(report));
    write_file_atomic(cfg.report_dir() / "report.txt", render_report_text(report));

    entry.inputs.emplace_back(cfg.checkpoint_file().string(),
                              digest_file(cfg.checkpoint_file()));
    entry.inputs.emplace_back((cfg.dataset_dir() / "test.ndjson").string(),
                              digest_file(cfg.dataset_dir() / "test.ndjson"));
    entry.outputs.emplace_back((cfg.report_dir() / "report.csv").string(),
                               digest_file(cfg.report_dir() / "report.csv"));
    if (log) log("\n" + render_report_text(report));
}

void stage_stats(PipelineConfig& cfg, ManifestEntry& entry,
                 const std::function<void(const std::string&)>& log) {
    require_file(cfg.method_pairs_file(), "extract");
    require_file(cfg.idioms_file(), "abstract");
    auto pairs = load_method_pairs(cfg.method_pairs_file());
    IdiomList idioms = IdiomList::from_text(read_file(cfg.idioms_file()));
    VocabStats stats = vocab_stats(pairs, idioms);

    json j;
    j["raw_vocab"] = stats.raw_vocab_size;
    j["abstracted_vocab"] = stats.abstracted_vocab_size;
    j["pairs"] = pairs.size();
    std::filesystem::create_directories(cfg.report_dir());
    write_file_atomic(cfg.report_dir() / "vocab_stats.json", j.dump(2) + "\n");
    entry.inputs.emplace_back(cfg.method_pairs_file().string(),
                              digest_file(cfg.method_pairs_file()));
    entry.outputs.emplace_back((cfg.report_dir() / "vocab_stats.json").string(),
                               digest_file(cfg.report_dir() / "vocab_stats.json"));
    if (log)
        log("vocabulary: raw " + std::to_string(stats.raw_vocab_size) + " -> abstracted " +
            std::to_string(stats.abstracted_vocab_size));
}

}  // namespace

const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"gen-fixture", "mine",  "ingest",
                                                    "extract",     "abstract", "build",
                                                    "train",       "eval",  "stats"};
    return stages;
}

void run_stage(const std::string& stage, PipelineConfig& cfg,
               const std::function<void(const std::string&)>& log) {
    ManifestEntry entry;
    entry.stage = stage;
    if (stage == "gen-fixture") stage_gen_fixture(cfg, entry, log);
    else if (stage == "mine") stage_mine(cfg, entry, log);
    else if (stage == "ingest") stage_ingest(cfg, entry, log);
    else if (stage == "extract") stage_extract(cfg, entry, log);
    else if (stage == "abstract") stage_abstract(cfg, entry, log);
    else if (stage == "build") stage_build(cfg, entry, log);
    else if (stage == "train") stage_train(cfg, entry, log);
    else if (stage == "eval") stage_eval(cfg, entry, log);
    else if (stage == "stats") stage_stats(cfg, entry, log);
    else throw UserError("unknown stage: " + stage);
    append_manifest(cfg, entry);
}

}  // namespace codetrans
