// SPDX-License-Identifier: Apache-2.0
#include "codetrans/dataset.hpp"

#include <algorithm>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

using nlohmann::json;

const char* bucket_name(SizeBucket b) { return b == SizeBucket::Small ? "small" : "medium"; }

namespace {

// Keywords, boolean/null literals, separators and operators pass through the
// expressibility check; anything else must be an idiom or an ID from am_b.
bool is_passthrough_token(const std::string& text) {
    if (is_java_keyword(text) || text == "true" || text == "false" || text == "null")
        return true;
    try {
        auto toks = tokenize(text);
        if (toks.size() != 1) return false;
        return toks[0].kind == TokenKind::Separator || toks[0].kind == TokenKind::Operator;
    } catch (const LexError&) {
        return false;
    }
}

std::string pair_key(const AbstractedPair& p) {
    std::string key;
    for (const auto& t : p.am_b) {
        key += t;
        key += '\x1F';
    }
    key += '\x1E';
    for (const auto& t : p.am_a) {
        key += t;
        key += '\x1F';
    }
    return key;
}

std::string source_key(const AbstractedPair& p) {
    std::string key;
    for (const auto& t : p.am_b) {
        key += t;
        key += '\x1F';
    }
    return key;
}

}  // namespace

bool is_expressible(const AbstractedPair& pair, const IdiomList& idioms) {
    std::unordered_set<std::string> source_ids;
    for (const auto& t : pair.am_b) {
        if (is_abstract_id(t)) source_ids.insert(t);
    }
    for (const auto& t : pair.am_a) {
        if (is_abstract_id(t)) {
            if (!source_ids.count(t)) return false;
        } else if (!is_passthrough_token(t) && !idioms.contains(t)) {
            return false;
        }
    }
    return true;
}

std::vector<AbstractedPair> filter_expressible(const std::vector<AbstractedPair>& pairs,
                                               const IdiomList& idioms) {
    std::vector<AbstractedPair> out;
    for (const auto& p : pairs) {
        if (is_expressible(p, idioms)) out.push_back(p);
    }
    return out;
}

std::vector<AbstractedPair> filter_unchanged(const std::vector<AbstractedPair>& pairs) {
    std::vector<AbstractedPair> out;
    for (const auto& p : pairs) {
        if (p.am_b != p.am_a) out.push_back(p);
    }
    return out;
}

BucketedPairs bucket_by_size(const std::vector<AbstractedPair>& pairs) {
    BucketedPairs out;
    for (const auto& p : pairs) {
        std::size_t size = std::max(p.am_b.size(), p.am_a.size());
        if (size <= 50) out.small.push_back(p);
        else if (size <= 100) out.medium.push_back(p);
        else ++out.discarded;
    }
    return out;
}

Dataset dedup_split(const std::vector<AbstractedPair>& pairs, std::uint64_t seed) {
    std::vector<AbstractedPair> unique;
    std::unordered_set<std::string> seen;
    for (const auto& p : pairs) {
        if (seen.insert(pair_key(p)).second) unique.push_back(p);
    }
    if (unique.size() < 10)
        throw UserError("need at least 10 unique pairs to split, have " +
                        std::to_string(unique.size()));

    SplitMix64 rng(seed);
    rng.shuffle(unique);

    std::size_t n = unique.size();
    std::size_t n_test = n / 10;
    std::size_t n_valid = n / 10;
    std::size_t n_train = n - n_valid - n_test;

    Dataset ds;
    ds.seed = seed;
    ds.train.assign(unique.begin(), unique.begin() + n_train);
    ds.valid.assign(unique.begin() + n_train, unique.begin() + n_train + n_valid);
    ds.test.assign(unique.begin() + n_train + n_valid, unique.end());

    std::unordered_set<std::string> train_sources;
    for (const auto& p : ds.train) train_sources.insert(source_key(p));
    for (const auto& p : ds.test) {
        if (train_sources.count(source_key(p))) ++ds.leakage_warnings;
    }
    return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir);
    save_abstracted_pairs(dir / "train.ndjson", dataset.train);
    save_abstracted_pairs(dir / "valid.ndjson", dataset.valid);
    save_abstracted_pairs(dir / "test.ndjson", dataset.test);
    json manifest;
    manifest["name"] = dataset.name;
    manifest["bucket"] = bucket_name(dataset.bucket);
    manifest["seed"] = dataset.seed;
    manifest["counts"] = {{"train", dataset.train.size()},
                          {"valid", dataset.valid.size()},
                          {"test", dataset.test.size()}};
    manifest["leakage_warnings"] = dataset.leakage_warnings;
    manifest["files"] = {{"train", "train.ndjson"}, {"valid", "valid.ndjson"},
                         {"test", "test.ndjson"}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
    auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw UserError("dataset manifest not found: " + manifest_path.string());
    json manifest = json::parse(read_file(manifest_path));
    Dataset ds;
    ds.name = manifest.value("name", "");
    ds.bucket = manifest.value("bucket", "small") == std::string("medium") ? SizeBucket::Medium
                                                                           : SizeBucket::Small;
    ds.seed = manifest.value("seed", 0ULL);
    ds.leakage_warnings = manifest.value("leakage_warnings", 0ULL);
    ds.train = load_abstracted_pairs(dir / "train.ndjson");
    ds.valid = load_abstracted_pairs(dir / "valid.ndjson");
    ds.test = load_abstracted_pairs(dir / "test.ndjson");
    return ds;
}

}  // namespace codetrans
