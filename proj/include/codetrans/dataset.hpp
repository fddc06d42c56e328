// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codetrans/abstraction.hpp"

namespace codetrans {

enum class SizeBucket { Small, Medium };
const char* bucket_name(SizeBucket b);

struct Dataset {
    std::string name;
    SizeBucket bucket = SizeBucket::Small;
    std::vector<AbstractedPair> train;
    std::vector<AbstractedPair> valid;
    std::vector<AbstractedPair> test;
    std::uint64_t seed = 0;
    std::size_t leakage_warnings = 0;  // test am_b seen in train with any am_a
};

// Keeps pairs whose am_a tokens are all keywords/separators/operators,
// idiom entries, or IDs that occur in am_b.
std::vector<AbstractedPair> filter_expressible(const std::vector<AbstractedPair>& pairs,
                                               const IdiomList& idioms);
bool is_expressible(const AbstractedPair& pair, const IdiomList& idioms);

// Drops pairs with identical abstract sequences (am_b == am_a).
std::vector<AbstractedPair> filter_unchanged(const std::vector<AbstractedPair>& pairs);

struct BucketedPairs {
    std::vector<AbstractedPair> small;     // max(|am_b|, |am_a|) <= 50
    std::vector<AbstractedPair> medium;    // 51..100
    std::size_t discarded = 0;             // > 100
};
BucketedPairs bucket_by_size(const std::vector<AbstractedPair>& pairs);

// Removes exact (am_b, am_a) duplicates, shuffles with the seed, splits
// 80/10/10 by count with remainders going to train. Needs >= 10 pairs.
Dataset dedup_split(const std::vector<AbstractedPair>& pairs, std::uint64_t seed);

// Writes train/valid/test NDJSON files plus manifest.json into dir.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace codetrans
