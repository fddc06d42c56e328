// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "codetrans/method.hpp"
#include "codetrans/util.hpp"

namespace codetrans::fixtures {

// Transformation families the generated pairs instantiate.
enum class ChangeKind : int {
    AddNullCheck = 0,   // wrap an invocation in if (x != null) { ... }
    RenameParameter,    // parameter renamed to a frequent name
    RelaxComparison,    // >= becomes > in a condition
    AddFinal,           // final added to the method signature
    SwapArguments,      // two call arguments swapped
};
constexpr int kChangeKindCount = 5;

struct GenOptions {
    std::size_t pairs = 500;
    std::uint64_t seed = 7;
    // Rename targets drawn from two frequent names, so identically shaped
    // inputs map to different outputs and beam width genuinely helps.
    bool ambiguous_renames = true;
};

// Frequent identifier pool the generator leans on; these names end up in any
// top-K idiom list computed over a generated corpus.
const std::vector<std::string>& frequent_names();

// Hand-written methods covering the lexer's corner cases (escapes, numeric
// forms, generics, anonymous classes, labels, casts).
const std::vector<std::string>& handwritten_methods();

// One concrete before/after method pair of the given kind.
MethodPair make_pair(SplitMix64& rng, ChangeKind kind, bool ambiguous_renames);

// Deterministic corpus of pairs cycling through the five families.
std::vector<MethodPair> generate_pairs(const GenOptions& options);

// Lays out pairs as a local review corpus:
//   <root>/change_<i>/pre/<Class>.java and .../post/<Class>.java
// Every file wraps its methods in a class; each change also carries an
// unchanged helper method, and the tree includes one post-only (created)
// file and one non-Java file to exercise the ingestion rules.
void write_corpus_tree(const std::filesystem::path& root, const std::vector<MethodPair>& pairs);

}  // namespace codetrans::fixtures
