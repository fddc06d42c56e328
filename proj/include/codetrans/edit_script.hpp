// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace codetrans {

enum class EditKind { Insert, Delete, Replace };

// One unit edit against the original (before) token list. position is a
// token index in before: for Delete/Replace, the token being edited; for
// Insert, the token the new text is placed in front of (== before.size()
// appends at the end). Script length equals the Levenshtein token distance.
struct EditOp {
    EditKind kind;
    std::size_t position;
    std::vector<std::string> before_tokens;
    std::vector<std::string> after_tokens;
};

// Minimal-length script under unit-cost token Levenshtein distance, edits in
// left-to-right order. Tie-break on equal cost: Replace over Insert over
// Delete.
std::vector<EditOp> edit_script(const std::vector<std::string>& before_tokens,
                                const std::vector<std::string>& after_tokens);

// Applies a script produced by edit_script; the result reproduces the
// original after-token list exactly.
std::vector<std::string> apply_edit_script(const std::vector<EditOp>& script,
                                           const std::vector<std::string>& before_tokens);

}  // namespace codetrans
