// SPDX-License-Identifier: Apache-2.0
#include "codetrans/edit_script.hpp"

#include <algorithm>

namespace codetrans {

std::vector<EditOp> edit_script(const std::vector<std::string>& before_tokens,
                                const std::vector<std::string>& after_tokens) {
    const std::size_t n = before_tokens.size();
    const std::size_t m = after_tokens.size();
    // dp[i][j]: distance between before[0..i) and after[0..j).
    std::vector<std::vector<unsigned>> dp(n + 1, std::vector<unsigned>(m + 1));
    for (std::size_t i = 0; i <= n; ++i) dp[i][0] = static_cast<unsigned>(i);
    for (std::size_t j = 0; j <= m; ++j) dp[0][j] = static_cast<unsigned>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            unsigned sub = dp[i - 1][j - 1] + (before_tokens[i - 1] == after_tokens[j - 1] ? 0 : 1);
            unsigned ins = dp[i][j - 1] + 1;
            unsigned del = dp[i - 1][j] + 1;
            dp[i][j] = std::min({sub, ins, del});
        }
    }

    std::vector<EditOp> script;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && before_tokens[i - 1] == after_tokens[j - 1] &&
            dp[i][j] == dp[i - 1][j - 1]) {
            --i;
            --j;
            continue;
        }
        if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1) {
            script.push_back(EditOp{EditKind::Replace, i - 1, {before_tokens[i - 1]},
                                    {after_tokens[j - 1]}});
            --i;
            --j;
        } else if (j > 0 && dp[i][j] == dp[i][j - 1] + 1) {
            script.push_back(EditOp{EditKind::Insert, i, {}, {after_tokens[j - 1]}});
            --j;
        } else {
            script.push_back(EditOp{EditKind::Delete, i - 1, {before_tokens[i - 1]}, {}});
            --i;
        }
    }
    std::reverse(script.begin(), script.end());
    return script;
}

std::vector<std::string> apply_edit_script(const std::vector<EditOp>& script,
                                           const std::vector<std::string>& before_tokens) {
    std::vector<std::string> out;
    std::size_t cursor = 0;
    for (const EditOp& op : script) {
        while (cursor < op.position && cursor < before_tokens.size()) {
            out.push_back(before_tokens[cursor]);
            ++cursor;
        }
        switch (op.kind) {
            case EditKind::Insert:
                out.insert(out.end(), op.after_tokens.begin(), op.after_tokens.end());
                break;
            case EditKind::Delete:
                ++cursor;
                break;
            case EditKind::Replace:
                out.insert(out.end(), op.after_tokens.begin(), op.after_tokens.end());
                ++cursor;
                break;
        }
    }
    while (cursor < before_tokens.size()) {
        out.push_back(before_tokens[cursor]);
        ++cursor;
    }
    return out;
}

}  // namespace codetrans
