// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "codetrans/token.hpp"

namespace codetrans {

struct MethodDecl {
    std::string name;
    int param_arity = 0;
    std::vector<std::string> param_type_texts;
    std::string source_text;  // declaration start through the body's closing brace
    std::string file_path;
    int start_line = 0;
};

struct MethodPair {
    MethodDecl before;  // m_b
    MethodDecl after;   // m_a
    std::string change_id;
};

// Returns every method/constructor declaration with a body, in source order.
// Declarations inside another method's body (anonymous or local classes) are
// not returned separately; their text belongs to the enclosing method.
// Throws UserError if braces are unbalanced.
std::vector<MethodDecl> extract_methods(const std::string& file_text);

// Pairs pre and post methods by exact (name, arity, parameter type texts).
// Unmatched methods on either side are dropped. With arity_only_matching,
// parameter type texts are ignored (off by default).
std::vector<std::pair<MethodDecl, MethodDecl>> match_methods(
    const std::vector<MethodDecl>& pre, const std::vector<MethodDecl>& post,
    bool arity_only_matching = false);

// Keeps only pairs whose stripped token text sequences differ.
std::vector<MethodPair> changed_pairs(
    const std::vector<std::pair<MethodDecl, MethodDecl>>& matched,
    const std::string& change_id);

// Stripped token texts of a method's source.
std::vector<std::string> method_token_texts(const MethodDecl& m);

// Newline-delimited corpus records for extracted pairs, source texts base64.
std::string method_pair_to_json_line(const MethodPair& pair);
MethodPair method_pair_from_json_line(const std::string& line);
void save_method_pairs(const std::filesystem::path& out_file,
                       const std::vector<MethodPair>& pairs);
std::vector<MethodPair> load_method_pairs(const std::filesystem::path& in_file);

}  // namespace codetrans
