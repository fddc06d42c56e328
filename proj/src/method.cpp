// SPDX-License-Identifier: Apache-2.0
#include "codetrans/method.hpp"

#include <fstream>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

namespace {

enum class Frame { ClassLike, MethodBody, Other };

struct Scanner {
    std::vector<Token> all;                 // full token stream
    std::vector<std::size_t> sem;           // semantic index -> all index
    std::unordered_map<std::size_t, std::size_t> paren_match;  // sem open -> sem close
    std::unordered_map<std::size_t, std::size_t> brace_match;

    explicit Scanner(const std::string& text) {
        all = tokenize(text);
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i].kind != TokenKind::Whitespace && all[i].kind != TokenKind::Comment)
                sem.push_back(i);
        }
        std::vector<std::size_t> parens, braces;
        for (std::size_t si = 0; si < sem.size(); ++si) {
            const std::string& t = tok(si).text;
            if (t == "(") parens.push_back(si);
            else if (t == ")") {
                if (!parens.empty()) {
                    paren_match[parens.back()] = si;
                    parens.pop_back();
                }
            } else if (t == "{") braces.push_back(si);
            else if (t == "}") {
                if (braces.empty()) throw UserError("unbalanced braces");
                brace_match[braces.back()] = si;
                braces.pop_back();
            }
        }
        if (!braces.empty()) throw UserError("unbalanced braces");
    }

    const Token& tok(std::size_t si) const { return all[sem[si]]; }
    bool has(std::size_t si) const { return si < sem.size(); }

    // Exact source slice, interior whitespace and comments included.
    std::string slice(std::size_t sem_from, std::size_t sem_to_incl) const {
        std::string out;
        for (std::size_t i = sem[sem_from]; i <= sem[sem_to_incl]; ++i) out += all[i].text;
        return out;
    }
};

// Classifies what a '{' at sem index si opens, by looking back over its
// header. Method bodies are detected separately via the signature pattern,
// so ')' right before '{' means control flow or an anonymous class here.
Frame classify_brace(const Scanner& s, std::size_t si) {
    std::size_t k = si;
    while (k > 0) {
        const Token& p = s.tok(k - 1);
        const std::string& t = p.text;
        if (t == "class" || t == "interface" || t == "enum") return Frame::ClassLike;
        if (t == ")" || t == ";" || t == "{" || t == "}" || t == "=" || t == "->" || t == "new")
            return Frame::Other;
        --k;
    }
    return Frame::Other;
}

// True when sem index si holds the method-name identifier of a declaration
// with a body; on success fills body_open with the '{' sem index and
// close_paren with the ')' of the parameter list.
bool signature_at(const Scanner& s, std::size_t si, std::size_t* close_paren,
                  std::size_t* body_open) {
    if (s.tok(si).kind != TokenKind::Identifier) return false;
    if (!s.has(si + 1) || s.tok(si + 1).text != "(") return false;
    if (si > 0 && s.tok(si - 1).text == "new") return false;
    auto it = s.paren_match.find(si + 1);
    if (it == s.paren_match.end()) return false;
    std::size_t j = it->second + 1;
    if (s.has(j) && s.tok(j).text == "throws") {
        ++j;
        while (s.has(j)) {
            const std::string& t = s.tok(j).text;
            if (t == "{") break;
            if (s.tok(j).kind == TokenKind::Identifier || t == "." || t == ",") {
                ++j;
                continue;
            }
            return false;
        }
    }
    if (!s.has(j) || s.tok(j).text != "{") return false;
    *close_paren = it->second;
    *body_open = j;
    return true;
}

// Start of the declaration that contains sem index si: the token right after
// the previous ';', '{' or '}' (annotations and modifiers included).
std::size_t declaration_start(const Scanner& s, std::size_t si) {
    std::size_t k = si;
    while (k > 0) {
        const std::string& t = s.tok(k - 1).text;
        if (t == ";" || t == "{" || t == "}") break;
        --k;
    }
    return k;
}

std::vector<std::string> parse_param_types(const Scanner& s, std::size_t open_paren,
                                           std::size_t close_paren) {
    std::vector<std::string> types;
    std::size_t i = open_paren + 1;
    if (i >= close_paren) return types;
    // Split on top-level commas.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t start = i;
    int paren = 0, angle = 0;
    for (std::size_t k = i; k < close_paren; ++k) {
        const std::string& t = s.tok(k).text;
        if (t == "(") ++paren;
        else if (t == ")") --paren;
        else if (t == "<") ++angle;
        else if (t == ">") --angle;
        else if (t == ">>") angle -= 2;
        else if (t == ">>>") angle -= 3;
        else if (t == "," && paren == 0 && angle <= 0) {
            groups.emplace_back(start, k);
            start = k + 1;
            angle = 0;
        }
    }
    groups.emplace_back(start, close_paren);

    for (auto [lo, hi] : groups) {
        if (lo >= hi) continue;
        std::vector<std::size_t> toks;
        std::size_t k = lo;
        while (k < hi) {
            const Token& t = s.tok(k);
            if (t.text == "@") {  // skip annotation: @ Name(.Name)* (args)?
                ++k;
                while (k < hi && (s.tok(k).kind == TokenKind::Identifier || s.tok(k).text == "."))
                    ++k;
                if (k < hi && s.tok(k).text == "(") {
                    auto m = s.paren_match.find(k);
                    k = (m != s.paren_match.end()) ? m->second + 1 : hi;
                }
                continue;
            }
            if (t.text == "final") {
                ++k;
                continue;
            }
            toks.push_back(k);
            ++k;
        }
        // Last identifier is the parameter name; what precedes it is the type.
        std::size_t name_pos = toks.size();
        for (std::size_t idx = toks.size(); idx > 0; --idx) {
            if (s.tok(toks[idx - 1]).kind == TokenKind::Identifier) {
                name_pos = idx - 1;
                break;
            }
        }
        std::string type_text;
        for (std::size_t idx = 0; idx < toks.size(); ++idx) {
            if (idx == name_pos) continue;
            type_text += s.tok(toks[idx]).text;
        }
        types.push_back(type_text);
    }
    return types;
}

}  // namespace

std::vector<MethodDecl> extract_methods(const std::string& file_text) {
    Scanner s(file_text);
    std::vector<MethodDecl> out;
    std::vector<Frame> stack;

    for (std::size_t si = 0; si < s.sem.size(); ++si) {
        const std::string& text = s.tok(si).text;
        if (text == "}") {
            if (!stack.empty()) stack.pop_back();
            continue;
        }
        if (text == "{") {
            stack.push_back(classify_brace(s, si));
            continue;
        }
        std::size_t close_paren = 0, body_open = 0;
        if (!signature_at(s, si, &close_paren, &body_open)) continue;

        bool enclosing_all_class = true;
        for (Frame f : stack) {
            if (f != Frame::ClassLike) {
                enclosing_all_class = false;
                break;
            }
        }
        if (!enclosing_all_class) continue;

        auto body_close_it = s.brace_match.find(body_open);
        if (body_close_it == s.brace_match.end()) continue;
        std::size_t body_close = body_close_it->second;

        MethodDecl decl;
        decl.name = s.tok(si).text;
        decl.param_type_texts = parse_param_types(s, si + 1, close_paren);
        decl.param_arity = static_cast<int>(decl.param_type_texts.size());
        std::size_t decl_start = declaration_start(s, si);
        decl.source_text = s.slice(decl_start, body_close);
        decl.start_line = s.tok(decl_start).line;
        out.push_back(std::move(decl));

        // Enter the body so inner declarations are suppressed; scanning
        // continues from the '{' for frame bookkeeping.
        stack.push_back(Frame::MethodBody);
        si = body_open;
    }
    return out;
}

std::vector<std::pair<MethodDecl, MethodDecl>> match_methods(
    const std::vector<MethodDecl>& pre, const std::vector<MethodDecl>& post,
    bool arity_only_matching) {
    auto key_of = [&](const MethodDecl& m) {
        std::string key = m.name + "/" + std::to_string(m.param_arity);
        if (!arity_only_matching) {
            for (const auto& t : m.param_type_texts) key += "/" + t;
        }
        return key;
    };
    std::map<std::string, std::vector<std::size_t>> post_by_key;
    for (std::size_t i = 0; i < post.size(); ++i) post_by_key[key_of(post[i])].push_back(i);

    std::vector<std::pair<MethodDecl, MethodDecl>> out;
    std::map<std::string, std::size_t> used;  // key -> next unused post index slot
    for (const auto& m : pre) {
        std::string key = key_of(m);
        auto it = post_by_key.find(key);
        if (it == post_by_key.end()) continue;
        std::size_t& cursor = used[key];
        if (cursor >= it->second.size()) continue;
        out.emplace_back(m, post[it->second[cursor]]);
        ++cursor;
    }
    return out;
}

std::vector<std::string> method_token_texts(const MethodDecl& m) {
    return token_texts(strip_nonsemantic(tokenize(m.source_text)));
}

std::vector<MethodPair> changed_pairs(
    const std::vector<std::pair<MethodDecl, MethodDecl>>& matched,
    const std::string& change_id) {
    std::vector<MethodPair> out;
    for (const auto& [before, after] : matched) {
        if (method_token_texts(before) != method_token_texts(after)) {
            out.push_back(MethodPair{before, after, change_id});
        }
    }
    return out;
}

std::string method_pair_to_json_line(const MethodPair& pair) {
    nlohmann::json j;
    j["change_id"] = pair.change_id;
    j["path"] = pair.before.file_path;
    j["name"] = pair.before.name;
    j["arity"] = pair.before.param_arity;
    j["param_types"] = pair.before.param_type_texts;
    j["before_line"] = pair.before.start_line;
    j["after_line"] = pair.after.start_line;
    j["before_b64"] = base64_encode(pair.before.source_text);
    j["after_b64"] = base64_encode(pair.after.source_text);
    return j.dump();
}

MethodPair method_pair_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    MethodPair pair;
    pair.change_id = j.value("change_id", "");
    pair.before.file_path = j.value("path", "");
    pair.after.file_path = pair.before.file_path;
    pair.before.name = j.value("name", "");
    pair.after.name = pair.before.name;
    pair.before.param_arity = j.value("arity", 0);
    pair.after.param_arity = pair.before.param_arity;
    if (j.contains("param_types")) {
        pair.before.param_type_texts = j.at("param_types").get<std::vector<std::string>>();
        pair.after.param_type_texts = pair.before.param_type_texts;
    }
    pair.before.start_line = j.value("before_line", 0);
    pair.after.start_line = j.value("after_line", 0);
    pair.before.source_text = base64_decode(j.at("before_b64").get<std::string>());
    pair.after.source_text = base64_decode(j.at("after_b64").get<std::string>());
    return pair;
}

void save_method_pairs(const std::filesystem::path& out_file,
                       const std::vector<MethodPair>& pairs) {
    std::string buf;
    for (const MethodPair& p : pairs) {
        buf += method_pair_to_json_line(p);
        buf += '\n';
    }
    write_file_atomic(out_file, buf);
}

std::vector<MethodPair> load_method_pairs(const std::filesystem::path& in_file) {
    std::ifstream in(in_file);
    if (!in) throw UserError("cannot open method-pair corpus: " + in_file.string());
    std::vector<MethodPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(method_pair_from_json_line(line));
    }
    return out;
}

}  // namespace codetrans
