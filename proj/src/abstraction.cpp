// SPDX-License-Identifier: Apache-2.0
#include "codetrans/abstraction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codetrans/util.hpp"

namespace codetrans {

namespace {

const char* kCategoryNames[kIdCategoryCount] = {"TYPE",  "METHOD", "VAR",   "INT",
                                                "FLOAT", "CHAR",   "STRING"};

IdCategory category_for(const RoledToken& rt) {
    switch (rt.role) {
        case RoleKind::TypeName: return IdCategory::Type;
        case RoleKind::MethodName: return IdCategory::Method;
        case RoleKind::VarName: return IdCategory::Var;
        case RoleKind::Literal:
            switch (rt.category) {
                case LiteralCategory::Int: return IdCategory::Int;
                case LiteralCategory::Float: return IdCategory::Float;
                case LiteralCategory::Char: return IdCategory::Char;
                case LiteralCategory::String: return IdCategory::String;
            }
            break;
        default: break;
    }
    return IdCategory::Var;  // unreachable for abstractable tokens
}

bool is_abstractable(const RoledToken& rt) {
    return rt.role == RoleKind::TypeName || rt.role == RoleKind::MethodName ||
           rt.role == RoleKind::VarName || rt.role == RoleKind::Literal;
}

bool is_identifier_like(const std::string& text) {
    if (text.empty()) return false;
    unsigned char c0 = static_cast<unsigned char>(text[0]);
    if (!(std::isalpha(c0) || c0 == '_' || c0 == '$' || c0 >= 0x80)) return false;
    for (unsigned char c : text) {
        if (!(std::isalnum(c) || c == '_' || c == '$' || c >= 0x80)) return false;
    }
    return true;
}

}  // namespace

const char* id_category_name(IdCategory cat) { return kCategoryNames[int(cat)]; }

void IdiomList::rebuild_index() {
    lookup_.clear();
    lookup_.insert(entries.begin(), entries.end());
}

std::string IdiomList::to_text() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out << (i < counts.size() ? counts[i] : 0) << '\t' << entries[i] << '\n';
    }
    return out.str();
}

IdiomList IdiomList::from_text(const std::string& text) {
    IdiomList list;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw UserError("malformed idiom list line: " + line);
        list.counts.push_back(std::stoll(line.substr(0, tab)));
        list.entries.push_back(line.substr(tab + 1));
    }
    list.k = static_cast<int>(list.entries.size());
    list.rebuild_index();
    return list;
}

std::string IdMapping::get_or_assign(IdCategory cat, const std::string& text) {
    auto& idx = index_[int(cat)];
    auto it = idx.find(text);
    int id;
    if (it != idx.end()) {
        id = it->second;
    } else {
        id = static_cast<int>(by_category_[int(cat)].size());
        by_category_[int(cat)].push_back(text);
        idx.emplace(text, id);
    }
    return std::string(kCategoryNames[int(cat)]) + "_" + std::to_string(id);
}

std::optional<std::string> IdMapping::lookup_forward(IdCategory cat,
                                                     const std::string& text) const {
    const auto& idx = index_[int(cat)];
    auto it = idx.find(text);
    if (it == idx.end()) return std::nullopt;
    return std::string(kCategoryNames[int(cat)]) + "_" + std::to_string(it->second);
}

std::optional<std::string> IdMapping::lookup_backward(const std::string& id) const {
    int number = -1;
    auto cat = parse_abstract_id(id, &number);
    if (!cat) return std::nullopt;
    const auto& texts = by_category_[int(*cat)];
    if (number < 0 || static_cast<std::size_t>(number) >= texts.size()) return std::nullopt;
    return texts[number];
}

bool is_abstract_id(const std::string& token) { return parse_abstract_id(token).has_value(); }

std::optional<IdCategory> parse_abstract_id(const std::string& token, int* number) {
    auto underscore = token.rfind('_');
    if (underscore == std::string::npos || underscore + 1 >= token.size()) return std::nullopt;
    for (std::size_t i = underscore + 1; i < token.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(token[i]))) return std::nullopt;
    }
    std::string prefix = token.substr(0, underscore);
    for (int c = 0; c < kIdCategoryCount; ++c) {
        if (prefix == kCategoryNames[c]) {
            if (number) *number = std::stoi(token.substr(underscore + 1));
            return static_cast<IdCategory>(c);
        }
    }
    return std::nullopt;
}

std::vector<std::string> abstract_source(const std::string& source, const IdiomList& idioms,
                                         IdMapping& mapping) {
    auto roled = classify_roles(tokenize(source));
    std::vector<std::string> out;
    out.reserve(roled.size());
    for (const RoledToken& rt : roled) {
        if (rt.token.kind == TokenKind::Whitespace || rt.token.kind == TokenKind::Comment)
            continue;
        if (is_abstractable(rt) && !idioms.contains(rt.token.text)) {
            out.push_back(mapping.get_or_assign(category_for(rt), rt.token.text));
        } else {
            out.push_back(rt.token.text);
        }
    }
    return out;
}

AbstractedPair abstract_pair(const MethodPair& pair, const IdiomList& idioms) {
    AbstractedPair ap;
    ap.am_b = abstract_source(pair.before.source_text, idioms, ap.mapping);
    ap.am_a = abstract_source(pair.after.source_text, idioms, ap.mapping);
    ap.origin = PairOrigin{pair.change_id, pair.before.file_path, pair.before.name,
                           pair.before.start_line};
    return ap;
}

std::string concretize(const std::vector<std::string>& tokens, const IdMapping& mapping) {
    std::vector<std::string> concrete;
    concrete.reserve(tokens.size());
    for (const std::string& t : tokens) {
        if (is_abstract_id(t)) {
            auto text = mapping.lookup_backward(t);
            if (!text) throw ConcretizeError(t);
            concrete.push_back(*text);
        } else {
            concrete.push_back(t);
        }
    }
    return render_source(concrete);
}

std::string render_source(const std::vector<std::string>& tokens) {
    std::string out;
    std::string line;
    int depth = 0;
    int paren_depth = 0;

    auto flush = [&](int indent) {
        if (line.empty()) return;
        for (int i = 0; i < indent * 4; ++i) out += ' ';
        out += line;
        out += '\n';
        line.clear();
    };

    std::string prev;
    for (const std::string& t : tokens) {
        bool no_space = false;
        if (line.empty()) {
            no_space = true;
        } else if (t == ";" || t == ",") {
            no_space = true;
        } else if (t == "." && !(std::isdigit(static_cast<unsigned char>(prev.back())))) {
            no_space = true;
        } else if (prev == "." && !std::isdigit(static_cast<unsigned char>(t[0]))) {
            no_space = true;
        } else if (t == "(" && (is_identifier_like(prev) && !is_java_keyword(prev))) {
            no_space = true;
        }
        if (!no_space) line += ' ';
        line += t;
        prev = t;

        if (t == "(") ++paren_depth;
        else if (t == ")") --paren_depth;

        if (t == "{" && paren_depth == 0) {
            flush(depth);
            ++depth;
        } else if (t == "}" && paren_depth == 0) {
            // '}' starts its own line at the enclosing depth.
            line.erase(line.size() - 1);
            if (!line.empty() && line.back() == ' ') line.pop_back();
            flush(depth);
            --depth;
            line = "}";
            flush(depth);
            prev.clear();
        } else if (t == ";" && paren_depth == 0) {
            flush(depth);
        }
    }
    flush(depth);
    return out;
}

IdiomList compute_idioms(const std::vector<MethodPair>& corpus, int k, unsigned nthreads) {
    if (k <= 0) throw UserError("idiom count K must be positive");

    auto count_into = [](const std::string& source, std::map<std::string, long long>& counts) {
        for (const RoledToken& rt : classify_roles(tokenize(source))) {
            if (is_abstractable(rt)) ++counts[rt.token.text];
        }
    };

    // Parallel reduce: per-chunk counting, associative merge.
    const std::size_t kChunk = 64;
    std::size_t nchunks = (corpus.size() + kChunk - 1) / kChunk;
    std::vector<std::map<std::string, long long>> partial(nchunks);
    parallel_for(nchunks, nthreads, [&](std::size_t c) {
        std::size_t lo = c * kChunk;
        std::size_t hi = std::min(corpus.size(), lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) {
            count_into(corpus[i].before.source_text, partial[c]);
            count_into(corpus[i].after.source_text, partial[c]);
        }
    });
    std::map<std::string, long long> counts;
    for (auto& p : partial) {
        for (auto& [text, n] : p) counts[text] += n;
    }

    std::vector<std::pair<std::string, long long>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(k);

    IdiomList list;
    list.k = k;
    for (auto& [text, n] : ranked) {
        list.entries.push_back(text);
        list.counts.push_back(n);
    }
    list.rebuild_index();
    return list;
}

IdMapping IdMapping::from_texts(std::array<std::vector<std::string>, kIdCategoryCount> texts) {
    IdMapping m;
    for (int c = 0; c < kIdCategoryCount; ++c) {
        m.by_category_[c] = std::move(texts[c]);
        for (std::size_t i = 0; i < m.by_category_[c].size(); ++i) {
            m.index_[c].emplace(m.by_category_[c][i], static_cast<int>(i));
        }
    }
    return m;
}

VocabStats vocab_stats(const std::vector<MethodPair>& corpus, const IdiomList& idioms) {
    VocabStats stats;
    std::unordered_set<std::string> raw, abstracted;
    for (const MethodPair& pair : corpus) {
        for (const auto& t : method_token_texts(pair.before)) raw.insert(t);
        for (const auto& t : method_token_texts(pair.after)) raw.insert(t);
        AbstractedPair ap = abstract_pair(pair, idioms);
        abstracted.insert(ap.am_b.begin(), ap.am_b.end());
        abstracted.insert(ap.am_a.begin(), ap.am_a.end());
    }
    stats.raw_vocab_size = raw.size();
    stats.abstracted_vocab_size = abstracted.size();
    return stats;
}

std::string abstracted_pair_to_json_line(const AbstractedPair& pair) {
    nlohmann::json j;
    j["am_b"] = pair.am_b;
    j["am_a"] = pair.am_a;
    nlohmann::json mapping;
    for (int c = 0; c < kIdCategoryCount; ++c) {
        mapping[kCategoryNames[c]] = pair.mapping.texts(static_cast<IdCategory>(c));
    }
    j["mapping"] = std::move(mapping);
    j["origin"] = {{"change_id", pair.origin.change_id},
                   {"path", pair.origin.file_path},
                   {"method", pair.origin.method_name},
                   {"line", pair.origin.start_line}};
    return j.dump();
}

AbstractedPair abstracted_pair_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    AbstractedPair pair;
    pair.am_b = j.at("am_b").get<std::vector<std::string>>();
    pair.am_a = j.at("am_a").get<std::vector<std::string>>();
    std::array<std::vector<std::string>, kIdCategoryCount> texts;
    const auto& mapping = j.at("mapping");
    for (int c = 0; c < kIdCategoryCount; ++c) {
        if (mapping.contains(kCategoryNames[c]))
            texts[c] = mapping.at(kCategoryNames[c]).get<std::vector<std::string>>();
    }
    pair.mapping = IdMapping::from_texts(std::move(texts));
    if (j.contains("origin")) {
        const auto& o = j.at("origin");
        pair.origin.change_id = o.value("change_id", "");
        pair.origin.file_path = o.value("path", "");
        pair.origin.method_name = o.value("method", "");
        pair.origin.start_line = o.value("line", 0);
    }
    return pair;
}

void save_abstracted_pairs(const std::filesystem::path& out_file,
                           const std::vector<AbstractedPair>& pairs) {
    std::string buf;
    for (const AbstractedPair& p : pairs) {
        buf += abstracted_pair_to_json_line(p);
        buf += '\n';
    }
    write_file_atomic(out_file, buf);
}

std::vector<AbstractedPair> load_abstracted_pairs(const std::filesystem::path& in_file) {
    std::ifstream in(in_file);
    if (!in) throw UserError("cannot open abstracted corpus: " + in_file.string());
    std::vector<AbstractedPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(abstracted_pair_from_json_line(line));
    }
    return out;
}

}  // namespace codetrans
