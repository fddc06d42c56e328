// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "codetrans/method.hpp"
#include "codetrans/token.hpp"

namespace codetrans {

// Identifier/literal categories used for abstract IDs, e.g. "METHOD_0".
enum class IdCategory : int { Type = 0, Method, Var, Int, Float, Char, String };
constexpr int kIdCategoryCount = 7;
const char* id_category_name(IdCategory cat);

// Top-K most frequent identifier/literal texts over a corpus, kept verbatim
// during abstraction. Membership is category-blind text matching.
struct IdiomList {
    std::vector<std::string> entries;  // frequency order: count desc, text asc
    std::vector<long long> counts;     // parallel to entries
    int k = 0;

    bool contains(const std::string& text) const { return lookup_.count(text) > 0; }
    void rebuild_index();

    std::string to_text() const;                     // "count<TAB>text" lines
    static IdiomList from_text(const std::string&);  // inverse of to_text

private:
    std::unordered_set<std::string> lookup_;
};

// Bidirectional map between concrete identifier/literal texts and reusable
// per-category IDs; IDs are dense from 0 within each category.
class IdMapping {
public:
    // Returns the ID for (category, text), assigning the next free one on
    // first sight.
    std::string get_or_assign(IdCategory cat, const std::string& text);
    std::optional<std::string> lookup_forward(IdCategory cat, const std::string& text) const;
    // Concrete text for an ID like "VAR_2"; nullopt when unmapped.
    std::optional<std::string> lookup_backward(const std::string& id) const;

    int count(IdCategory cat) const { return static_cast<int>(by_category_[int(cat)].size()); }
    const std::vector<std::string>& texts(IdCategory cat) const {
        return by_category_[int(cat)];
    }

    // Rebuilds a mapping from per-category text arrays (index == numeric ID).
    static IdMapping from_texts(std::array<std::vector<std::string>, kIdCategoryCount> texts);

private:
    std::array<std::vector<std::string>, kIdCategoryCount> by_category_;
    std::array<std::unordered_map<std::string, int>, kIdCategoryCount> index_;
};

struct PairOrigin {
    std::string change_id;
    std::string file_path;
    std::string method_name;
    int start_line = 0;
};

struct AbstractedPair {
    std::vector<std::string> am_b;
    std::vector<std::string> am_a;
    IdMapping mapping;
    PairOrigin origin;
};

// True for tokens of the form CATEGORY_<digits>.
bool is_abstract_id(const std::string& token);
std::optional<IdCategory> parse_abstract_id(const std::string& token, int* number = nullptr);

// Abstracts one method source: identifiers and literals become IDs unless
// they are idioms; keywords, separators, operators and boolean/null literals
// pass through verbatim. The mapping is extended in first-occurrence order.
std::vector<std::string> abstract_source(const std::string& source, const IdiomList& idioms,
                                         IdMapping& mapping);

// Abstracts m_b first, then m_a with the same mapping, so shared identifiers
// get the same ID and new ones in m_a extend the mapping.
AbstractedPair abstract_pair(const MethodPair& pair, const IdiomList& idioms);

// Raised when a token looks like an ID but is absent from the mapping.
class ConcretizeError : public std::runtime_error {
public:
    explicit ConcretizeError(const std::string& id)
        : std::runtime_error("unmapped abstract ID: " + id), id(id) {}
    std::string id;
};

// Maps IDs back to concrete texts and renders indented source.
std::string concretize(const std::vector<std::string>& tokens, const IdMapping& mapping);

// Deterministic pretty-printer: one statement per line, 4-space indent per
// brace depth, single spaces except before ';' and ',', around '.', and
// before '(' after a name.
std::string render_source(const std::vector<std::string>& tokens);

// K most frequent identifier/literal texts over all before+after methods;
// ties broken lexicographically. K must be > 0. Counting is a parallel
// reduce; pass nthreads = 1 to force serial.
IdiomList compute_idioms(const std::vector<MethodPair>& corpus, int k, unsigned nthreads = 0);

struct VocabStats {
    std::size_t raw_vocab_size = 0;
    std::size_t abstracted_vocab_size = 0;
};

// Distinct stripped token texts over the corpus, before and after abstraction.
VocabStats vocab_stats(const std::vector<MethodPair>& corpus, const IdiomList& idioms);

// One JSON object per line: token arrays, per-category mapping texts, origin.
std::string abstracted_pair_to_json_line(const AbstractedPair& pair);
AbstractedPair abstracted_pair_from_json_line(const std::string& line);
void save_abstracted_pairs(const std::filesystem::path& out_file,
                           const std::vector<AbstractedPair>& pairs);
std::vector<AbstractedPair> load_abstracted_pairs(const std::filesystem::path& in_file);

}  // namespace codetrans
