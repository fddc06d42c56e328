// SPDX-License-Identifier: Apache-2.0
#include "codetrans/vocab.hpp"

namespace codetrans {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
    tokens_ = {"<PAD>", "<SOS>", "<EOS>", "<UNK>"};
    for (const auto& t : tokens) {
        if (!index_.count(t)) {
            // specials stay unique even if a corpus token collides textually
            if (t == "<PAD>" || t == "<SOS>" || t == "<EOS>" || t == "<UNK>") continue;
            index_.emplace(t, static_cast<int>(tokens_.size()));
            tokens_.push_back(t);
        }
    }
    for (int i = 0; i < 4; ++i) index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences) {
    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> seen;
    for (const auto& seq : sequences) {
        for (const auto& t : seq) {
            if (seen.emplace(t, 1).second) tokens.push_back(t);
        }
    }
    return Vocabulary(tokens);
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(index_of(t));
    return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& indices) const {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(token_at(i));
    return out;
}

}  // namespace codetrans
