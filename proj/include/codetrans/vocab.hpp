// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace codetrans {

// Token inventory over an abstracted corpus plus the four specials at fixed
// reserved indices.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kSos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;

    Vocabulary();
    explicit Vocabulary(const std::vector<std::string>& tokens);  // non-special tokens

    // Collects distinct tokens from the sequences in first-occurrence order.
    static Vocabulary build(const std::vector<std::vector<std::string>>& sequences);

    int size() const { return static_cast<int>(tokens_.size()); }
    int index_of(const std::string& token) const;  // kUnk when absent
    const std::string& token_at(int index) const { return tokens_.at(index); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> encode(const std::vector<std::string>& tokens) const;
    std::vector<std::string> decode(const std::vector<int>& indices) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace codetrans
