// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace codetrans {

enum class TokenKind {
    Keyword,
    Separator,
    Operator,
    Identifier,
    IntLit,
    FloatLit,
    CharLit,
    StringLit,
    BoolLit,
    NullLit,
    Comment,
    Whitespace,
};

enum class RoleKind {
    TypeName,
    MethodName,
    VarName,
    Literal,
    Plain,
};

enum class LiteralCategory { Int, Float, Char, String };

struct Token {
    TokenKind kind;
    std::string text;  // exact source slice; concatenating all tokens reproduces the input
    int line = 1;      // 1-based
    int col = 1;       // 1-based
};

struct RoledToken {
    Token token;
    RoleKind role = RoleKind::Plain;
    LiteralCategory category = LiteralCategory::Int;  // meaningful only when role == Literal
};

class LexError : public std::runtime_error {
public:
    LexError(const std::string& msg, int line, int col)
        : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line(line),
          col(col) {}
    int line;
    int col;
};

// Lossless lexer for the Java 8 lexical grammar: the concatenation of all
// token texts (whitespace and comments included) equals the input.
std::vector<Token> tokenize(const std::string& source);

// Total heuristic role classifier over the token stream; no parser involved.
// Adjacency is computed on the stream with whitespace/comments skipped.
std::vector<RoledToken> classify_roles(const std::vector<Token>& tokens);

// Drops Whitespace and Comment tokens, preserving order.
std::vector<Token> strip_nonsemantic(const std::vector<Token>& tokens);

bool is_java_keyword(const std::string& text);

const char* token_kind_name(TokenKind kind);
const char* role_name(RoleKind role, LiteralCategory category);

// Convenience: token texts of the stripped stream.
std::vector<std::string> token_texts(const std::vector<Token>& tokens);

}  // namespace codetrans
