// SPDX-License-Identifier: Apache-2.0
#include "codetrans/token.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace codetrans {

namespace {

const std::unordered_set<std::string>& keyword_set() {
    // Java 8 reserved words. true/false/null are literals, not keywords.
    static const std::unordered_set<std::string> kw = {
        "abstract", "assert",   "boolean",  "break",      "byte",    "case",
        "catch",    "char",     "class",    "const",      "continue", "default",
        "do",       "double",   "else",     "enum",       "extends", "final",
        "finally",  "float",    "for",      "goto",       "if",      "implements",
        "import",   "instanceof", "int",    "interface",  "long",    "native",
        "new",      "package",  "private",  "protected",  "public",  "return",
        "short",    "static",   "strictfp", "super",      "switch",  "synchronized",
        "this",     "throw",    "throws",   "transient",  "try",     "void",
        "volatile", "while",
    };
    return kw;
}

// Multi-character operators, longest first so maximal munch works by ordering.
const std::array<const char*, 23> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "==", "<=", ">=", "!=", "&&", "||", "++", "--",
    "+=",   "-=",  "*=",  "/=",  "&=", "|=", "^=", "%=", "<<", ">>", "->",
};

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex_digit(unsigned char c) { return std::isxdigit(c); }

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            out.push_back(next_token());
        }
        return out;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;

    char peek(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    Token make(TokenKind kind, std::size_t start, int line, int col) {
        return Token{kind, src_.substr(start, pos_ - start), line, col};
    }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    Token next_token() {
        std::size_t start = pos_;
        int line = line_, col = col_;
        char c = peek();

        if (std::isspace(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
            return make(TokenKind::Whitespace, start, line, col);
        }
        if (c == '/' && peek(1) == '/') {
            while (pos_ < src_.size() && peek() != '\n') advance();
            return make(TokenKind::Comment, start, line, col);
        }
        if (c == '/' && peek(1) == '*') {
            advance(2);
            while (pos_ < src_.size() && !(peek() == '*' && peek(1) == '/')) advance();
            if (pos_ >= src_.size()) throw LexError("unterminated block comment", line, col);
            advance(2);
            return make(TokenKind::Comment, start, line, col);
        }
        if (c == '"') return string_literal(start, line, col);
        if (c == '\'') return char_literal(start, line, col);
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return number(start, line, col);
        if (is_ident_start(c)) return word(start, line, col);

        if (std::string("(){}[];,.@").find(c) != std::string::npos) {
            // "..." and "::" are handled below; "." followed by digit was handled above.
            if (c == '.' && peek(1) == '.' && peek(2) == '.') {
                advance(3);
                return make(TokenKind::Separator, start, line, col);
            }
            advance();
            return make(TokenKind::Separator, start, line, col);
        }

        if (c == ':' && peek(1) == ':') {
            advance(2);
            return make(TokenKind::Separator, start, line, col);
        }
        for (const char* op : kOperators) {
            std::size_t len = std::char_traits<char>::length(op);
            if (src_.compare(pos_, len, op) == 0) {
                advance(len);
                return make(TokenKind::Operator, start, line, col);
            }
        }
        if (std::string("=<>!~?:&|+-*/^%").find(c) != std::string::npos) {
            advance();
            return make(TokenKind::Operator, start, line, col);
        }
        throw LexError(std::string("unexpected character '") + c + "'", line, col);
    }

    Token string_literal(std::size_t start, int line, int col) {
        advance();  // opening quote
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == '\n') throw LexError("unterminated string literal", line, col);
            if (c == '\\') {
                advance(2);
                continue;
            }
            if (c == '"') {
                advance();
                return make(TokenKind::StringLit, start, line, col);
            }
            advance();
        }
        throw LexError("unterminated string literal", line, col);
    }

    Token char_literal(std::size_t start, int line, int col) {
        advance();  // opening quote
        while (pos_ < src_.size()) {
            char c = peek();
            if (c == '\n') throw LexError("unterminated char literal", line, col);
            if (c == '\\') {
                advance(2);
                continue;
            }
            if (c == '\'') {
                advance();
                return make(TokenKind::CharLit, start, line, col);
            }
            advance();
        }
        throw LexError("unterminated char literal", line, col);
    }

    // Decimal/hex/octal/binary integers and decimal/hex floats, with
    // underscores and suffixes kept inside the token text.
    Token number(std::size_t start, int line, int col) {
        bool is_float = false;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
            advance(2);
            while (is_hex_digit(peek()) || peek() == '_') advance();
            if (peek() == '.') {
                advance();
                while (is_hex_digit(peek()) || peek() == '_') advance();
                is_float = true;
            }
            if (peek() == 'p' || peek() == 'P') {
                advance();
                if (peek() == '+' || peek() == '-') advance();
                while (is_digit(peek())) advance();
                is_float = true;
            }
        } else if (peek() == '0' && (peek(1) == 'b' || peek(1) == 'B')) {
            advance(2);
            while (peek() == '0' || peek() == '1' || peek() == '_') advance();
        } else {
            while (is_digit(peek()) || peek() == '_') advance();
            if (peek() == '.' && dot_continues_float()) {
                advance();
                while (is_digit(peek()) || peek() == '_') advance();
                is_float = true;
            }
            if (peek() == 'e' || peek() == 'E') {
                char after = peek(1);
                if (is_digit(after) || ((after == '+' || after == '-') && is_digit(peek(2)))) {
                    advance();
                    if (peek() == '+' || peek() == '-') advance();
                    while (is_digit(peek()) || peek() == '_') advance();
                    is_float = true;
                }
            }
        }
        if (peek() == 'f' || peek() == 'F' || peek() == 'd' || peek() == 'D') {
            advance();
            is_float = true;
        } else if (peek() == 'l' || peek() == 'L') {
            advance();
        }
        return make(is_float ? TokenKind::FloatLit : TokenKind::IntLit, start, line, col);
    }

    // Decides whether the '.' at pos_ belongs to the float literal being
    // scanned. "5.0", "5.f", "5.e3" and trailing "5." are floats; "5.x"
    // keeps the dot separate.
    bool dot_continues_float() const {
        char n = peek(1);
        if (is_digit(n)) return true;
        if (n == 'f' || n == 'F' || n == 'd' || n == 'D') return true;
        if ((n == 'e' || n == 'E') &&
            (is_digit(peek(2)) || ((peek(2) == '+' || peek(2) == '-') && is_digit(peek(3)))))
            return true;
        return !is_ident_part(n) && n != '.';
    }

    Token word(std::size_t start, int line, int col) {
        while (pos_ < src_.size() && is_ident_part(peek())) advance();
        std::string text = src_.substr(start, pos_ - start);
        Token t{TokenKind::Identifier, text, line, col};
        if (text == "true" || text == "false") {
            t.kind = TokenKind::BoolLit;
        } else if (text == "null") {
            t.kind = TokenKind::NullLit;
        } else if (keyword_set().count(text)) {
            t.kind = TokenKind::Keyword;
        }
        return t;
    }
};

bool is_semantic(const Token& t) {
    return t.kind != TokenKind::Whitespace && t.kind != TokenKind::Comment;
}

// Role classification works on the semantic (stripped) view. Heuristic rules,
// in priority order, for an identifier at stripped index i:
//   1. part of a dotted name right after '@'              -> TypeName
//   2. followed by '(' (and not preceded by '.after-new') -> MethodName,
//      except directly after 'new' (constructor)          -> TypeName
//   3. after new/extends/implements/instanceof/throws     -> TypeName
//   4. inside or immediately before a generic <...> region-> TypeName
//   5. cast position: ( X ) followed by an operand        -> TypeName
//   6. declaration position: followed by ('['']')* ident  -> TypeName
//   7. preceded by '::'                                   -> MethodName
//   8. label: followed by ':' at statement start          -> Plain
//   9. otherwise                                          -> VarName
class RoleClassifier {
public:
    explicit RoleClassifier(const std::vector<Token>& tokens) : tokens_(tokens) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (is_semantic(tokens[i])) sem_.push_back(i);
        }
        type_pos_.assign(sem_.size(), false);
        mark_generic_regions();
    }

    std::vector<RoledToken> run() {
        std::vector<RoledToken> out;
        out.reserve(tokens_.size());
        for (const Token& t : tokens_) out.push_back(RoledToken{t, RoleKind::Plain});
        for (std::size_t si = 0; si < sem_.size(); ++si) {
            const Token& t = tok(si);
            RoledToken& rt = out[sem_[si]];
            switch (t.kind) {
                case TokenKind::IntLit:
                    rt.role = RoleKind::Literal;
                    rt.category = LiteralCategory::Int;
                    break;
                case TokenKind::FloatLit:
                    rt.role = RoleKind::Literal;
                    rt.category = LiteralCategory::Float;
                    break;
                case TokenKind::CharLit:
                    rt.role = RoleKind::Literal;
                    rt.category = LiteralCategory::Char;
                    break;
                case TokenKind::StringLit:
                    rt.role = RoleKind::Literal;
                    rt.category = LiteralCategory::String;
                    break;
                case TokenKind::Identifier:
                    rt.role = identifier_role(si);
                    break;
                default:
                    rt.role = RoleKind::Plain;
                    break;
            }
        }
        return out;
    }

private:
    const std::vector<Token>& tokens_;
    std::vector<std::size_t> sem_;   // stripped index -> token index
    std::vector<bool> type_pos_;     // stripped positions inside/heading a generic region

    const Token& tok(std::size_t si) const { return tokens_[sem_[si]]; }

    bool has(std::size_t si) const { return si < sem_.size(); }

    bool text_is(std::size_t si, const char* s) const {
        return has(si) && tok(si).text == s;
    }

    // Finds generic argument regions "< ... >" whose contents look like type
    // arguments, and marks both the contents and the identifier before '<'.
    // ">>" and ">>>" close two / three levels.
    void mark_generic_regions() {
        for (std::size_t i = 0; i + 1 < sem_.size(); ++i) {
            if (tok(i).text != "<") continue;
            // Candidate opener must follow an identifier to be a type application.
            if (i == 0 || tok(i - 1).kind != TokenKind::Identifier) continue;
            std::size_t j = i + 1;
            int depth = 1;
            bool ok = true;
            while (j < sem_.size() && depth > 0) {
                const Token& t = tok(j);
                if (t.text == "<") {
                    ++depth;
                } else if (t.text == ">") {
                    --depth;
                } else if (t.text == ">>") {
                    depth -= 2;
                } else if (t.text == ">>>") {
                    depth -= 3;
                } else if (t.kind == TokenKind::Identifier || t.text == "," || t.text == "." ||
                           t.text == "?" || t.text == "[" || t.text == "]" || t.text == "&" ||
                           t.text == "extends" || t.text == "super" ||
                           is_primitive_type(t)) {
                    // plausible type-argument token
                } else {
                    ok = false;
                    break;
                }
                ++j;
            }
            if (!ok || depth > 0) continue;
            type_pos_[i - 1] = true;
            for (std::size_t k = i + 1; k < j; ++k) {
                if (tok(k).kind == TokenKind::Identifier) type_pos_[k] = true;
            }
        }
    }

    static bool is_primitive_type(const Token& t) {
        if (t.kind != TokenKind::Keyword) return false;
        const std::string& s = t.text;
        return s == "boolean" || s == "byte" || s == "char" || s == "short" || s == "int" ||
               s == "long" || s == "float" || s == "double" || s == "void";
    }

    bool in_annotation_name(std::size_t si) const {
        // Walk left over ident/dot segments; annotation if '@' heads the chain.
        std::size_t k = si;
        while (k >= 2 && text_is(k - 1, ".") && tok(k - 2).kind == TokenKind::Identifier) k -= 2;
        return k >= 1 && text_is(k - 1, "@");
    }

    bool at_statement_start(std::size_t si) const {
        if (si == 0) return true;
        const std::string& p = tok(si - 1).text;
        return p == ";" || p == "{" || p == "}" || p == ":";
    }

    bool cast_position(std::size_t si) const {
        if (si == 0 || !text_is(si - 1, "(") || !text_is(si + 1, ")")) return false;
        if (!has(si + 2)) return false;
        const Token& n = tok(si + 2);
        if (n.kind == TokenKind::Identifier || n.kind == TokenKind::IntLit ||
            n.kind == TokenKind::FloatLit || n.kind == TokenKind::CharLit ||
            n.kind == TokenKind::StringLit)
            return true;
        return n.text == "(" || n.text == "this" || n.text == "new" || n.text == "!" ||
               n.text == "~";
    }

    bool declaration_position(std::size_t si) const {
        std::size_t k = si + 1;
        while (has(k + 1) && text_is(k, "[") && text_is(k + 1, "]")) k += 2;
        return has(k) && tok(k).kind == TokenKind::Identifier;
    }

    RoleKind identifier_role(std::size_t si) {
        if (in_annotation_name(si)) return RoleKind::TypeName;
        if (text_is(si + 1, "(")) {
            if (si > 0 && text_is(si - 1, "new")) return RoleKind::TypeName;
            return RoleKind::MethodName;
        }
        if (si > 0) {
            const std::string& p = tok(si - 1).text;
            if (p == "new" || p == "extends" || p == "implements" || p == "instanceof" ||
                p == "throws")
                return RoleKind::TypeName;
            if (p == "::") return RoleKind::MethodName;
        }
        if (type_pos_[si]) return RoleKind::TypeName;
        if (cast_position(si)) return RoleKind::TypeName;
        if (declaration_position(si)) return RoleKind::TypeName;
        if (text_is(si + 1, ":") && !text_is(si + 2, ":") && at_statement_start(si))
            return RoleKind::Plain;  // label
        return RoleKind::VarName;
    }
};

}  // namespace

std::vector<Token> tokenize(const std::string& source) {
    return Lexer(source).run();
}

std::vector<RoledToken> classify_roles(const std::vector<Token>& tokens) {
    return RoleClassifier(tokens).run();
}

std::vector<Token> strip_nonsemantic(const std::vector<Token>& tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) {
        if (is_semantic(t)) out.push_back(t);
    }
    return out;
}

bool is_java_keyword(const std::string& text) { return keyword_set().count(text) > 0; }

const char* token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Keyword: return "Keyword";
        case TokenKind::Separator: return "Separator";
        case TokenKind::Operator: return "Operator";
        case TokenKind::Identifier: return "Identifier";
        case TokenKind::IntLit: return "IntLit";
        case TokenKind::FloatLit: return "FloatLit";
        case TokenKind::CharLit: return "CharLit";
        case TokenKind::StringLit: return "StringLit";
        case TokenKind::BoolLit: return "BoolLit";
        case TokenKind::NullLit: return "NullLit";
        case TokenKind::Comment: return "Comment";
        case TokenKind::Whitespace: return "Whitespace";
    }
    return "?";
}

const char* role_name(RoleKind role, LiteralCategory category) {
    switch (role) {
        case RoleKind::TypeName: return "TYPE";
        case RoleKind::MethodName: return "METHOD";
        case RoleKind::VarName: return "VAR";
        case RoleKind::Plain: return "PLAIN";
        case RoleKind::Literal:
            switch (category) {
                case LiteralCategory::Int: return "INT";
                case LiteralCategory::Float: return "FLOAT";
                case LiteralCategory::Char: return "CHAR";
                case LiteralCategory::String: return "STRING";
            }
    }
    return "?";
}

std::vector<std::string> token_texts(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) out.push_back(t.text);
    return out;
}

}  // namespace codetrans
