// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "scsp/model.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scsp {

// Value-or-diagnostics carrier shared by the front-end stages.
template <typename T>
struct Result {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return value.has_value() && diagnostics.empty(); }
};

enum class TokenKind { Keyword, Identifier, Integer, Decimal, Symbol, Eof };

inline const char* to_string(TokenKind k) {
    switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Integer: return "integer";
    case TokenKind::Decimal: return "decimal";
    case TokenKind::Symbol: return "symbol";
    case TokenKind::Eof: return "end of input";
    }
    return "?";
}

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string text;
    int line = 1;
    int col = 1;

    bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
    bool is_symbol(std::string_view t) const { return is(TokenKind::Symbol, t); }
    bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }

    friend bool operator==(const Token&, const Token&) = default;
};

inline constexpr std::array<std::string_view, 11> keywords = {
    "int", "in", "stage", "stoch", "chance", "maximize", "minimize", "expected", "worst", "best", "spread",
};

inline bool is_keyword(std::string_view word) {
    for (auto k : keywords)
        if (k == word) return true;
    return false;
}

namespace detail {

inline constexpr std::array<std::string_view, 7> two_char_symbols = {"..", "\\/", "/\\", "!=", "<=", ">=", "->"};
inline constexpr std::string_view one_char_symbols = ";,{}():/+-*=<>!";

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

} // namespace detail

// Splits source text into tokens. Line comments and whitespace are skipped;
// the result always ends with an Eof token. A leading '-' is never part of
// an integer token.
inline Result<std::vector<Token>> tokenize(std::string_view text) {
    Result<std::vector<Token>> result;
    std::vector<Token> tokens;
    int line = 1;
    int col = 1;
    std::size_t i = 0;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };

    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        Token tok;
        tok.line = line;
        tok.col = col;
        if (detail::ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && detail::ident_char(text[j])) ++j;
            tok.text = std::string(text.substr(i, j - i));
            tok.kind = is_keyword(tok.text) ? TokenKind::Keyword : TokenKind::Identifier;
            advance(j - i);
        } else if (detail::digit(c)) {
            std::size_t j = i;
            while (j < text.size() && detail::digit(text[j])) ++j;
            tok.kind = TokenKind::Integer;
            // "0.25" is a decimal, "0..3" is integer-range-integer
            if (j + 1 < text.size() && text[j] == '.' && detail::digit(text[j + 1])) {
                ++j;
                while (j < text.size() && detail::digit(text[j])) ++j;
                tok.kind = TokenKind::Decimal;
            } else {
                std::int64_t v = 0;
                auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, v);
                if (ec != std::errc{}) {
                    result.diagnostics.push_back({"LEX_INT",
                                                  "integer literal '" + std::string(text.substr(i, j - i)) +
                                                      "' out of range",
                                                  {}, {}, line, col});
                    return result;
                }
            }
            tok.text = std::string(text.substr(i, j - i));
            advance(j - i);
        } else {
            tok.kind = TokenKind::Symbol;
            bool matched = false;
            if (i + 1 < text.size()) {
                std::string_view two = text.substr(i, 2);
                for (auto s : detail::two_char_symbols) {
                    if (s == two) {
                        tok.text = std::string(two);
                        matched = true;
                        break;
                    }
                }
            }
            if (!matched && detail::one_char_symbols.find(c) != std::string_view::npos) {
                tok.text = std::string(1, c);
                matched = true;
            }
            if (!matched) {
                std::string shown = static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f
                                        ? "byte " + std::to_string(static_cast<unsigned char>(c))
                                        : "'" + std::string(1, c) + "'";
                result.diagnostics.push_back({"LEX_CHAR", "unexpected character " + shown, {}, {}, line, col});
                return result;
            }
            advance(tok.text.size());
        }
        tokens.push_back(std::move(tok));
    }
    tokens.push_back(Token{TokenKind::Eof, "", line, col});
    result.value = std::move(tokens);
    return result;
}

} // namespace scsp
