// SPDX-License-Identifier: Apache-2.0
#pragma once

// Recursive-descent parser for the .scsp modeling language.
//
//   model          = { item } ;
//   item           = decisionDecl | stochDecl | constraintDecl | objectiveDecl ;
//   decisionDecl   = "int" ident "in" int ".." int "stage" int ";" ;
//   stochDecl      = "stoch" ident "in" "{" outcome { "," outcome } "}" "stage" int ";" ;
//   outcome        = int ":" prob ;
//   prob           = int "/" int | decimal ;
//   constraintDecl = [ "chance" "(" prob ")" ] expr ";" ;
//   objectiveDecl  = ("maximize"|"minimize") ("expected"|"worst"|"best"|"spread") expr ";" ;
//   expr           = orExpr [ "->" expr ] ;
//   orExpr         = andExpr { "\/" andExpr } ;
//   andExpr        = notExpr { "/\" notExpr } ;
//   notExpr        = [ "!" ] cmpExpr ;
//   cmpExpr        = sumExpr [ ("="|"!="|"<="|"<"|">="|">") sumExpr ] ;
//   sumExpr        = term { ("+"|"-") term } ;
//   term           = [ int "*" ] atom ;
//   atom           = int | ident | "(" expr ")" ;
//   int            = [ "-" ] INTEGER ;
//
// On a syntax error the parser reports what it expected, skips to the next
// ';' and carries on, so one run can report several errors.

#include "scsp/lexer.hpp"

#include <charconv>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace scsp {

struct Span {
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1; // one past the last character

    friend bool operator==(const Span&, const Span&) = default;
};

enum class AstExprKind { Int, Ident, Add, Sub, Scale, Cmp, And, Or, Not, Implies, Paren };

struct AstExpr {
    AstExprKind kind = AstExprKind::Int;
    std::int64_t value = 0; // Int literal, Scale coefficient
    std::string ident;
    CmpOp op = CmpOp::Eq;
    std::vector<std::shared_ptr<const AstExpr>> children;
    Span span;
};
using AstExprPtr = std::shared_ptr<const AstExpr>;

// A probability literal kept in source form; lowering turns it into a Rational.
struct AstProb {
    bool decimal = false;
    std::int64_t num = 0;
    std::int64_t den = 1;
    std::string text;
    Span span;
};

struct AstOutcome {
    std::int64_t value = 0;
    AstProb prob;
    Span span;
};

struct AstDecision {
    std::string name;
    Span name_span;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    int stage = 1;
    Span span;
};

struct AstStochastic {
    std::string name;
    Span name_span;
    std::vector<AstOutcome> outcomes;
    int stage = 1;
    Span span;
};

struct AstConstraint {
    std::optional<AstProb> chance;
    AstExprPtr body;
    Span span;
};

struct AstObjective {
    Sense sense = Sense::Maximize;
    Aggregator aggregator = Aggregator::Expected;
    AstExprPtr body;
    Span span;
};

using AstItem = std::variant<AstDecision, AstStochastic, AstConstraint, AstObjective>;

struct Ast {
    std::vector<AstItem> items;
};

namespace detail {

struct SyntaxError {
    Diagnostic diagnostic;
};

class Parser {
public:
    explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

    Result<Ast> run() {
        Result<Ast> result;
        Ast ast;
        while (cur().kind != TokenKind::Eof) {
            try {
                ast.items.push_back(item());
            } catch (const SyntaxError& e) {
                result.diagnostics.push_back(e.diagnostic);
                if (e.diagnostic.code == "PARSE_EOF") break;
                recover();
            }
        }
        result.value = std::move(ast);
        return result;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const {
        std::size_t i = pos_ + n;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (t.kind != TokenKind::Eof) ++pos_;
        last_ = &t;
        return t;
    }

    Span start_span() const { return {cur().line, cur().col, cur().line, cur().col}; }
    Span finish(Span s) const {
        if (last_) {
            s.end_line = last_->line;
            s.end_col = last_->col + static_cast<int>(last_->text.size());
        }
        return s;
    }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = cur();
        Diagnostic d;
        if (t.kind == TokenKind::Eof) {
            d.code = "PARSE_EOF";
            d.message = "expected " + expected + ", found end of input";
        } else {
            d.code = "PARSE_EXPECTED";
            d.message = "expected " + expected + ", found '" + t.text + "'";
        }
        d.line = t.line;
        d.col = t.col;
        throw SyntaxError{d};
    }

    void expect_symbol(std::string_view s) {
        if (!cur().is_symbol(s)) fail("'" + std::string(s) + "'");
        take();
    }
    void expect_keyword(std::string_view s) {
        if (!cur().is_keyword(s)) fail("'" + std::string(s) + "'");
        take();
    }
    std::string identifier() {
        if (cur().kind != TokenKind::Identifier) fail("identifier");
        return take().text;
    }

    bool at_integer() const {
        return cur().kind == TokenKind::Integer || (cur().is_symbol("-") && ahead(1).kind == TokenKind::Integer);
    }

    std::int64_t integer() {
        bool negative = false;
        if (cur().is_symbol("-") && ahead(1).kind == TokenKind::Integer) {
            take();
            negative = true;
        }
        if (cur().kind != TokenKind::Integer) fail("integer");
        const std::string& text = take().text;
        std::int64_t v = 0;
        std::from_chars(text.data(), text.data() + text.size(), v);
        return negative ? -v : v;
    }

    int stage_number() {
        Span s = start_span();
        std::int64_t v = integer();
        if (v < INT32_MIN || v > INT32_MAX) {
            Diagnostic d{"PARSE_EXPECTED", "stage number out of range", {}, {}, s.line, s.col};
            throw SyntaxError{d};
        }
        return static_cast<int>(v);
    }

    AstProb prob() {
        AstProb p;
        p.span = start_span();
        if (cur().kind == TokenKind::Decimal) {
            p.decimal = true;
            p.text = take().text;
        } else if (at_integer()) {
            p.num = integer();
            expect_symbol("/");
            p.den = integer();
            p.text = std::to_string(p.num) + "/" + std::to_string(p.den);
        } else {
            fail("probability (a/b or decimal)");
        }
        p.span = finish(p.span);
        return p;
    }

    void semicolon() { expect_symbol(";"); }

    AstItem item() {
        const Token& t = cur();
        if (t.is_keyword("int")) return decision();
        if (t.is_keyword("stoch")) return stochastic();
        if (t.is_keyword("maximize") || t.is_keyword("minimize")) return objective();
        return constraint();
    }

    AstDecision decision() {
        AstDecision d;
        d.span = start_span();
        expect_keyword("int");
        d.name_span = start_span();
        d.name = identifier();
        d.name_span = finish(d.name_span);
        expect_keyword("in");
        d.lo = integer();
        expect_symbol("..");
        d.hi = integer();
        expect_keyword("stage");
        d.stage = stage_number();
        semicolon();
        d.span = finish(d.span);
        return d;
    }

    AstStochastic stochastic() {
        AstStochastic s;
        s.span = start_span();
        expect_keyword("stoch");
        s.name_span = start_span();
        s.name = identifier();
        s.name_span = finish(s.name_span);
        expect_keyword("in");
        expect_symbol("{");
        for (;;) {
            AstOutcome o;
            o.span = start_span();
            o.value = integer();
            expect_symbol(":");
            o.prob = prob();
            o.span = finish(o.span);
            s.outcomes.push_back(std::move(o));
            if (cur().is_symbol(",")) {
                take();
                continue;
            }
            if (cur().is_symbol("}")) break;
            fail("',' or '}'");
        }
        take();
        expect_keyword("stage");
        s.stage = stage_number();
        semicolon();
        s.span = finish(s.span);
        return s;
    }

    AstConstraint constraint() {
        AstConstraint c;
        c.span = start_span();
        if (cur().is_keyword("chance")) {
            take();
            expect_symbol("(");
            c.chance = prob();
            expect_symbol(")");
        }
        c.body = expr();
        semicolon();
        c.span = finish(c.span);
        return c;
    }

    AstObjective objective() {
        AstObjective o;
        o.span = start_span();
        o.sense = take().text == "maximize" ? Sense::Maximize : Sense::Minimize;
        const Token& agg = cur();
        if (agg.is_keyword("expected")) o.aggregator = Aggregator::Expected;
        else if (agg.is_keyword("worst")) o.aggregator = Aggregator::Worst;
        else if (agg.is_keyword("best")) o.aggregator = Aggregator::Best;
        else if (agg.is_keyword("spread")) o.aggregator = Aggregator::Spread;
        else fail("'expected', 'worst', 'best' or 'spread'");
        take();
        o.body = expr();
        semicolon();
        o.span = finish(o.span);
        return o;
    }

    static AstExprPtr node(AstExprKind kind, Span span, std::vector<AstExprPtr> children) {
        auto e = std::make_shared<AstExpr>();
        e->kind = kind;
        e->span = span;
        e->children = std::move(children);
        return e;
    }

    Span join(const Span& a, const Span& b) const { return {a.line, a.col, b.end_line, b.end_col}; }

    AstExprPtr expr() {
        AstExprPtr lhs = or_expr();
        if (cur().is_symbol("->")) {
            take();
            AstExprPtr rhs = expr();
            return node(AstExprKind::Implies, join(lhs->span, rhs->span), {lhs, rhs});
        }
        return lhs;
    }

    AstExprPtr or_expr() {
        AstExprPtr lhs = and_expr();
        while (cur().is_symbol("\\/")) {
            take();
            AstExprPtr rhs = and_expr();
            lhs = node(AstExprKind::Or, join(lhs->span, rhs->span), {lhs, rhs});
        }
        return lhs;
    }

    AstExprPtr and_expr() {
        AstExprPtr lhs = not_expr();
        while (cur().is_symbol("/\\")) {
            take();
            AstExprPtr rhs = not_expr();
            lhs = node(AstExprKind::And, join(lhs->span, rhs->span), {lhs, rhs});
        }
        return lhs;
    }

    AstExprPtr not_expr() {
        if (cur().is_symbol("!")) {
            Span s = start_span();
            take();
            AstExprPtr inner = cmp_expr();
            return node(AstExprKind::Not, join(s, inner->span), {inner});
        }
        return cmp_expr();
    }

    AstExprPtr cmp_expr() {
        AstExprPtr lhs = sum_expr();
        static const std::pair<std::string_view, CmpOp> ops[] = {
            {"=", CmpOp::Eq}, {"!=", CmpOp::Ne}, {"<=", CmpOp::Le},
            {"<", CmpOp::Lt}, {">=", CmpOp::Ge}, {">", CmpOp::Gt},
        };
        for (const auto& [text, op] : ops) {
            if (cur().is_symbol(text)) {
                take();
                AstExprPtr rhs = sum_expr();
                auto e = std::make_shared<AstExpr>();
                e->kind = AstExprKind::Cmp;
                e->op = op;
                e->span = join(lhs->span, rhs->span);
                e->children = {lhs, rhs};
                return e;
            }
        }
        return lhs;
    }

    AstExprPtr sum_expr() {
        AstExprPtr lhs = term();
        for (;;) {
            AstExprKind kind;
            if (cur().is_symbol("+")) kind = AstExprKind::Add;
            else if (cur().is_symbol("-")) kind = AstExprKind::Sub;
            else break;
            take();
            AstExprPtr rhs = term();
            lhs = node(kind, join(lhs->span, rhs->span), {lhs, rhs});
        }
        return lhs;
    }

    AstExprPtr term() {
        if (at_integer()) {
            std::size_t next = cur().is_symbol("-") ? 2 : 1;
            if (ahead(next).is_symbol("*")) {
                Span s = start_span();
                std::int64_t k = integer();
                take(); // '*'
                AstExprPtr inner = atom();
                auto e = std::make_shared<AstExpr>();
                e->kind = AstExprKind::Scale;
                e->value = k;
                e->span = join(s, inner->span);
                e->children = {inner};
                return e;
            }
        }
        return atom();
    }

    AstExprPtr atom() {
        Span s = start_span();
        if (at_integer()) {
            auto e = std::make_shared<AstExpr>();
            e->kind = AstExprKind::Int;
            e->value = integer();
            e->span = finish(s);
            return e;
        }
        if (cur().kind == TokenKind::Identifier) {
            auto e = std::make_shared<AstExpr>();
            e->kind = AstExprKind::Ident;
            e->ident = take().text;
            e->span = finish(s);
            return e;
        }
        if (cur().is_symbol("(")) {
            take();
            AstExprPtr inner = expr();
            expect_symbol(")");
            return node(AstExprKind::Paren, finish(s), {inner});
        }
        fail("integer, identifier or '('");
    }

    // Skip past the next ';' (or stop at end of input).
    void recover() {
        while (cur().kind != TokenKind::Eof) {
            if (take().is_symbol(";")) return;
        }
    }

    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
    const Token* last_ = nullptr;
};

} // namespace detail

// Parses a token stream (which must end with Eof) into an Ast. The Ast is
// returned even when diagnostics were reported; it then holds the items
// that parsed cleanly.
inline Result<Ast> parse(const std::vector<Token>& tokens) {
    if (tokens.empty() || tokens.back().kind != TokenKind::Eof) {
        Result<Ast> r;
        r.diagnostics.push_back({"PARSE_EOF", "token stream does not end with end-of-input", {}, {}, 1, 1});
        return r;
    }
    return detail::Parser(tokens).run();
}

} // namespace scsp
