// SPDX-License-Identifier: Apache-2.0
#include "scsp/lower.hpp"
#include "scsp/printer.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

using namespace scsp;

namespace {

std::vector<std::string> kinds_and_text(const std::vector<Token>& toks) {
    std::vector<std::string> out;
    for (const auto& t : toks) out.push_back(std::string(to_string(t.kind)) + ":" + t.text);
    return out;
}

Ast parse_ok(const std::string& text) {
    auto toks = tokenize(text);
    EXPECT_TRUE(toks.ok());
    auto ast = parse(*toks.value);
    EXPECT_TRUE(ast.ok()) << (ast.diagnostics.empty() ? "" : ast.diagnostics[0].message);
    return *ast.value;
}

std::vector<Diagnostic> model_errors(const std::string& text) { return parse_model(text).diagnostics; }

} // namespace

TEST(Tokenize, DecisionDeclaration) {
    auto r = tokenize("int x in 0..1 stage 1;");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(kinds_and_text(*r.value),
              (std::vector<std::string>{"keyword:int", "identifier:x", "keyword:in", "integer:0", "symbol:..",
                                        "integer:1", "keyword:stage", "integer:1", "symbol:;", "end of input:"}));
    EXPECT_EQ((*r.value)[1].col, 5);
}

TEST(Tokenize, EmptyInputIsJustEof) {
    auto r = tokenize("");
    ASSERT_TRUE(r.ok());
    ASSERT_EQ(r.value->size(), 1u);
    EXPECT_EQ(r.value->front().kind, TokenKind::Eof);
}

TEST(Tokenize, RejectsCharacterOutsideAlphabet) {
    auto r = tokenize("x @ y");
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].code, "LEX_CHAR");
    EXPECT_EQ(r.diagnostics[0].line, 1);
    EXPECT_EQ(r.diagnostics[0].col, 3);
}

TEST(Tokenize, CommentsMinusAndDecimals) {
    auto r = tokenize("// header\nx>=-3 /\\ 0.25 \\/ y->z // tail");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(kinds_and_text(*r.value),
              (std::vector<std::string>{"identifier:x", "symbol:>=", "symbol:-", "integer:3", "symbol:/\\",
                                        "decimal:0.25", "symbol:\\/", "identifier:y", "symbol:->", "identifier:z",
                                        "end of input:"}));
    EXPECT_EQ((*r.value)[0].line, 2);
}

TEST(Parse, ExpectedObjective) {
    Ast ast = parse_ok("maximize expected x + w;");
    ASSERT_EQ(ast.items.size(), 1u);
    const auto& o = std::get<AstObjective>(ast.items[0]);
    EXPECT_EQ(o.sense, Sense::Maximize);
    EXPECT_EQ(o.aggregator, Aggregator::Expected);
    ASSERT_EQ(o.body->kind, AstExprKind::Add);
    EXPECT_EQ(o.body->children[0]->ident, "x");
    EXPECT_EQ(o.body->children[1]->ident, "w");
}

TEST(Parse, ChanceConstraint) {
    Ast ast = parse_ok("chance(3/4) x >= w;");
    const auto& c = std::get<AstConstraint>(ast.items[0]);
    ASSERT_TRUE(c.chance);
    EXPECT_EQ(c.chance->num, 3);
    EXPECT_EQ(c.chance->den, 4);
    EXPECT_EQ(c.body->kind, AstExprKind::Cmp);
    EXPECT_EQ(c.body->op, CmpOp::Ge);
}

TEST(Parse, MissingUpperBound) {
    auto ast = parse(*tokenize("int x in 0..;").value);
    ASSERT_EQ(ast.diagnostics.size(), 1u);
    EXPECT_EQ(ast.diagnostics[0].code, "PARSE_EXPECTED");
    EXPECT_EQ(ast.diagnostics[0].col, 13);
    EXPECT_NE(ast.diagnostics[0].message.find("integer"), std::string::npos);
    EXPECT_NE(ast.diagnostics[0].message.find("';'"), std::string::npos);
}

TEST(Parse, RecoversAtSemicolonAndReportsSeveralErrors) {
    auto ast = parse(*tokenize("int x in 0..;\nint y in 0..2 stage 1;\nx + ;\nint z in 1..2 stage 1;").value);
    ASSERT_EQ(ast.diagnostics.size(), 2u);
    EXPECT_EQ(ast.diagnostics[0].line, 1);
    EXPECT_EQ(ast.diagnostics[1].line, 3);
    ASSERT_EQ(ast.value->items.size(), 2u);
    EXPECT_EQ(std::get<AstDecision>(ast.value->items[1]).name, "z");
}

TEST(Parse, UnexpectedEndOfInput) {
    auto ast = parse(*tokenize("int x in 0..1 stage 1").value);
    ASSERT_EQ(ast.diagnostics.size(), 1u);
    EXPECT_EQ(ast.diagnostics[0].code, "PARSE_EOF");
}

TEST(Parse, PrecedenceAndAssociativity) {
    auto m = parse_model("int x in 0..3 stage 1; int y in 0..3 stage 1;\n"
                         "x - y - 1 >= 0 \\/ x = 1 /\\ !y = 2 -> 2*(x + y) < 5 -> x != y;");
    ASSERT_TRUE(m.ok());
    const Expr& e = *m.value->constraints[0].body;
    // implies is right-assoc and loosest; or binds looser than and
    ASSERT_EQ(e.kind, ExprKind::Implies);
    EXPECT_EQ(e.args[1]->kind, ExprKind::Implies);
    const Expr& lhs = *e.args[0];
    ASSERT_EQ(lhs.kind, ExprKind::Or);
    EXPECT_EQ(lhs.args[1]->kind, ExprKind::And);
    EXPECT_EQ(lhs.args[1]->args[1]->kind, ExprKind::Not);
    // x - y - 1 is (x - y) - 1
    const Expr& diff = *lhs.args[0]->args[0];
    ASSERT_EQ(diff.kind, ExprKind::Sub);
    EXPECT_EQ(diff.args[0]->kind, ExprKind::Sub);
    EXPECT_EQ(diff.args[1]->value, 1);
}

TEST(Parse, Deterministic) {
    std::string text = "int x in 0..3 stage 1; stoch w in {1:0.5, 2:1/2} stage 1; chance(0.75) x >= w;";
    auto a = tokenize(text);
    auto b = tokenize(text);
    EXPECT_EQ(*a.value, *b.value);
    EXPECT_EQ(to_source(*parse_model(text).value), to_source(*parse_model(text).value));
}

TEST(Lower, DuplicateNameAtSecondDeclaration) {
    auto d = model_errors("int x in 0..1 stage 1;\nstoch x in {0:1/1} stage 1;");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].code, "NAME_DUP");
    EXPECT_EQ(d[0].line, 2);
    EXPECT_EQ(d[0].col, 7);
}

TEST(Lower, UnresolvedName) {
    auto d = model_errors("int x in 0..1 stage 1;\nx + z <= 1;");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].code, "NAME_UNRESOLVED");
    EXPECT_EQ(d[0].name, "z");
    EXPECT_EQ(d[0].line, 2);
    EXPECT_EQ(d[0].col, 5);
}

TEST(Lower, TwoStageModel) {
    auto r = parse_model("int x1 in 0..2 stage 1;\nstoch w1 in {1:1/3, 2:2/3} stage 1;\n"
                         "int x2 in 0..2 stage 2;\nx1 + x2 >= w1;\nminimize expected x1 + x2;");
    ASSERT_TRUE(r.ok());
    const auto& m = *r.value;
    EXPECT_EQ(m.stage_count, 2);
    ASSERT_EQ(m.stochastics.size(), 1u);
    EXPECT_EQ(m.stochastics[0].distribution[1].prob, Rational(2, 3));
    ASSERT_EQ(m.constraints.size(), 1u);
    EXPECT_EQ(m.constraints[0].kind, ConstraintKind::Hard);
    EXPECT_EQ(m.constraints[0].body->args[0]->kind, ExprKind::Add);
    ASSERT_TRUE(m.objective);
    EXPECT_EQ(m.objective->sense, Sense::Minimize);
}

TEST(Lower, DecimalsAreExact) {
    auto r = parse_model("int x in 0..1 stage 1; stoch w in {0:0.125, 1:0.875} stage 1; chance(0.5) x = w;");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.value->stochastics[0].distribution[0].prob, Rational(1, 8));
    EXPECT_EQ(r.value->constraints[0].theta, Rational(1, 2));
}

TEST(Lower, ValidationCodesCarryLocations) {
    auto d = model_errors("int x in 0..1 stage 1;\nstoch w in {0:1/2, 1:1/3} stage 1;\nchance(0/1) x = w;");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].code, "DIST_SUM");
    EXPECT_EQ(d[0].line, 2);
    EXPECT_EQ(d[1].code, "THETA_RANGE");
    EXPECT_EQ(d[1].line, 3);
    EXPECT_EQ(d[1].col, 8);
}

TEST(Lower, KindErrorsAndMultipleObjectives) {
    auto d = model_errors("int x in 0..1 stage 1;\nx + 1;\nmaximize expected x;\nminimize worst x = 1;");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].code, "EXPR_KIND");
    EXPECT_EQ(d[0].line, 2);
    EXPECT_EQ(d[1].code, "OBJ_MULTI");
    EXPECT_EQ(d[1].line, 4);
}

TEST(Lower, ZeroDenominatorAndMissingStage) {
    auto d = model_errors("int x in 0..1 stage 1; int y in 0..1 stage 3; stoch w in {0:1/0} stage 1;");
    std::vector<std::string> codes;
    for (const auto& x : d) codes.push_back(x.code);
    EXPECT_EQ(codes, (std::vector<std::string>{"PROB_FORMAT", "STAGE_EMPTY"}));
}

// Pretty-print then re-parse gives back the same model.
TEST(Printer, RoundTripProperty) {
    gen::Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        StochasticModel m = gen::random_model(rng);
        std::string text = to_source(m);
        auto back = parse_model(text);
        ASSERT_TRUE(back.ok()) << text << (back.diagnostics.empty() ? "" : back.diagnostics[0].message);
        EXPECT_TRUE(structurally_equal(m, *back.value)) << text << "\n---\n" << to_source(*back.value);
        EXPECT_EQ(to_source(*back.value), text);
    }
}

TEST(Printer, ParenthesizesWhereNeeded) {
    auto e = ex::sub(ex::var("a"), ex::add(ex::var("b"), ex::scale(-2, ex::add(ex::var("c"), ex::lit(-1)))));
    EXPECT_EQ(to_source(*e), "a - (b + -2*(c + -1))");
    auto b = ex::neg(ex::conj(ex::cmp(CmpOp::Eq, ex::var("a"), ex::lit(1)), ex::neg(ex::cmp(CmpOp::Lt, ex::var("b"), ex::lit(0)))));
    EXPECT_EQ(to_source(*b), "!(a = 1 /\\ !b < 0)");
}

// Every diagnostic points inside the text (end-of-input counts as inside).
TEST(Diagnostics, LocationsWithinInputProperty) {
    gen::Rng rng(5);
    const std::string alphabet = "intxwsoch 0123456789;:,.{}()/\\+-*=<>!\n";
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        int len = static_cast<int>(gen::uniform(rng, 0, 60));
        for (int k = 0; k < len; ++k) text += alphabet[static_cast<std::size_t>(gen::uniform(rng, 0, alphabet.size() - 1))];
        if (gen::coin(rng, 0.1)) text += "@";
        std::vector<std::string> lines;
        std::stringstream ss(text);
        for (std::string l; std::getline(ss, l);) lines.push_back(l);
        if (lines.empty() || text.back() == '\n') lines.push_back("");
        for (const auto& d : parse_model(text).diagnostics) {
            ASSERT_GE(d.line, 1) << text;
            ASSERT_LE(d.line, static_cast<int>(lines.size())) << text;
            ASSERT_GE(d.col, 1) << text;
            ASSERT_LE(d.col, static_cast<int>(lines[d.line - 1].size()) + 1) << text << " " << d.code;
        }
    }
}
