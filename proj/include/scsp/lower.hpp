// SPDX-License-Identifier: Apache-2.0
#pragma once

// Lowers a parsed Ast into a validated StochasticModel. Names are resolved
// against all declarations (declaration order in the file does not matter),
// probabilities become exact rationals and every diagnostic is mapped back
// to a source location.

#include "scsp/model.hpp"
#include "scsp/parser.hpp"

#include <map>
#include <string>
#include <string_view>

namespace scsp {

namespace detail {

inline void locate(Diagnostic& d, const Span& s) {
    d.line = s.line;
    d.col = s.col;
}

// "0.125" -> 1/8. Returns nullopt when the digits do not fit.
inline std::optional<Rational> decimal_to_rational(std::string_view text) {
    auto dot = text.find('.');
    std::string digits(text.substr(0, dot));
    std::size_t frac_len = 0;
    if (dot != std::string_view::npos) {
        digits += text.substr(dot + 1);
        frac_len = text.size() - dot - 1;
    }
    if (digits.size() > 18 || frac_len > 18) return std::nullopt;
    std::int64_t num = 0;
    std::from_chars(digits.data(), digits.data() + digits.size(), num);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(num, den);
}

class Lowering {
public:
    Result<StochasticModel> run(const Ast& ast) {
        StochasticModel model;
        std::map<std::string, bool> declared;

        // First pass: declarations, so constraints may reference names declared later.
        for (const auto& item : ast.items) {
            if (const auto* d = std::get_if<AstDecision>(&item)) {
                if (!declared.emplace(d->name, true).second) dup(d->name, d->name_span);
                decision_spans_.push_back(d->span);
                model.decisions.push_back({d->name, d->lo, d->hi, d->stage});
            } else if (const auto* s = std::get_if<AstStochastic>(&item)) {
                if (!declared.emplace(s->name, true).second) dup(s->name, s->name_span);
                stochastic_spans_.push_back(s->span);
                StochasticVar v{s->name, {}, s->stage};
                for (const auto& o : s->outcomes) v.distribution.push_back({o.value, probability(o.prob)});
                model.stochastics.push_back(std::move(v));
            }
        }
        names_ = declared;

        for (const auto& item : ast.items) {
            if (const auto* c = std::get_if<AstConstraint>(&item)) {
                constraint_spans_.push_back(c->span);
                ExprPtr body = expr(*c->body, true);
                if (c->chance) {
                    Rational theta = probability(*c->chance);
                    theta_spans_.push_back(c->chance->span);
                    model.constraints.push_back(ConstraintDecl::chance(theta, body));
                } else {
                    theta_spans_.push_back(c->span);
                    model.constraints.push_back(ConstraintDecl::hard(body));
                }
            } else if (const auto* o = std::get_if<AstObjective>(&item)) {
                if (model.objective) {
                    Diagnostic d{"OBJ_MULTI", "a model has at most one objective", {}, {Subject::Kind::Objective, 0}};
                    locate(d, o->span);
                    diags_.push_back(d);
                    continue;
                }
                objective_span_ = o->span;
                model.objective = ObjectiveDecl{o->sense, o->aggregator, expr(*o->body, false)};
            }
        }

        model.stage_count = max_declared_stage(model);

        for (auto d : validate_model(model).diagnostics) {
            // already reported with precise locations above
            if (d.code == "NAME_DUP" || d.code == "NAME_UNRESOLVED" || d.code == "EXPR_KIND") continue;
            locate(d, span_of(d));
            diags_.push_back(std::move(d));
        }

        Result<StochasticModel> r;
        r.diagnostics = std::move(diags_);
        if (r.diagnostics.empty()) r.value = std::move(model);
        return r;
    }

private:
    void dup(const std::string& name, const Span& at) {
        Diagnostic d{"NAME_DUP", "duplicate declaration of '" + name + "'", name, {}};
        locate(d, at);
        diags_.push_back(d);
    }

    Rational probability(const AstProb& p) {
        if (p.decimal) {
            if (auto r = decimal_to_rational(p.text)) return *r;
            Diagnostic d{"PROB_FORMAT", "decimal probability '" + p.text + "' has too many digits", {}, {}};
            locate(d, p.span);
            diags_.push_back(d);
            return Rational(1);
        }
        if (p.den == 0) {
            Diagnostic d{"PROB_FORMAT", "probability '" + p.text + "' has a zero denominator", {}, {}};
            locate(d, p.span);
            diags_.push_back(d);
            return Rational(1);
        }
        return Rational(p.num, p.den);
    }

    static bool is_bool(const AstExpr& e) {
        switch (e.kind) {
        case AstExprKind::Cmp:
        case AstExprKind::And:
        case AstExprKind::Or:
        case AstExprKind::Not:
        case AstExprKind::Implies: return true;
        case AstExprKind::Paren: return is_bool(*e.children[0]);
        default: return false;
        }
    }

    void kind_error(const AstExpr& e, bool want_bool) {
        Diagnostic d{"EXPR_KIND",
                     want_bool ? "expected a comparison or logical expression" : "expected an arithmetic expression",
                     {}, {}};
        locate(d, e.span);
        diags_.push_back(d);
    }

    ExprPtr expr(const AstExpr& e, bool want_bool) {
        if (e.kind == AstExprKind::Paren) return expr(*e.children[0], want_bool);
        if (is_bool(e) != want_bool) {
            kind_error(e, want_bool);
            return want_bool ? ex::cmp(CmpOp::Eq, ex::lit(0), ex::lit(0)) : ex::lit(0);
        }
        switch (e.kind) {
        case AstExprKind::Int: return ex::lit(e.value);
        case AstExprKind::Ident:
            if (!names_.count(e.ident)) {
                Diagnostic d{"NAME_UNRESOLVED", "undeclared variable '" + e.ident + "'", e.ident, {}};
                locate(d, e.span);
                diags_.push_back(d);
            }
            return ex::var(e.ident);
        case AstExprKind::Add: return ex::add(expr(*e.children[0], false), expr(*e.children[1], false));
        case AstExprKind::Sub: return ex::sub(expr(*e.children[0], false), expr(*e.children[1], false));
        case AstExprKind::Scale: return ex::scale(e.value, expr(*e.children[0], false));
        case AstExprKind::Cmp: return ex::cmp(e.op, expr(*e.children[0], false), expr(*e.children[1], false));
        case AstExprKind::And: return ex::conj(expr(*e.children[0], true), expr(*e.children[1], true));
        case AstExprKind::Or: return ex::disj(expr(*e.children[0], true), expr(*e.children[1], true));
        case AstExprKind::Not: return ex::neg(expr(*e.children[0], true));
        case AstExprKind::Implies: return ex::implies(expr(*e.children[0], true), expr(*e.children[1], true));
        case AstExprKind::Paren: break;
        }
        return ex::lit(0);
    }

    Span span_of(const Diagnostic& d) const {
        using K = Subject::Kind;
        switch (d.subject.kind) {
        case K::Decision: return decision_spans_.at(d.subject.index);
        case K::Stochastic: return stochastic_spans_.at(d.subject.index);
        case K::Constraint:
            return d.code == "THETA_RANGE" ? theta_spans_.at(d.subject.index)
                                           : constraint_spans_.at(d.subject.index);
        case K::Objective: return objective_span_;
        case K::Model: break;
        }
        return Span{};
    }

    std::map<std::string, bool> names_;
    std::vector<Span> decision_spans_;
    std::vector<Span> stochastic_spans_;
    std::vector<Span> constraint_spans_;
    std::vector<Span> theta_spans_;
    Span objective_span_;
    std::vector<Diagnostic> diags_;
};

} // namespace detail

inline Result<StochasticModel> lower(const Ast& ast) { return detail::Lowering{}.run(ast); }

// Source text straight to a validated model.
inline Result<StochasticModel> parse_model(std::string_view text) {
    Result<StochasticModel> r;
    auto toks = tokenize(text);
    if (!toks.ok()) {
        r.diagnostics = std::move(toks.diagnostics);
        return r;
    }
    auto ast = parse(*toks.value);
    if (!ast.ok()) {
        r.diagnostics = std::move(ast.diagnostics);
        return r;
    }
    return lower(*ast.value);
}

} // namespace scsp
