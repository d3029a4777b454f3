// SPDX-License-Identifier: Apache-2.0
#pragma once

// In-memory representation of a staged stochastic constraint program.
//
// A model has m stages. Stage i first fixes its decision variables, then
// observes its stochastic variables, so a stage-i decision may depend on
// everything observed in stages 1..i-1. Constraint and objective bodies
// are linear integer expressions combined with comparisons and logic.

#include "scsp/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace scsp {

struct DecisionVar {
    std::string name;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    int stage = 1;

    friend bool operator==(const DecisionVar&, const DecisionVar&) = default;
};

struct Outcome {
    std::int64_t value = 0;
    Rational prob;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

struct StochasticVar {
    std::string name;
    std::vector<Outcome> distribution;
    int stage = 1;

    friend bool operator==(const StochasticVar&, const StochasticVar&) = default;
};

enum class CmpOp { Eq, Ne, Le, Lt, Ge, Gt };

inline const char* to_string(CmpOp op) {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    }
    return "?";
}

enum class ExprKind { Const, Var, Add, Sub, Scale, Cmp, And, Or, Not, Implies };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. `Scale` multiplies its single child by an
// integer constant, so arithmetic stays linear by construction.
struct Expr {
    ExprKind kind = ExprKind::Const;
    std::int64_t value = 0; // Const: the value; Scale: the coefficient
    std::string name;       // Var
    CmpOp op = CmpOp::Eq;   // Cmp
    std::vector<ExprPtr> args;

    bool is_arith() const {
        return kind == ExprKind::Const || kind == ExprKind::Var || kind == ExprKind::Add ||
               kind == ExprKind::Sub || kind == ExprKind::Scale;
    }
    bool is_bool() const { return !is_arith(); }
};

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
    case ExprKind::Const: return a.value == b.value;
    case ExprKind::Var: return a.name == b.name;
    case ExprKind::Scale:
        if (a.value != b.value) return false;
        break;
    case ExprKind::Cmp:
        if (a.op != b.op) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!structurally_equal(*a.args[i], *b.args[i])) return false;
    return true;
}

// Expression builders.
namespace ex {

inline ExprPtr make(ExprKind kind, std::vector<ExprPtr> args = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->args = std::move(args);
    return e;
}
inline ExprPtr lit(std::int64_t v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Const;
    e->value = v;
    return e;
}
inline ExprPtr var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Var;
    e->name = std::move(name);
    return e;
}
inline ExprPtr add(ExprPtr a, ExprPtr b) { return make(ExprKind::Add, {std::move(a), std::move(b)}); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return make(ExprKind::Sub, {std::move(a), std::move(b)}); }
inline ExprPtr scale(std::int64_t k, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Scale;
    e->value = k;
    e->args = {std::move(a)};
    return e;
}
inline ExprPtr cmp(CmpOp op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Cmp;
    e->op = op;
    e->args = {std::move(a), std::move(b)};
    return e;
}
inline ExprPtr conj(ExprPtr a, ExprPtr b) { return make(ExprKind::And, {std::move(a), std::move(b)}); }
inline ExprPtr disj(ExprPtr a, ExprPtr b) { return make(ExprKind::Or, {std::move(a), std::move(b)}); }
inline ExprPtr neg(ExprPtr a) { return make(ExprKind::Not, {std::move(a)}); }
inline ExprPtr implies(ExprPtr a, ExprPtr b) { return make(ExprKind::Implies, {std::move(a), std::move(b)}); }

} // namespace ex

enum class ConstraintKind { Hard, Chance };

struct ConstraintDecl {
    ExprPtr body;
    ConstraintKind kind = ConstraintKind::Hard;
    Rational theta{1}; // only meaningful for Chance

    static ConstraintDecl hard(ExprPtr body) { return {std::move(body), ConstraintKind::Hard, Rational(1)}; }
    static ConstraintDecl chance(Rational theta, ExprPtr body) {
        return {std::move(body), ConstraintKind::Chance, theta};
    }
};

enum class Sense { Maximize, Minimize };
enum class Aggregator { Expected, Worst, Best, Spread };

inline const char* to_string(Sense s) { return s == Sense::Maximize ? "maximize" : "minimize"; }
inline const char* to_string(Aggregator a) {
    switch (a) {
    case Aggregator::Expected: return "expected";
    case Aggregator::Worst: return "worst";
    case Aggregator::Best: return "best";
    case Aggregator::Spread: return "spread";
    }
    return "?";
}

struct ObjectiveDecl {
    Sense sense = Sense::Maximize;
    Aggregator aggregator = Aggregator::Expected;
    ExprPtr body;
};

struct StochasticModel {
    int stage_count = 1;
    std::vector<DecisionVar> decisions;
    std::vector<StochasticVar> stochastics;
    std::vector<ConstraintDecl> constraints;
    std::optional<ObjectiveDecl> objective;
};

inline bool structurally_equal(const StochasticModel& a, const StochasticModel& b) {
    if (a.stage_count != b.stage_count || a.decisions != b.decisions || a.stochastics != b.stochastics ||
        a.constraints.size() != b.constraints.size() || a.objective.has_value() != b.objective.has_value())
        return false;
    for (std::size_t i = 0; i < a.constraints.size(); ++i) {
        const auto& ca = a.constraints[i];
        const auto& cb = b.constraints[i];
        if (ca.kind != cb.kind || (ca.kind == ConstraintKind::Chance && ca.theta != cb.theta) ||
            !structurally_equal(*ca.body, *cb.body))
            return false;
    }
    if (a.objective) {
        const auto& oa = *a.objective;
        const auto& ob = *b.objective;
        if (oa.sense != ob.sense || oa.aggregator != ob.aggregator || !structurally_equal(*oa.body, *ob.body))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Diagnostics

// What a diagnostic is about; lets the parser map it back to a source span.
struct Subject {
    enum class Kind { Model, Decision, Stochastic, Constraint, Objective } kind = Kind::Model;
    std::size_t index = 0;

    friend bool operator==(const Subject&, const Subject&) = default;
};

struct Diagnostic {
    std::string code;
    std::string message;
    std::string name; // offending identifier, when there is one
    Subject subject;
    int line = 0; // 1-based; 0 when the diagnostic has no source location
    int col = 0;
};

inline std::string format(const Diagnostic& d, const std::string& file = {}) {
    std::string out;
    if (!file.empty()) out += file + ":";
    if (d.line > 0) out += std::to_string(d.line) + ":" + std::to_string(d.col) + ":";
    if (!out.empty()) out += " ";
    out += "error[" + d.code + "]: " + d.message;
    return out;
}

struct ValidationReport {
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

namespace detail {

enum class VarClass { None, Decision, Stochastic };

struct NameIndex {
    std::map<std::string, std::pair<VarClass, std::size_t>> names;

    explicit NameIndex(const StochasticModel& m) {
        // first declaration wins; duplicates are reported separately
        for (std::size_t i = 0; i < m.decisions.size(); ++i)
            names.try_emplace(m.decisions[i].name, VarClass::Decision, i);
        for (std::size_t i = 0; i < m.stochastics.size(); ++i)
            names.try_emplace(m.stochastics[i].name, VarClass::Stochastic, i);
    }

    std::pair<VarClass, std::size_t> find(const std::string& n) const {
        auto it = names.find(n);
        return it == names.end() ? std::pair{VarClass::None, std::size_t{0}} : it->second;
    }
};

inline void check_expr(const Expr& e, bool want_bool, const NameIndex& names, Subject subject,
                       std::vector<Diagnostic>& out) {
    if (want_bool != e.is_bool()) {
        out.push_back({"EXPR_KIND",
                       want_bool ? "expected a comparison or logical expression"
                                 : "expected an arithmetic expression",
                       {}, subject});
        return;
    }
    if (e.kind == ExprKind::Var && names.find(e.name).first == VarClass::None)
        out.push_back({"NAME_UNRESOLVED", "undeclared variable '" + e.name + "'", e.name, subject});
    bool child_bool = e.kind == ExprKind::And || e.kind == ExprKind::Or || e.kind == ExprKind::Not ||
                      e.kind == ExprKind::Implies;
    std::size_t expected_args = 0;
    switch (e.kind) {
    case ExprKind::Const:
    case ExprKind::Var: expected_args = 0; break;
    case ExprKind::Scale:
    case ExprKind::Not: expected_args = 1; break;
    default: expected_args = 2; break;
    }
    if (e.args.size() != expected_args) {
        out.push_back({"EXPR_ARITY", "malformed expression node", {}, subject});
        return;
    }
    for (const auto& a : e.args) {
        if (!a) {
            out.push_back({"EXPR_ARITY", "missing expression operand", {}, subject});
            continue;
        }
        check_expr(*a, child_bool, names, subject, out);
    }
}

} // namespace detail

// Checks every structural invariant of a model. Each violation yields one
// diagnostic with a stable code.
inline ValidationReport validate_model(const StochasticModel& m) {
    using K = Subject::Kind;
    ValidationReport report;
    auto& out = report.diagnostics;

    if (m.stage_count < 1)
        out.push_back({"STAGE_COUNT", "model must have at least one stage (declare a variable)", {}, {}});

    std::set<std::string> seen;
    std::vector<bool> stage_used(m.stage_count > 0 ? static_cast<std::size_t>(m.stage_count) + 1 : 1, false);
    auto note_stage = [&](int stage, const std::string& name, Subject subject) {
        if (stage < 1 || stage > m.stage_count) {
            out.push_back({"STAGE_RANGE",
                           "stage " + std::to_string(stage) + " of '" + name + "' outside 1.." +
                               std::to_string(m.stage_count),
                           name, subject});
            return;
        }
        stage_used[static_cast<std::size_t>(stage)] = true;
    };
    auto note_name = [&](const std::string& name, Subject subject) {
        if (!seen.insert(name).second)
            out.push_back({"NAME_DUP", "duplicate declaration of '" + name + "'", name, subject});
    };

    for (std::size_t i = 0; i < m.decisions.size(); ++i) {
        const auto& d = m.decisions[i];
        Subject s{K::Decision, i};
        note_name(d.name, s);
        if (d.lo > d.hi)
            out.push_back({"DOMAIN_EMPTY",
                           "empty domain " + std::to_string(d.lo) + ".." + std::to_string(d.hi) + " for '" +
                               d.name + "'",
                           d.name, s});
        note_stage(d.stage, d.name, s);
    }
    for (std::size_t i = 0; i < m.stochastics.size(); ++i) {
        const auto& v = m.stochastics[i];
        Subject s{K::Stochastic, i};
        note_name(v.name, s);
        note_stage(v.stage, v.name, s);
        if (v.distribution.empty()) {
            out.push_back({"DIST_EMPTY", "distribution of '" + v.name + "' has no outcomes", v.name, s});
            continue;
        }
        std::set<std::int64_t> values;
        Rational total;
        bool probs_ok = true;
        for (const auto& o : v.distribution) {
            if (!values.insert(o.value).second)
                out.push_back({"DIST_DUP_VALUE",
                               "outcome " + std::to_string(o.value) + " of '" + v.name + "' listed twice", v.name,
                               s});
            if (o.prob <= Rational(0)) {
                out.push_back({"DIST_PROB",
                               "outcome " + std::to_string(o.value) + " of '" + v.name +
                                   "' has non-positive probability " + o.prob.str(),
                               v.name, s});
                probs_ok = false;
            }
            total += o.prob;
        }
        if (probs_ok && total != Rational(1))
            out.push_back({"DIST_SUM",
                           "probabilities of '" + v.name + "' sum to " + total.str() + ", not 1", v.name, s});
    }
    for (int st = 1; st <= m.stage_count; ++st)
        if (!stage_used[static_cast<std::size_t>(st)])
            out.push_back({"STAGE_EMPTY", "stage " + std::to_string(st) + " declares no variables", {}, {}});

    detail::NameIndex names(m);
    for (std::size_t i = 0; i < m.constraints.size(); ++i) {
        const auto& c = m.constraints[i];
        Subject s{K::Constraint, i};
        if (c.kind == ConstraintKind::Chance && (c.theta <= Rational(0) || c.theta > Rational(1)))
            out.push_back({"THETA_RANGE", "chance threshold " + c.theta.str() + " outside (0, 1]", {}, s});
        if (!c.body)
            out.push_back({"EXPR_ARITY", "constraint without body", {}, s});
        else
            detail::check_expr(*c.body, true, names, s, out);
    }
    if (m.objective) {
        Subject s{K::Objective, 0};
        if (!m.objective->body)
            out.push_back({"EXPR_ARITY", "objective without body", {}, s});
        else
            detail::check_expr(*m.objective->body, false, names, s, out);
    }
    return report;
}

// Largest stage named by any variable (0 when there are none).
inline int max_declared_stage(const StochasticModel& m) {
    int st = 0;
    for (const auto& d : m.decisions) st = std::max(st, d.stage);
    for (const auto& v : m.stochastics) st = std::max(st, v.stage);
    return st;
}

} // namespace scsp
