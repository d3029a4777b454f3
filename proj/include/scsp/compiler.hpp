// SPDX-License-Identifier: Apache-2.0
#pragma once

// Compiles a stochastic model into a conventional FlatCSP over its scenario
// tree.
//
// * A stage-i decision gets one flat variable per depth-(i-1) tree node;
//   every scenario below that node uses the same copy, which is what makes
//   the compiled program non-anticipative.
// * Each constraint body is instantiated once per scenario with the
//   stochastic variables replaced by that scenario's values.
// * A chance constraint reifies its body per scenario into b_s and requires
//   sum_s (p_s * L) * b_s >= theta * L, where L clears every denominator.
// * The objective gets one auxiliary e_s per scenario and an aggregate
//   objective variable (weighted sum, min, max or max - min).

#include "scsp/flat_csp.hpp"
#include "scsp/model.hpp"
#include "scsp/scenario_tree.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace scsp {

struct VarTable {
    // decision_copies[d][i]: flat copy of decision d at the i-th node of depth stage(d)-1
    std::vector<std::vector<VarId>> decision_copies;
    // chance_booleans[c][s]: b_s of constraint c (empty for hard constraints)
    std::vector<std::vector<VarId>> chance_booleans;
    // objective_values[s]: e_s (empty without an objective)
    std::vector<VarId> objective_values;

    VarId decision_var(const StochasticModel& m, const ScenarioTree& tree, std::size_t decision,
                       NodeId leaf) const {
        NodeId at = tree.ancestor(leaf, static_cast<std::size_t>(m.decisions[decision].stage) - 1);
        return decision_copies[decision][tree.node(at).level_index];
    }
};

// Linear integer form sum(coef * var) + constant, terms sorted by var id.
struct LinForm {
    std::map<VarId, std::int64_t> coefs;
    std::int64_t constant = 0;
};

// A compiled truth value: either a known constant or a 0/1 flat variable.
struct BoolLit {
    bool is_const = false;
    bool value = false;
    VarId var = 0;

    static BoolLit constant(bool v) { return {true, v, 0}; }
    static BoolLit of(VarId v) { return {false, false, v}; }
};

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) { return narrow(wide(a) * b); }
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) { return narrow(wide(a) + b); }

} // namespace detail

// Instantiates expressions for one scenario into a FlatCSP under construction.
class ExprCompiler {
public:
    ExprCompiler(const StochasticModel& model, const ScenarioTree& tree, const VarTable& table, FlatCSP& csp)
        : model_(model), tree_(tree), table_(table), csp_(csp), names_(model) {}

    LinForm linearize(const Expr& e, const Scenario& s) const {
        LinForm out;
        accumulate(e, s, 1, out);
        return out;
    }

    // Interval of a linear form over the current flat domains.
    Interval bounds(const LinForm& f) const {
        detail::wide lo = f.constant;
        detail::wide hi = f.constant;
        for (const auto& [v, a] : f.coefs) {
            const Interval& d = csp_.domains[v];
            detail::wide p = detail::wide(a) * d.lo;
            detail::wide q = detail::wide(a) * d.hi;
            lo += std::min(p, q);
            hi += std::max(p, q);
        }
        return {detail::narrow(lo), detail::narrow(hi)};
    }

    // Truth value of a boolean expression in scenario s, as a literal.
    BoolLit reify(const Expr& e, const Scenario& s) {
        switch (e.kind) {
        case ExprKind::Cmp: return reify_cmp(e, s);
        case ExprKind::Not: return negate(reify(*e.args[0], s));
        case ExprKind::And: return conjoin(reify(*e.args[0], s), reify(*e.args[1], s));
        case ExprKind::Or: return disjoin(reify(*e.args[0], s), reify(*e.args[1], s));
        case ExprKind::Implies: return disjoin(negate(reify(*e.args[0], s)), reify(*e.args[1], s));
        default: throw std::logic_error("reify: arithmetic expression in boolean position");
        }
    }

    // Requires a boolean expression to hold in scenario s.
    void post(const Expr& e, const Scenario& s) {
        if (e.kind == ExprKind::And) {
            post(*e.args[0], s);
            post(*e.args[1], s);
            return;
        }
        if (e.kind == ExprKind::Cmp && e.op != CmpOp::Ne) {
            Linear l = comparison(e, e.op, s);
            if (l.terms.empty()) {
                if (!holds_constant(l)) post_false();
                return;
            }
            csp_.constraints.push_back(std::move(l));
            return;
        }
        fix(reify(e, s), true);
    }

    void fix(BoolLit lit, bool value) {
        if (lit.is_const) {
            if (lit.value != value) post_false();
            return;
        }
        csp_.constraints.push_back(Linear{{{1, lit.var}}, LinOp::Eq, value ? 1 : 0});
    }

    // Flat 0/1 variable for a literal (a fixed variable for constants).
    VarId materialize(BoolLit lit) {
        if (!lit.is_const) return lit.var;
        std::int64_t v = lit.value ? 1 : 0;
        return csp_.add_var(v, v);
    }

private:
    void accumulate(const Expr& e, const Scenario& s, std::int64_t k, LinForm& out) const {
        switch (e.kind) {
        case ExprKind::Const: out.constant = detail::checked_add(out.constant, detail::checked_mul(k, e.value)); return;
        case ExprKind::Var: {
            auto [cls, idx] = names_.find(e.name);
            if (cls == detail::VarClass::Stochastic) {
                out.constant = detail::checked_add(out.constant, detail::checked_mul(k, s.values[idx]));
            } else if (cls == detail::VarClass::Decision) {
                VarId v = table_.decision_var(model_, tree_, idx, s.leaf);
                std::int64_t& c = out.coefs[v];
                c = detail::checked_add(c, k);
                if (c == 0) out.coefs.erase(v);
            } else {
                throw std::logic_error("unresolved variable '" + e.name + "'");
            }
            return;
        }
        case ExprKind::Add:
            accumulate(*e.args[0], s, k, out);
            accumulate(*e.args[1], s, k, out);
            return;
        case ExprKind::Sub:
            accumulate(*e.args[0], s, k, out);
            accumulate(*e.args[1], s, detail::checked_mul(k, -1), out);
            return;
        case ExprKind::Scale: accumulate(*e.args[0], s, detail::checked_mul(k, e.value), out); return;
        default: throw std::logic_error("linearize: boolean expression in arithmetic position");
        }
    }

    // lhs - rhs normalised to `sum(a*x) op c`; strict and >= forms are
    // rewritten over the integers. Not valid for !=.
    Linear comparison(const Expr& e, CmpOp op, const Scenario& s) const {
        LinForm f = linearize(*e.args[0], s);
        LinForm r = linearize(*e.args[1], s);
        for (const auto& [v, a] : r.coefs) {
            std::int64_t& c = f.coefs[v];
            c = detail::checked_add(c, -a);
            if (c == 0) f.coefs.erase(v);
        }
        std::int64_t k = detail::checked_add(f.constant, -r.constant); // f - r = sum + k
        Linear l;
        bool flip = op == CmpOp::Ge || op == CmpOp::Gt;
        for (const auto& [v, a] : f.coefs) l.terms.push_back({flip ? -a : a, v});
        switch (op) {
        case CmpOp::Eq: l.op = LinOp::Eq; l.rhs = -k; break;
        case CmpOp::Le: l.op = LinOp::Le; l.rhs = -k; break;
        case CmpOp::Lt: l.op = LinOp::Le; l.rhs = detail::checked_add(-k, -1); break;
        case CmpOp::Ge: l.op = LinOp::Le; l.rhs = k; break;
        case CmpOp::Gt: l.op = LinOp::Le; l.rhs = detail::checked_add(k, -1); break;
        case CmpOp::Ne: throw std::logic_error("comparison: != has no single linear form");
        }
        return l;
    }

    static bool holds_constant(const Linear& l) { return l.op == LinOp::Eq ? l.rhs == 0 : 0 <= l.rhs; }

    void post_false() { csp_.constraints.push_back(Linear{{}, LinOp::Le, -1}); }

    BoolLit reify_cmp(const Expr& e, const Scenario& s) {
        if (e.op == CmpOp::Ne) {
            // x != y  as  (x < y) \/ (x > y)
            return disjoin(reify_linear(comparison(e, CmpOp::Lt, s)), reify_linear(comparison(e, CmpOp::Gt, s)));
        }
        return reify_linear(comparison(e, e.op, s));
    }

    BoolLit reify_linear(Linear l) {
        if (l.terms.empty()) return BoolLit::constant(holds_constant(l));
        VarId b = csp_.add_var(0, 1);
        csp_.constraints.push_back(Reified{b, std::move(l)});
        return BoolLit::of(b);
    }

    BoolLit negate(BoolLit a) {
        if (a.is_const) return BoolLit::constant(!a.value);
        VarId b = csp_.add_var(0, 1);
        csp_.constraints.push_back(Linear{{{1, b}, {1, a.var}}, LinOp::Eq, 1});
        return BoolLit::of(b);
    }

    BoolLit conjoin(BoolLit a, BoolLit c) {
        if (a.is_const) return a.value ? c : a;
        if (c.is_const) return c.value ? a : c;
        VarId b = csp_.add_var(0, 1);
        csp_.constraints.push_back(Linear{{{1, b}, {-1, a.var}}, LinOp::Le, 0});
        csp_.constraints.push_back(Linear{{{1, b}, {-1, c.var}}, LinOp::Le, 0});
        csp_.constraints.push_back(Linear{{{1, a.var}, {1, c.var}, {-1, b}}, LinOp::Le, 1});
        return BoolLit::of(b);
    }

    BoolLit disjoin(BoolLit a, BoolLit c) {
        if (a.is_const) return a.value ? a : c;
        if (c.is_const) return c.value ? c : a;
        VarId b = csp_.add_var(0, 1);
        csp_.constraints.push_back(Linear{{{1, a.var}, {-1, b}}, LinOp::Le, 0});
        csp_.constraints.push_back(Linear{{{1, c.var}, {-1, b}}, LinOp::Le, 0});
        csp_.constraints.push_back(Linear{{{1, b}, {-1, a.var}, {-1, c.var}}, LinOp::Le, 0});
        return BoolLit::of(b);
    }

    const StochasticModel& model_;
    const ScenarioTree& tree_;
    const VarTable& table_;
    FlatCSP& csp_;
    detail::NameIndex names_;
};

// One flat copy per (decision, depth-(stage-1) node), allocated in
// (stage, node, declaration) order so flat id == policy slot index.
inline VarTable instantiate_decisions(const StochasticModel& m, const ScenarioTree& tree, FlatCSP& csp) {
    VarTable table;
    table.decision_copies.resize(m.decisions.size());
    table.chance_booleans.resize(m.constraints.size());
    PolicyLayout layout = make_policy_layout(m, tree);
    for (std::size_t d = 0; d < m.decisions.size(); ++d)
        table.decision_copies[d].resize(layout.slot_of[d].size());
    for (const auto& slot : layout.slots) {
        const DecisionVar& d = m.decisions[slot.decision];
        table.decision_copies[slot.decision][tree.node(slot.node).level_index] = csp.add_var(d.lo, d.hi);
    }
    return table;
}

inline std::int64_t scenario_lcm(const ScenarioTree& tree) {
    std::int64_t l = 1;
    for (const auto& s : tree.scenarios) l = checked_lcm(l, s.prob.den());
    return l;
}

// Emits b_s <-> body(s) for every scenario and the weighted threshold row.
inline void compile_chance(const StochasticModel& m, std::size_t constraint, const ScenarioTree& tree,
                           VarTable& table, FlatCSP& csp) {
    const ConstraintDecl& c = m.constraints[constraint];
    ExprCompiler ec(m, tree, table, csp);
    std::vector<VarId> bs;
    for (const auto& s : tree.scenarios) bs.push_back(ec.materialize(ec.reify(*c.body, s)));
    table.chance_booleans[constraint] = bs;

    std::int64_t L = checked_lcm(scenario_lcm(tree), c.theta.den());
    Linear row;
    row.op = LinOp::Le;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        Rational w = tree.scenarios[i].prob * Rational(L);
        row.terms.push_back({-w.num(), bs[i]});
    }
    row.rhs = -(c.theta * Rational(L)).num();
    csp.constraints.push_back(std::move(row));
}

inline void compile_hard(const StochasticModel& m, std::size_t constraint, const ScenarioTree& tree,
                         const VarTable& table, FlatCSP& csp) {
    ExprCompiler ec(m, tree, table, csp);
    for (const auto& s : tree.scenarios) ec.post(*m.constraints[constraint].body, s);
}

inline void compile_objective(const StochasticModel& m, const ScenarioTree& tree, VarTable& table, FlatCSP& csp) {
    const ObjectiveDecl& obj = *m.objective;
    ExprCompiler ec(m, tree, table, csp);
    std::vector<Interval> ranges;
    for (const auto& s : tree.scenarios) {
        LinForm f = ec.linearize(*obj.body, s);
        Interval r = ec.bounds(f);
        VarId e = csp.add_var(r.lo, r.hi);
        // e - sum(a*x) = constant
        Linear def{{{1, e}}, LinOp::Eq, f.constant};
        for (const auto& [v, a] : f.coefs) def.terms.push_back({-a, v});
        csp.constraints.push_back(std::move(def));
        table.objective_values.push_back(e);
        ranges.push_back(r);
    }
    const auto& es = table.objective_values;
    std::int64_t min_lo = INT64_MAX, min_hi = INT64_MAX, max_lo = INT64_MIN, max_hi = INT64_MIN;
    for (const auto& r : ranges) {
        min_lo = std::min(min_lo, r.lo);
        min_hi = std::min(min_hi, r.hi);
        max_lo = std::max(max_lo, r.lo);
        max_hi = std::max(max_hi, r.hi);
    }
    auto add_min = [&] {
        VarId y = csp.add_var(min_lo, min_hi);
        csp.constraints.push_back(MinOf{y, es});
        return y;
    };
    auto add_max = [&] {
        VarId y = csp.add_var(max_lo, max_hi);
        csp.constraints.push_back(MaxOf{y, es});
        return y;
    };

    VarId target = 0;
    std::int64_t scale = 1;
    switch (obj.aggregator) {
    case Aggregator::Expected: {
        scale = scenario_lcm(tree);
        detail::wide lo = 0, hi = 0;
        Linear row{{}, LinOp::Eq, 0};
        std::vector<std::int64_t> weights;
        for (std::size_t i = 0; i < es.size(); ++i) {
            std::int64_t w = (tree.scenarios[i].prob * Rational(scale)).num();
            weights.push_back(w);
            lo += detail::wide(w) * ranges[i].lo;
            hi += detail::wide(w) * ranges[i].hi;
        }
        target = csp.add_var(detail::narrow(lo), detail::narrow(hi));
        row.terms.push_back({1, target});
        for (std::size_t i = 0; i < es.size(); ++i) row.terms.push_back({-weights[i], es[i]});
        csp.constraints.push_back(std::move(row));
        break;
    }
    case Aggregator::Worst:
        // pessimistic: the smallest value when maximizing, the largest when minimizing
        target = obj.sense == Sense::Maximize ? add_min() : add_max();
        break;
    case Aggregator::Best: target = obj.sense == Sense::Maximize ? add_max() : add_min(); break;
    case Aggregator::Spread: {
        VarId hi = add_max();
        VarId lo = add_min();
        target = csp.add_var(0, detail::narrow(detail::wide(max_hi) - min_lo));
        csp.constraints.push_back(Linear{{{1, target}, {-1, hi}, {1, lo}}, LinOp::Eq, 0});
        break;
    }
    }
    csp.objective = FlatObjective{target, obj.sense, scale};
}

struct Compilation {
    ScenarioTree tree;
    PolicyLayout layout;
    VarTable table;
    FlatCSP csp;
};

// Full compilation. Output (ids, order, dump text) is a deterministic
// function of the model.
inline Compilation compile(const StochasticModel& m, std::size_t max_scenarios = default_max_scenarios) {
    Compilation out;
    out.tree = build_scenario_tree(m, max_scenarios);
    out.layout = make_policy_layout(m, out.tree);
    auto& csp = out.csp;
    out.table = instantiate_decisions(m, out.tree, csp);

    for (std::size_t i = 0; i < m.constraints.size(); ++i) {
        if (m.constraints[i].kind == ConstraintKind::Chance) compile_chance(m, i, out.tree, out.table, csp);
        else compile_hard(m, i, out.tree, out.table, csp);
    }
    if (m.objective) compile_objective(m, out.tree, out.table, csp);

    for (const auto& s : out.tree.scenarios) {
        std::string line = "scenario " + std::to_string(s.index) + " prob " + s.prob.str();
        std::string h = render_history(m, out.tree, s.leaf);
        if (!h.empty()) line += " " + h;
        csp.comments.push_back(std::move(line));
    }
    for (std::size_t i = 0; i < out.layout.slots.size(); ++i) {
        const auto& slot = out.layout.slots[i];
        std::string h = render_history(m, out.tree, slot.node);
        csp.comments.push_back("decision " + m.decisions[slot.decision].name + " [" + h + "] var " +
                               std::to_string(out.table.decision_copies[slot.decision]
                                                                       [out.tree.node(slot.node).level_index]));
    }
    return out;
}

// Reads the policy out of a flat solution.
inline Policy extract_policy(const Compilation& c, std::span<const std::int64_t> solution) {
    Policy p;
    for (const auto& slot : c.layout.slots)
        p.values.push_back(solution[c.table.decision_copies[slot.decision][c.tree.node(slot.node).level_index]]);
    return p;
}

} // namespace scsp
