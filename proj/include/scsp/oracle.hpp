// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force ground truth for small models: enumerate every policy,
// evaluate each constraint body by direct interpretation in every scenario
// and keep the best feasible policy. Shares no code with the compiler.

#include "scsp/model.hpp"
#include "scsp/scenario_tree.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scsp {

inline constexpr std::uint64_t default_max_policies = 1000000;

// Number of policies (product of slot domain sizes), saturating at cap+1.
inline std::uint64_t policy_count(const StochasticModel& m, const PolicyLayout& layout,
                                  std::uint64_t cap = UINT64_MAX - 1) {
    std::uint64_t n = 1;
    for (const auto& slot : layout.slots) {
        const auto& d = m.decisions[slot.decision];
        std::uint64_t k = static_cast<std::uint64_t>(d.hi - d.lo) + 1;
        if (n > (cap + 1) / k) return cap + 1;
        n *= k;
    }
    return n;
}

// Lexicographic stream of policies over the layout's slots; the last slot
// varies fastest and values ascend.
class PolicyEnumerator {
public:
    PolicyEnumerator(const StochasticModel& m, const PolicyLayout& layout,
                     std::uint64_t max_policies = default_max_policies)
        : model_(m), layout_(layout) {
        total_ = policy_count(m, layout, max_policies);
        if (total_ > max_policies)
            throw SizeLimitError("policy space exceeds " + std::to_string(max_policies) + " policies");
        for (const auto& slot : layout.slots) current_.values.push_back(m.decisions[slot.decision].lo);
    }

    std::uint64_t total() const { return total_; }

    // Writes the next policy into `out`; false once the stream is exhausted.
    bool next(Policy& out) {
        if (done_) return false;
        out = current_;
        done_ = true;
        for (std::size_t i = current_.values.size(); i-- > 0;) {
            const auto& d = model_.decisions[layout_.slots[i].decision];
            if (current_.values[i] < d.hi) {
                ++current_.values[i];
                done_ = false;
                break;
            }
            current_.values[i] = d.lo;
        }
        return true;
    }

private:
    const StochasticModel& model_;
    const PolicyLayout& layout_;
    Policy current_;
    std::uint64_t total_ = 0;
    bool done_ = false;
};

inline std::vector<Policy> enumerate_policies(const StochasticModel& m, const PolicyLayout& layout,
                                              std::uint64_t max_policies = default_max_policies) {
    PolicyEnumerator en(m, layout, max_policies);
    std::vector<Policy> out;
    Policy p;
    while (en.next(p)) out.push_back(p);
    return out;
}

struct ObjectiveStats {
    Rational expected;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::int64_t spread = 0;
};

struct PolicyEvaluation {
    // Per model constraint: probability mass of the scenarios where the body holds.
    std::vector<Rational> satisfaction;
    // Per model constraint: whether the body holds in every scenario.
    std::vector<bool> holds_everywhere;
    std::optional<ObjectiveStats> objective;
};

// The declared objective's value for a policy: expectation, the pessimistic
// or optimistic scenario value relative to the sense, or max - min.
inline Rational objective_value(const ObjectiveDecl& obj, const ObjectiveStats& s) {
    switch (obj.aggregator) {
    case Aggregator::Expected: return s.expected;
    case Aggregator::Worst: return Rational(obj.sense == Sense::Maximize ? s.min : s.max);
    case Aggregator::Best: return Rational(obj.sense == Sense::Maximize ? s.max : s.min);
    case Aggregator::Spread: return Rational(s.spread);
    }
    return Rational(0);
}

inline bool feasible(const StochasticModel& m, const PolicyEvaluation& ev) {
    for (std::size_t i = 0; i < m.constraints.size(); ++i) {
        const auto& c = m.constraints[i];
        if (c.kind == ConstraintKind::Hard ? !ev.holds_everywhere[i] : ev.satisfaction[i] < c.theta) return false;
    }
    return true;
}

namespace detail {

// Expression tree with variable references resolved to slots of a flat
// assignment vector: decisions first, then stochastic variables.
struct InterpNode {
    ExprKind kind = ExprKind::Const;
    std::int64_t value = 0;
    std::size_t slot = 0;
    CmpOp op = CmpOp::Eq;
    std::vector<InterpNode> args;
};

inline InterpNode resolve(const Expr& e, const NameIndex& names, std::size_t decision_count) {
    InterpNode n;
    n.kind = e.kind;
    n.value = e.value;
    n.op = e.op;
    if (e.kind == ExprKind::Var) {
        auto [cls, idx] = names.find(e.name);
        if (cls == VarClass::None) throw std::invalid_argument("unresolved variable '" + e.name + "'");
        n.slot = cls == VarClass::Decision ? idx : decision_count + idx;
    }
    for (const auto& a : e.args) n.args.push_back(resolve(*a, names, decision_count));
    return n;
}

inline std::int64_t eval_int(const InterpNode& n, const std::vector<std::int64_t>& env) {
    switch (n.kind) {
    case ExprKind::Const: return n.value;
    case ExprKind::Var: return env[n.slot];
    case ExprKind::Add: return narrow(wide(eval_int(n.args[0], env)) + eval_int(n.args[1], env));
    case ExprKind::Sub: return narrow(wide(eval_int(n.args[0], env)) - eval_int(n.args[1], env));
    case ExprKind::Scale: return narrow(wide(n.value) * eval_int(n.args[0], env));
    default: throw std::logic_error("eval_int on boolean node");
    }
}

inline bool eval_bool(const InterpNode& n, const std::vector<std::int64_t>& env) {
    switch (n.kind) {
    case ExprKind::Cmp: {
        std::int64_t a = eval_int(n.args[0], env);
        std::int64_t b = eval_int(n.args[1], env);
        switch (n.op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Gt: return a > b;
        }
        return false;
    }
    case ExprKind::And: return eval_bool(n.args[0], env) && eval_bool(n.args[1], env);
    case ExprKind::Or: return eval_bool(n.args[0], env) || eval_bool(n.args[1], env);
    case ExprKind::Not: return !eval_bool(n.args[0], env);
    case ExprKind::Implies: return !eval_bool(n.args[0], env) || eval_bool(n.args[1], env);
    default: throw std::logic_error("eval_bool on arithmetic node");
    }
}

} // namespace detail

// Evaluates policies of one model; construct once, call evaluate() many times.
class PolicyEvaluator {
public:
    PolicyEvaluator(const StochasticModel& m, const ScenarioTree& tree, const PolicyLayout& layout)
        : model_(m), tree_(tree) {
        detail::NameIndex names(m);
        for (const auto& c : m.constraints) constraints_.push_back(detail::resolve(*c.body, names, m.decisions.size()));
        if (m.objective) objective_ = detail::resolve(*m.objective->body, names, m.decisions.size());
        // which policy slot feeds each decision in each scenario
        for (const auto& s : tree.scenarios) {
            std::vector<std::size_t> row;
            for (std::size_t d = 0; d < m.decisions.size(); ++d) {
                NodeId at = tree.ancestor(s.leaf, static_cast<std::size_t>(m.decisions[d].stage) - 1);
                row.push_back(layout.slot(d, tree, at));
            }
            slots_.push_back(std::move(row));
        }
    }

    PolicyEvaluation evaluate(const Policy& policy) const {
        PolicyEvaluation ev;
        ev.satisfaction.assign(constraints_.size(), Rational(0));
        ev.holds_everywhere.assign(constraints_.size(), true);
        std::vector<std::pair<Rational, std::int64_t>> terms;
        std::vector<std::int64_t> env(model_.decisions.size() + model_.stochastics.size());
        for (std::size_t si = 0; si < tree_.scenarios.size(); ++si) {
            const Scenario& s = tree_.scenarios[si];
            for (std::size_t d = 0; d < model_.decisions.size(); ++d) env[d] = policy.values[slots_[si][d]];
            for (std::size_t k = 0; k < s.values.size(); ++k) env[model_.decisions.size() + k] = s.values[k];
            for (std::size_t c = 0; c < constraints_.size(); ++c) {
                if (detail::eval_bool(constraints_[c], env)) ev.satisfaction[c] += s.prob;
                else ev.holds_everywhere[c] = false;
            }
            if (objective_) terms.emplace_back(s.prob, detail::eval_int(*objective_, env));
        }
        if (objective_ && !terms.empty()) {
            ObjectiveStats st;
            st.expected = rat_fold(terms);
            st.min = st.max = terms.front().second;
            for (const auto& [p, v] : terms) {
                st.min = std::min(st.min, v);
                st.max = std::max(st.max, v);
            }
            st.spread = st.max - st.min;
            ev.objective = st;
        }
        return ev;
    }

private:
    const StochasticModel& model_;
    const ScenarioTree& tree_;
    std::vector<detail::InterpNode> constraints_;
    std::optional<detail::InterpNode> objective_;
    std::vector<std::vector<std::size_t>> slots_;
};

inline PolicyEvaluation evaluate_policy(const StochasticModel& m, const ScenarioTree& tree,
                                        const PolicyLayout& layout, const Policy& policy) {
    return PolicyEvaluator(m, tree, layout).evaluate(policy);
}

struct OracleResult {
    bool feasible = false;
    std::optional<Policy> policy;
    std::optional<Rational> objective;
    std::uint64_t policies_checked = 0;
};

struct OracleOptions {
    std::size_t max_scenarios = default_max_scenarios;
    std::uint64_t max_policies = default_max_policies;
};

// Best feasible policy by exhaustive enumeration; ties keep the earliest.
inline OracleResult oracle_solve(const StochasticModel& m, OracleOptions opts = {}) {
    ScenarioTree tree = build_scenario_tree(m, opts.max_scenarios);
    PolicyLayout layout = make_policy_layout(m, tree);
    PolicyEnumerator en(m, layout, opts.max_policies);
    PolicyEvaluator eval(m, tree, layout);

    OracleResult best;
    Policy p;
    while (en.next(p)) {
        ++best.policies_checked;
        PolicyEvaluation ev = eval.evaluate(p);
        if (!feasible(m, ev)) continue;
        if (!m.objective) {
            best.feasible = true;
            best.policy = p;
            return best;
        }
        Rational v = objective_value(*m.objective, *ev.objective);
        bool better = !best.feasible || (m.objective->sense == Sense::Maximize ? v > *best.objective
                                                                                : v < *best.objective);
        if (better) {
            best.feasible = true;
            best.policy = p;
            best.objective = v;
        }
    }
    return best;
}

} // namespace scsp
