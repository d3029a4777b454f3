// SPDX-License-Identifier: Apache-2.0
#pragma once

// Bounds-propagation finite-domain solver for FlatCSP.
//
// Search is depth-first with a static order: the first unfixed variable by
// id, left branch x = lo, right branch x >= lo + 1. Optimization is plain
// branch-and-bound on the objective variable: after an incumbent with value
// v, every later node requires the objective to be strictly better.

#include "scsp/flat_csp.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace scsp {

using DomainStore = std::vector<Interval>;

struct MissingVarError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline wide floor_div(wide a, wide b) {
    wide q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline wide ceil_div(wide a, wide b) {
    wide q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
    return q;
}

inline wide eval_linear(const Linear& l, std::span<const std::int64_t> a) {
    wide sum = 0;
    for (const auto& t : l.terms) sum += wide(t.coef) * a[t.var];
    return sum;
}

inline bool linear_holds(const Linear& l, std::span<const std::int64_t> a) {
    wide sum = eval_linear(l, a);
    return l.op == LinOp::Eq ? sum == l.rhs : sum <= l.rhs;
}

} // namespace detail

// Direct evaluation of every constraint; shares no code with propagation.
inline bool check_solution(const FlatCSP& csp, std::span<const std::int64_t> assignment) {
    if (assignment.size() < csp.var_count())
        throw MissingVarError("assignment covers " + std::to_string(assignment.size()) + " of " +
                              std::to_string(csp.var_count()) + " variables");
    for (VarId v = 0; v < csp.var_count(); ++v)
        if (assignment[v] < csp.domains[v].lo || assignment[v] > csp.domains[v].hi) return false;
    for (const auto& c : csp.constraints) {
        if (const auto* l = std::get_if<Linear>(&c)) {
            if (!detail::linear_holds(*l, assignment)) return false;
        } else if (const auto* r = std::get_if<Reified>(&c)) {
            std::int64_t b = assignment[r->b];
            if (b != 0 && b != 1) return false;
            if ((b == 1) != detail::linear_holds(r->body, assignment)) return false;
        } else if (const auto* mn = std::get_if<MinOf>(&c)) {
            std::int64_t best = INT64_MAX;
            for (VarId x : mn->xs) best = std::min(best, assignment[x]);
            if (mn->xs.empty() || assignment[mn->y] != best) return false;
        } else if (const auto* mx = std::get_if<MaxOf>(&c)) {
            std::int64_t best = INT64_MIN;
            for (VarId x : mx->xs) best = std::max(best, assignment[x]);
            if (mx->xs.empty() || assignment[mx->y] != best) return false;
        }
    }
    return true;
}

// Fixpoint bounds propagation with a constraint queue driven by per-variable
// watch lists.
class Propagator {
public:
    explicit Propagator(const FlatCSP& csp) : csp_(csp), watchers_(csp.var_count()) {
        for (std::size_t i = 0; i < csp.constraints.size(); ++i) {
            std::visit(
                [&](const auto& c) {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, Linear>) {
                        for (const auto& t : c.terms) watch(t.var, i);
                    } else if constexpr (std::is_same_v<T, Reified>) {
                        watch(c.b, i);
                        for (const auto& t : c.body.terms) watch(t.var, i);
                    } else {
                        watch(c.y, i);
                        for (VarId x : c.xs) watch(x, i);
                    }
                },
                csp.constraints[i]);
        }
    }

    // Shrinks `store` to the bounds-consistent fixpoint. Returns false when
    // some domain becomes empty; the store is then unspecified.
    bool propagate(DomainStore& store) {
        store_ = &store;
        queue_.clear();
        queued_.assign(csp_.constraints.size(), true);
        for (std::size_t i = 0; i < csp_.constraints.size(); ++i) queue_.push_back(i);
        return run();
    }

    // Propagates after the caller narrowed `changed` only.
    bool propagate_from(DomainStore& store, VarId changed) {
        store_ = &store;
        queue_.clear();
        queued_.assign(csp_.constraints.size(), false);
        if (store[changed].empty()) return false;
        enqueue_watchers(changed);
        return run();
    }

private:
    void watch(VarId v, std::size_t c) {
        if (watchers_[v].empty() || watchers_[v].back() != c) watchers_[v].push_back(c);
    }

    void enqueue_watchers(VarId v) {
        for (std::size_t c : watchers_[v]) {
            if (!queued_[c]) {
                queued_[c] = true;
                queue_.push_back(c);
            }
        }
    }

    bool run() {
        while (!queue_.empty()) {
            std::size_t c = queue_.front();
            queue_.pop_front();
            queued_[c] = false;
            if (!std::visit([&](const auto& con) { return apply(con); }, csp_.constraints[c])) return false;
        }
        return true;
    }

    Interval& dom(VarId v) { return (*store_)[v]; }

    bool set_lo(VarId v, detail::wide lo) {
        Interval& d = dom(v);
        if (lo <= d.lo) return true;
        if (lo > d.hi) {
            d.lo = d.hi + 1;
            return false;
        }
        d.lo = static_cast<std::int64_t>(lo);
        enqueue_watchers(v);
        return true;
    }
    bool set_hi(VarId v, detail::wide hi) {
        Interval& d = dom(v);
        if (hi >= d.hi) return true;
        if (hi < d.lo) {
            d.hi = d.lo - 1;
            return false;
        }
        d.hi = static_cast<std::int64_t>(hi);
        enqueue_watchers(v);
        return true;
    }

    detail::wide min_term(const LinTerm& t) {
        const Interval& d = dom(t.var);
        return t.coef >= 0 ? detail::wide(t.coef) * d.lo : detail::wide(t.coef) * d.hi;
    }
    detail::wide max_term(const LinTerm& t) {
        const Interval& d = dom(t.var);
        return t.coef >= 0 ? detail::wide(t.coef) * d.hi : detail::wide(t.coef) * d.lo;
    }

    // sum(sign * a_i * x_i) <= rhs
    bool le(const std::vector<LinTerm>& terms, int sign, detail::wide rhs) {
        detail::wide minsum = 0;
        for (const auto& t : terms) {
            LinTerm s{t.coef * sign, t.var};
            minsum += min_term(s);
        }
        if (minsum > rhs) return false;
        for (const auto& t : terms) {
            LinTerm s{t.coef * sign, t.var};
            if (s.coef == 0) continue;
            detail::wide slack = rhs - (minsum - min_term(s));
            // a * x <= slack
            detail::wide before = min_term(s);
            bool ok = s.coef > 0 ? set_hi(t.var, detail::floor_div(slack, s.coef))
                                 : set_lo(t.var, detail::ceil_div(slack, s.coef));
            if (!ok) return false;
            minsum += min_term(s) - before;
        }
        return true;
    }

    // sum(a_i * x_i) != rhs; with interval domains this only prunes when a
    // single variable is left and the forbidden value sits on a bound.
    bool ne(const Linear& l) {
        detail::wide fixed = 0;
        const LinTerm* open = nullptr;
        for (const auto& t : l.terms) {
            if (t.coef == 0) continue;
            if (dom(t.var).fixed()) {
                fixed += detail::wide(t.coef) * dom(t.var).lo;
            } else {
                if (open) return true;
                open = &t;
            }
        }
        detail::wide residual = l.rhs - fixed;
        if (!open) return residual != 0;
        if (residual % open->coef != 0) return true;
        detail::wide v = residual / open->coef;
        Interval d = dom(open->var);
        if (v == d.lo) return set_lo(open->var, v + 1);
        if (v == d.hi) return set_hi(open->var, v - 1);
        return true;
    }

    bool apply(const Linear& l) {
        if (!le(l.terms, 1, l.rhs)) return false;
        if (l.op == LinOp::Eq && !le(l.terms, -1, -detail::wide(l.rhs))) return false;
        return true;
    }

    bool apply(const Reified& r) {
        if (!set_lo(r.b, 0) || !set_hi(r.b, 1)) return false;
        const Interval& b = dom(r.b);
        if (b.fixed()) {
            if (b.lo == 1) return apply(r.body);
            if (r.body.op == LinOp::Le) return le(r.body.terms, -1, -detail::wide(r.body.rhs) - 1);
            return ne(r.body);
        }
        detail::wide lo = 0, hi = 0;
        for (const auto& t : r.body.terms) {
            lo += min_term(t);
            hi += max_term(t);
        }
        bool entailed = r.body.op == LinOp::Le ? hi <= r.body.rhs : (lo == hi && lo == r.body.rhs);
        bool disentailed = r.body.op == LinOp::Le ? lo > r.body.rhs : (r.body.rhs < lo || r.body.rhs > hi);
        if (entailed) return set_lo(r.b, 1);
        if (disentailed) return set_hi(r.b, 0);
        return true;
    }

    bool apply(const MinOf& c) {
        if (c.xs.empty()) return false;
        detail::wide lo = INT64_MAX, hi = INT64_MAX;
        for (VarId x : c.xs) {
            lo = std::min<detail::wide>(lo, dom(x).lo);
            hi = std::min<detail::wide>(hi, dom(x).hi);
        }
        if (!set_lo(c.y, lo) || !set_hi(c.y, hi)) return false;
        std::int64_t ylo = dom(c.y).lo;
        std::int64_t yhi = dom(c.y).hi;
        const VarId* only = nullptr;
        std::size_t candidates = 0;
        for (const VarId& x : c.xs) {
            if (!set_lo(x, ylo)) return false;
            if (dom(x).lo <= yhi) {
                ++candidates;
                only = &x;
            }
        }
        if (candidates == 0) return false;
        if (candidates == 1) return set_hi(*only, yhi);
        return true;
    }

    bool apply(const MaxOf& c) {
        if (c.xs.empty()) return false;
        detail::wide lo = INT64_MIN, hi = INT64_MIN;
        for (VarId x : c.xs) {
            lo = std::max<detail::wide>(lo, dom(x).lo);
            hi = std::max<detail::wide>(hi, dom(x).hi);
        }
        if (!set_lo(c.y, lo) || !set_hi(c.y, hi)) return false;
        std::int64_t ylo = dom(c.y).lo;
        std::int64_t yhi = dom(c.y).hi;
        const VarId* only = nullptr;
        std::size_t candidates = 0;
        for (const VarId& x : c.xs) {
            if (!set_hi(x, yhi)) return false;
            if (dom(x).hi >= ylo) {
                ++candidates;
                only = &x;
            }
        }
        if (candidates == 0) return false;
        if (candidates == 1) return set_lo(*only, ylo);
        return true;
    }

    const FlatCSP& csp_;
    std::vector<std::vector<std::size_t>> watchers_;
    DomainStore* store_ = nullptr;
    std::deque<std::size_t> queue_;
    std::vector<bool> queued_;
};

inline DomainStore initial_store(const FlatCSP& csp) { return csp.domains; }

// One-shot propagation to fixpoint; nullopt when a domain empties.
inline std::optional<DomainStore> propagate(const FlatCSP& csp, DomainStore store) {
    Propagator p(csp);
    if (!p.propagate(store)) return std::nullopt;
    return store;
}

struct SolveStats {
    std::uint64_t nodes = 0;
    std::uint64_t failures = 0;
    std::uint64_t solutions = 0;
    double wall_ms = 0;
};

struct Solution {
    std::vector<std::int64_t> values;
    std::optional<Rational> objective; // objective variable / scale
};

enum class SolveStatus { Solved, Unsat, NodeLimit };

struct SolveResult {
    SolveStatus status = SolveStatus::Unsat;
    std::optional<Solution> solution;
    SolveStats stats;
};

struct SolveOptions {
    std::optional<std::uint64_t> node_limit;
};

namespace detail {

class Search {
public:
    Search(const FlatCSP& csp, SolveOptions opts, bool optimize)
        : csp_(csp), prop_(csp), opts_(opts), optimize_(optimize && csp.objective) {}

    SolveResult run() {
        auto t0 = std::chrono::steady_clock::now();
        DomainStore root = csp_.domains;
        for (const auto& d : root)
            if (d.empty()) return finish(t0);
        if (prop_.propagate(root)) dfs(std::move(root));
        else ++result_.stats.failures;
        return finish(t0);
    }

private:
    SolveResult finish(std::chrono::steady_clock::time_point t0) {
        result_.stats.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (limit_hit_) result_.status = SolveStatus::NodeLimit;
        else result_.status = result_.solution ? SolveStatus::Solved : SolveStatus::Unsat;
        return std::move(result_);
    }

    // Applies the incumbent bound; false if the node is pruned.
    bool bound(DomainStore& s) {
        if (!optimize_ || !incumbent_) return true;
        VarId o = csp_.objective->var;
        if (csp_.objective->sense == Sense::Maximize) {
            if (s[o].hi <= *incumbent_) return false;
            if (s[o].lo <= *incumbent_) {
                s[o].lo = *incumbent_ + 1;
                return prop_.propagate_from(s, o);
            }
        } else {
            if (s[o].lo >= *incumbent_) return false;
            if (s[o].hi >= *incumbent_) {
                s[o].hi = *incumbent_ - 1;
                return prop_.propagate_from(s, o);
            }
        }
        return true;
    }

    // Returns false to stop the whole search.
    bool dfs(DomainStore store) {
        ++result_.stats.nodes;
        if (opts_.node_limit && result_.stats.nodes > *opts_.node_limit) {
            limit_hit_ = true;
            return false;
        }
        if (!bound(store)) {
            ++result_.stats.failures;
            return true;
        }
        VarId branch = store.size();
        for (VarId v = 0; v < store.size(); ++v) {
            if (!store[v].fixed()) {
                branch = v;
                break;
            }
        }
        if (branch == store.size()) return record(store);

        std::int64_t lo = store[branch].lo;
        DomainStore left = store;
        left[branch].hi = lo;
        if (prop_.propagate_from(left, branch)) {
            if (!dfs(std::move(left))) return false;
        } else {
            ++result_.stats.failures;
        }
        store[branch].lo = lo + 1;
        if (prop_.propagate_from(store, branch)) return dfs(std::move(store));
        ++result_.stats.failures;
        return true;
    }

    bool record(const DomainStore& store) {
        Solution sol;
        sol.values.reserve(store.size());
        for (const auto& d : store) sol.values.push_back(d.lo);
        if (!check_solution(csp_, sol.values))
            throw std::logic_error("solver produced an assignment that violates a constraint");
        ++result_.stats.solutions;
        if (csp_.objective) {
            std::int64_t v = sol.values[csp_.objective->var];
            sol.objective = Rational(v, csp_.objective->scale);
            incumbent_ = v;
        }
        result_.solution = std::move(sol);
        return optimize_; // satisfaction stops at the first solution
    }

    const FlatCSP& csp_;
    Propagator prop_;
    SolveOptions opts_;
    bool optimize_;
    std::optional<std::int64_t> incumbent_;
    bool limit_hit_ = false;
    SolveResult result_;
};

} // namespace detail

// First solution in search order.
inline SolveResult solve_sat(const FlatCSP& csp, SolveOptions opts = {}) {
    return detail::Search(csp, opts, false).run();
}

// Optimal solution by branch-and-bound; behaves like solve_sat without an objective.
inline SolveResult solve_opt(const FlatCSP& csp, SolveOptions opts = {}) {
    return detail::Search(csp, opts, true).run();
}

} // namespace scsp
