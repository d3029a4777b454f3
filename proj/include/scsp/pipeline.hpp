// SPDX-License-Identifier: Apache-2.0
#pragma once

// compile -> solve -> extract policy, plus the report rendering shared by the
// CLI's text and JSON outputs.

#include "scsp/compiler.hpp"
#include "scsp/oracle.hpp"
#include "scsp/solver.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace scsp {

struct PipelineResult {
    Compilation compilation;
    SolveResult solve;
    std::optional<Policy> policy; // present iff a feasible policy was found
    std::optional<Rational> objective;
};

inline PipelineResult run_pipeline(const StochasticModel& m, std::size_t max_scenarios = default_max_scenarios,
                                   SolveOptions opts = {}) {
    PipelineResult r;
    r.compilation = compile(m, max_scenarios);
    r.solve = solve_opt(r.compilation.csp, opts);
    if (r.solve.solution) {
        r.policy = extract_policy(r.compilation, r.solve.solution->values);
        r.objective = r.solve.solution->objective;
    }
    return r;
}

struct PolicyLine {
    std::string variable;
    std::string history;
    std::int64_t value = 0;
};

struct RunStats {
    std::size_t scenarios = 0;
    std::size_t flat_vars = 0;
    std::size_t flat_constraints = 0;
    std::uint64_t nodes = 0;
    double wall_ms = 0;
};

struct RunReport {
    std::string status; // ok | unsat | infeasible | error
    std::optional<Rational> objective;
    std::vector<PolicyLine> policy;
    RunStats stats;
};

inline std::vector<PolicyLine> render_policy(const StochasticModel& m, const ScenarioTree& tree,
                                             const PolicyLayout& layout, const Policy& p) {
    std::vector<PolicyLine> lines;
    for (std::size_t i = 0; i < layout.slots.size(); ++i) {
        const auto& slot = layout.slots[i];
        lines.push_back({m.decisions[slot.decision].name, render_history(m, tree, slot.node), p.values[i]});
    }
    return lines;
}

inline RunReport make_report(const StochasticModel& m, const PipelineResult& r, bool stable) {
    RunReport rep;
    const auto& c = r.compilation;
    rep.status = r.policy ? "ok" : "infeasible";
    rep.objective = r.objective;
    if (r.policy) rep.policy = render_policy(m, c.tree, c.layout, *r.policy);
    rep.stats = {c.tree.scenarios.size(), c.csp.var_count(), c.csp.constraints.size(), r.solve.stats.nodes,
                 stable ? 0.0 : r.solve.stats.wall_ms};
    return rep;
}

inline std::string approx(const Rational& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", r.to_double());
    return buf;
}

inline std::string to_text(const RunReport& rep) {
    std::string out = "status: " + rep.status + "\n";
    if (rep.objective) out += "objective: " + rep.objective->str() + " (" + approx(*rep.objective) + ")\n";
    if (!rep.policy.empty()) {
        out += "policy:\n";
        for (const auto& l : rep.policy)
            out += "  " + l.variable + " [" + l.history + "] = " + std::to_string(l.value) + "\n";
    }
    char ms[64];
    std::snprintf(ms, sizeof ms, "%.3f", rep.stats.wall_ms);
    out += "scenarios: " + std::to_string(rep.stats.scenarios) + "\n";
    out += "flat_vars: " + std::to_string(rep.stats.flat_vars) + "\n";
    out += "flat_constraints: " + std::to_string(rep.stats.flat_constraints) + "\n";
    out += "nodes: " + std::to_string(rep.stats.nodes) + "\n";
    out += "wall_ms: " + std::string(ms) + "\n";
    return out;
}

inline nlohmann::ordered_json to_json(const RunReport& rep) {
    nlohmann::ordered_json j;
    j["status"] = rep.status;
    if (rep.objective) {
        j["objective"] = rep.objective->str();
        j["objective_approx"] = rep.objective->to_double();
    } else {
        j["objective"] = nullptr;
        j["objective_approx"] = nullptr;
    }
    j["policy"] = nlohmann::ordered_json::array();
    for (const auto& l : rep.policy) {
        nlohmann::ordered_json e;
        e["variable"] = l.variable;
        e["history"] = l.history;
        e["value"] = l.value;
        j["policy"].push_back(std::move(e));
    }
    nlohmann::ordered_json s;
    s["scenarios"] = rep.stats.scenarios;
    s["flat_vars"] = rep.stats.flat_vars;
    s["flat_constraints"] = rep.stats.flat_constraints;
    s["nodes"] = rep.stats.nodes;
    s["wall_ms"] = rep.stats.wall_ms;
    j["stats"] = std::move(s);
    return j;
}

// Outcome of cross-checking the compiled pipeline against the oracle.
struct Verification {
    bool pipeline_feasible = false;
    bool oracle_feasible = false;
    std::optional<Rational> pipeline_objective;
    std::optional<Rational> oracle_objective;
    bool policy_consistent = true; // the solver's policy re-evaluates to its reported value and is feasible
    std::uint64_t policies_checked = 0;

    bool agree() const {
        return pipeline_feasible == oracle_feasible && pipeline_objective == oracle_objective && policy_consistent;
    }
};

inline Verification verify_model(const StochasticModel& m, OracleOptions opts = {}) {
    Verification v;
    PipelineResult p = run_pipeline(m, opts.max_scenarios);
    OracleResult o = oracle_solve(m, opts);
    v.pipeline_feasible = p.policy.has_value();
    v.pipeline_objective = p.objective;
    v.oracle_feasible = o.feasible;
    v.oracle_objective = o.objective;
    v.policies_checked = o.policies_checked;
    if (p.policy) {
        const auto& c = p.compilation;
        PolicyEvaluation ev = evaluate_policy(m, c.tree, c.layout, *p.policy);
        v.policy_consistent = feasible(m, ev);
        if (m.objective) v.policy_consistent = v.policy_consistent && ev.objective &&
                                               objective_value(*m.objective, *ev.objective) == p.objective;
    }
    return v;
}

} // namespace scsp
