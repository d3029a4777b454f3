// SPDX-License-Identifier: Apache-2.0
#pragma once

// The `scsp` command line: check, compile, solve, solve-flat and verify.
// Kept in the library so tests can drive it in-process.
//
// Exit codes: 0 success; 1 usage, I/O, parse, validation or size-limit
// error; 2 solve found no feasible policy / flat solution; 3 verify found a
// disagreement between the compiled pipeline and the oracle.

#include "scsp/lower.hpp"
#include "scsp/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace scsp::cli {

enum ExitCode { Ok = 0, Error = 1, NoSolution = 2, Mismatch = 3 };

namespace detail {

inline std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void report_error(std::ostream& err, const std::string& code, const std::string& msg) {
    err << "error[" << code << "]: " << msg << "\n";
}

// Reads and lowers a model file; prints diagnostics and returns nullopt on failure.
inline std::optional<StochasticModel> load_model(const std::string& path, std::ostream& err) {
    auto text = read_file(path);
    if (!text) {
        report_error(err, "IO", "cannot read '" + path + "'");
        return std::nullopt;
    }
    auto r = parse_model(*text);
    for (const auto& d : r.diagnostics) err << format(d, path) << "\n";
    if (!r.ok()) return std::nullopt;
    return std::move(*r.value);
}

inline void print_report(std::ostream& out, const RunReport& rep, const std::string& fmt) {
    if (fmt == "json") out << to_json(rep).dump(2) << "\n";
    else out << to_text(rep);
}

inline std::string show(const std::optional<Rational>& r) { return r ? r->str() : "none"; }

} // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic constraint programs: check, compile, solve and verify .scsp models", "scsp"};
    app.require_subcommand(1);

    std::string file;
    std::string output;
    std::string fmt = "text";
    std::size_t max_scenarios = default_max_scenarios;
    std::uint64_t max_policies = default_max_policies;
    bool stable = false;

    auto* check = app.add_subcommand("check", "parse and validate a model");
    check->add_option("file", file, "model file (.scsp)")->required();

    auto* comp = app.add_subcommand("compile", "write the flat CSP ('scsp-flat 1')");
    comp->add_option("file", file, "model file (.scsp)")->required();
    comp->add_option("-o,--output", output, "output path (default: standard output)");
    comp->add_option("--max-scenarios", max_scenarios, "scenario tree size cap");

    auto* solve = app.add_subcommand("solve", "compile and solve a model");
    solve->add_option("file", file, "model file (.scsp)")->required();
    solve->add_option("--format", fmt, "report format")->check(CLI::IsMember({"text", "json"}));
    solve->add_option("--max-scenarios", max_scenarios, "scenario tree size cap");
    solve->add_flag("--stable", stable, "zero timing fields so output is reproducible");

    auto* flat = app.add_subcommand("solve-flat", "solve a 'scsp-flat 1' file directly");
    flat->add_option("file", file, "flat CSP file")->required();
    flat->add_option("--format", fmt, "report format")->check(CLI::IsMember({"text", "json"}));
    flat->add_flag("--stable", stable, "zero timing fields so output is reproducible");

    auto* verify = app.add_subcommand("verify", "cross-check the compiled pipeline against brute force");
    verify->add_option("file", file, "model file (.scsp)")->required();
    verify->add_option("--max-policies", max_policies, "policy enumeration cap");
    verify->add_option("--max-scenarios", max_scenarios, "scenario tree size cap");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "error[USAGE]: " << e.what() << "\n";
        return Error;
    }

    try {
        if (check->parsed()) {
            if (!detail::load_model(file, err)) return Error;
            out << file << ": ok\n";
            return Ok;
        }
        if (comp->parsed()) {
            auto m = detail::load_model(file, err);
            if (!m) return Error;
            std::string text = dump(compile(*m, max_scenarios).csp);
            if (output.empty()) {
                out << text;
            } else {
                std::ofstream f(output, std::ios::binary);
                if (!(f << text)) {
                    detail::report_error(err, "IO", "cannot write '" + output + "'");
                    return Error;
                }
            }
            return Ok;
        }
        if (solve->parsed()) {
            auto m = detail::load_model(file, err);
            if (!m) return Error;
            RunReport rep = make_report(*m, run_pipeline(*m, max_scenarios), stable);
            detail::print_report(out, rep, fmt);
            return rep.status == "ok" ? Ok : NoSolution;
        }
        if (flat->parsed()) {
            auto text = detail::read_file(file);
            if (!text) {
                detail::report_error(err, "IO", "cannot read '" + file + "'");
                return Error;
            }
            FlatCSP csp = read_flat(*text);
            SolveResult res = solve_opt(csp);
            RunReport rep;
            rep.status = res.solution ? "ok" : "unsat";
            if (res.solution) {
                rep.objective = res.solution->objective;
                for (VarId v = 0; v < csp.var_count(); ++v)
                    rep.policy.push_back({"v" + std::to_string(v), "", res.solution->values[v]});
            }
            rep.stats = {0, csp.var_count(), csp.constraints.size(), res.stats.nodes,
                         stable ? 0.0 : res.stats.wall_ms};
            detail::print_report(out, rep, fmt);
            return res.solution ? Ok : NoSolution;
        }
        if (verify->parsed()) {
            auto m = detail::load_model(file, err);
            if (!m) return Error;
            Verification v = verify_model(*m, {max_scenarios, max_policies});
            auto line = [&](const char* who, bool feas, const std::optional<Rational>& obj) {
                out << who << ": " << (feas ? "feasible" : "infeasible");
                if (feas && obj) out << " " << obj->str();
                out << "\n";
            };
            line("pipeline", v.pipeline_feasible, v.pipeline_objective);
            line("oracle", v.oracle_feasible, v.oracle_objective);
            out << "policies: " << v.policies_checked << "\n";
            out << "policy-check: " << (v.policy_consistent ? "ok" : "FAILED") << "\n";
            if (v.agree()) {
                out << "result: agree\n";
                return Ok;
            }
            out << "result: MISMATCH\n";
            err << "verify: pipeline " << (v.pipeline_feasible ? "feasible " : "infeasible ")
                << detail::show(v.pipeline_objective) << " vs oracle "
                << (v.oracle_feasible ? "feasible " : "infeasible ") << detail::show(v.oracle_objective) << "\n";
            return Mismatch;
        }
    } catch (const SizeLimitError& e) {
        detail::report_error(err, "SIZE_LIMIT", e.what());
        return Error;
    } catch (const RationalOverflow& e) {
        detail::report_error(err, "OVERFLOW", e.what());
        return Error;
    } catch (const FlatFormatError& e) {
        detail::report_error(err, "FLAT_FORMAT", e.what());
        return Error;
    }
    return Error;
}

inline int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace scsp::cli
