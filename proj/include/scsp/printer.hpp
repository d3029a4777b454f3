// SPDX-License-Identifier: Apache-2.0
#pragma once

// Renders a model back to .scsp source. Re-parsing the output yields a
// structurally identical model.

#include "scsp/model.hpp"

#include <sstream>
#include <string>

namespace scsp {

namespace detail {

// Binding strength, loosest first; mirrors the grammar's nonterminals.
enum Prec { PImplies = 0, POr = 1, PAnd = 2, PNot = 3, PCmp = 4, PSum = 5, PTerm = 6, PAtom = 7 };

inline int precedence(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Implies: return PImplies;
    case ExprKind::Or: return POr;
    case ExprKind::And: return PAnd;
    case ExprKind::Not: return PNot;
    case ExprKind::Cmp: return PCmp;
    case ExprKind::Add:
    case ExprKind::Sub: return PSum;
    case ExprKind::Scale: return PTerm;
    case ExprKind::Const:
    case ExprKind::Var: return PAtom;
    }
    return PAtom;
}

inline void print_expr(std::ostream& os, const Expr& e, int min_prec) {
    bool parens = precedence(e) < min_prec;
    if (parens) os << '(';
    switch (e.kind) {
    case ExprKind::Const: os << e.value; break;
    case ExprKind::Var: os << e.name; break;
    case ExprKind::Add:
    case ExprKind::Sub:
        print_expr(os, *e.args[0], PSum);
        os << (e.kind == ExprKind::Add ? " + " : " - ");
        print_expr(os, *e.args[1], PTerm);
        break;
    case ExprKind::Scale:
        os << e.value << '*';
        print_expr(os, *e.args[0], PAtom);
        break;
    case ExprKind::Cmp:
        print_expr(os, *e.args[0], PSum);
        os << ' ' << to_string(e.op) << ' ';
        print_expr(os, *e.args[1], PSum);
        break;
    case ExprKind::And:
        print_expr(os, *e.args[0], PAnd);
        os << " /\\ ";
        print_expr(os, *e.args[1], PNot);
        break;
    case ExprKind::Or:
        print_expr(os, *e.args[0], POr);
        os << " \\/ ";
        print_expr(os, *e.args[1], PAnd);
        break;
    case ExprKind::Not:
        os << '!';
        print_expr(os, *e.args[0], PCmp);
        break;
    case ExprKind::Implies:
        print_expr(os, *e.args[0], POr);
        os << " -> ";
        print_expr(os, *e.args[1], PImplies);
        break;
    }
    if (parens) os << ')';
}

} // namespace detail

inline std::string to_source(const Expr& e) {
    std::ostringstream os;
    detail::print_expr(os, e, detail::PImplies);
    return os.str();
}

inline std::string to_source(const StochasticModel& m) {
    std::ostringstream os;
    for (const auto& d : m.decisions)
        os << "int " << d.name << " in " << d.lo << ".." << d.hi << " stage " << d.stage << ";\n";
    for (const auto& v : m.stochastics) {
        os << "stoch " << v.name << " in {";
        for (std::size_t i = 0; i < v.distribution.size(); ++i) {
            if (i) os << ", ";
            os << v.distribution[i].value << ":" << v.distribution[i].prob.num() << "/" << v.distribution[i].prob.den();
        }
        os << "} stage " << v.stage << ";\n";
    }
    for (const auto& c : m.constraints) {
        if (c.kind == ConstraintKind::Chance) os << "chance(" << c.theta.num() << "/" << c.theta.den() << ") ";
        os << to_source(*c.body) << ";\n";
    }
    if (m.objective)
        os << to_string(m.objective->sense) << ' ' << to_string(m.objective->aggregator) << ' '
           << to_source(*m.objective->body) << ";\n";
    return os.str();
}

} // namespace scsp
