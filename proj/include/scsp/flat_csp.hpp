// SPDX-License-Identifier: Apache-2.0
#pragma once

// Conventional integer CSP: interval-domain variables, linear constraints
// (= or <=), reified linear constraints, min/max, and an optional objective
// variable whose value is reported divided by a positive integer scale.
//
// Text form ("scsp-flat 1"), one item per line:
//
//   scsp-flat 1
//   # free-form comment / mapping metadata
//   var <id> <lo> <hi>
//   lin <eq|le> <c> <k> <a1> <x1> ... <ak> <xk>          sum(ai*xi) op c
//   reif <b> <eq|le> <c> <k> <a1> <x1> ... <ak> <xk>     b <-> sum(ai*xi) op c
//   min <y> <k> <x1> ... <xk>                            y = min(x1..xk)
//   max <y> <k> <x1> ... <xk>                            y = max(x1..xk)
//   objective <maximize|minimize> <var> <scale>

#include "scsp/model.hpp"

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace scsp {

using VarId = std::size_t;

struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool empty() const { return lo > hi; }
    bool fixed() const { return lo == hi; }
    std::uint64_t size() const { return empty() ? 0 : static_cast<std::uint64_t>(hi - lo) + 1; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class LinOp { Eq, Le };

inline const char* to_string(LinOp op) { return op == LinOp::Eq ? "eq" : "le"; }

struct LinTerm {
    std::int64_t coef = 0;
    VarId var = 0;

    friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

struct Linear {
    std::vector<LinTerm> terms;
    LinOp op = LinOp::Le;
    std::int64_t rhs = 0;

    friend bool operator==(const Linear&, const Linear&) = default;
};

struct Reified {
    VarId b = 0;
    Linear body;

    friend bool operator==(const Reified&, const Reified&) = default;
};

struct MinOf {
    VarId y = 0;
    std::vector<VarId> xs;

    friend bool operator==(const MinOf&, const MinOf&) = default;
};

struct MaxOf {
    VarId y = 0;
    std::vector<VarId> xs;

    friend bool operator==(const MaxOf&, const MaxOf&) = default;
};

using FlatConstraint = std::variant<Linear, Reified, MinOf, MaxOf>;

struct FlatObjective {
    VarId var = 0;
    Sense sense = Sense::Maximize;
    std::int64_t scale = 1;

    friend bool operator==(const FlatObjective&, const FlatObjective&) = default;
};

struct FlatCSP {
    std::vector<Interval> domains;
    std::vector<FlatConstraint> constraints;
    std::optional<FlatObjective> objective;
    std::vector<std::string> comments; // emitted after the header, without the leading "# "

    VarId add_var(std::int64_t lo, std::int64_t hi) {
        domains.push_back({lo, hi});
        return domains.size() - 1;
    }
    std::size_t var_count() const { return domains.size(); }

    friend bool operator==(const FlatCSP&, const FlatCSP&) = default;
};

struct FlatFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_terms(std::ostream& os, const Linear& l) {
    os << ' ' << to_string(l.op) << ' ' << l.rhs << ' ' << l.terms.size();
    for (const auto& t : l.terms) os << ' ' << t.coef << ' ' << t.var;
}

} // namespace detail

inline std::string dump(const FlatCSP& csp) {
    std::ostringstream os;
    os << "scsp-flat 1\n";
    for (const auto& c : csp.comments) os << "# " << c << '\n';
    for (VarId v = 0; v < csp.domains.size(); ++v)
        os << "var " << v << ' ' << csp.domains[v].lo << ' ' << csp.domains[v].hi << '\n';
    for (const auto& c : csp.constraints) {
        if (const auto* l = std::get_if<Linear>(&c)) {
            os << "lin";
            detail::write_terms(os, *l);
        } else if (const auto* r = std::get_if<Reified>(&c)) {
            os << "reif " << r->b;
            detail::write_terms(os, r->body);
        } else {
            bool is_min = std::holds_alternative<MinOf>(c);
            VarId y = is_min ? std::get<MinOf>(c).y : std::get<MaxOf>(c).y;
            const auto& xs = is_min ? std::get<MinOf>(c).xs : std::get<MaxOf>(c).xs;
            os << (is_min ? "min " : "max ") << y << ' ' << xs.size();
            for (VarId x : xs) os << ' ' << x;
        }
        os << '\n';
    }
    if (csp.objective)
        os << "objective " << to_string(csp.objective->sense) << ' ' << csp.objective->var << ' '
           << csp.objective->scale << '\n';
    return os.str();
}

namespace detail {

class FlatReader {
public:
    explicit FlatReader(std::string_view text) : text_(text) {}

    FlatCSP run() {
        FlatCSP csp;
        bool header = false;
        std::size_t start = 0;
        while (start <= text_.size()) {
            std::size_t end = text_.find('\n', start);
            if (end == std::string_view::npos) end = text_.size();
            std::string line(text_.substr(start, end - start));
            start = end + 1;
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] == '#') {
                csp.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
                continue;
            }
            in_ = std::istringstream(line);
            std::string word;
            in_ >> word;
            if (!header) {
                std::string version;
                in_ >> version;
                if (word != "scsp-flat" || version != "1") error("missing 'scsp-flat 1' header");
                header = true;
                continue;
            }
            if (word == "var") {
                auto id = count();
                if (id != csp.domains.size()) error("variable ids must be dense and in order");
                std::int64_t lo = integer();
                std::int64_t hi = integer();
                csp.domains.push_back({lo, hi});
            } else if (word == "lin") {
                csp.constraints.push_back(linear(csp));
            } else if (word == "reif") {
                Reified r;
                r.b = var(csp);
                r.body = linear(csp);
                csp.constraints.push_back(r);
            } else if (word == "min" || word == "max") {
                VarId y = var(csp);
                std::size_t k = count();
                std::vector<VarId> xs;
                for (std::size_t i = 0; i < k; ++i) xs.push_back(var(csp));
                if (xs.empty()) error("min/max needs at least one argument");
                if (word == "min") csp.constraints.push_back(MinOf{y, xs});
                else csp.constraints.push_back(MaxOf{y, xs});
            } else if (word == "objective") {
                std::string sense;
                in_ >> sense;
                if (sense != "maximize" && sense != "minimize") error("bad objective sense '" + sense + "'");
                VarId v = var(csp);
                std::int64_t scale = integer();
                if (scale <= 0) error("objective scale must be positive");
                csp.objective = FlatObjective{v, sense == "maximize" ? Sense::Maximize : Sense::Minimize, scale};
            } else {
                error("unknown item '" + word + "'");
            }
            std::string rest;
            if (in_ >> rest) error("trailing token '" + rest + "'");
        }
        if (!header) error("missing 'scsp-flat 1' header");
        return csp;
    }

private:
    [[noreturn]] void error(const std::string& msg) const {
        throw FlatFormatError("line " + std::to_string(line_no_) + ": " + msg);
    }

    std::int64_t integer() {
        std::int64_t v = 0;
        if (!(in_ >> v)) error("expected integer");
        return v;
    }
    std::size_t count() {
        std::int64_t v = integer();
        if (v < 0) error("expected non-negative integer");
        return static_cast<std::size_t>(v);
    }
    VarId var(const FlatCSP& csp) {
        std::size_t v = count();
        if (v >= csp.domains.size()) error("undeclared variable " + std::to_string(v));
        return v;
    }
    Linear linear(const FlatCSP& csp) {
        Linear l;
        std::string op;
        in_ >> op;
        if (op == "eq") l.op = LinOp::Eq;
        else if (op == "le") l.op = LinOp::Le;
        else error("bad linear operator '" + op + "'");
        l.rhs = integer();
        std::size_t k = count();
        for (std::size_t i = 0; i < k; ++i) {
            std::int64_t a = integer();
            l.terms.push_back({a, var(csp)});
        }
        return l;
    }

    std::string_view text_;
    std::istringstream in_;
    int line_no_ = 0;
};

} // namespace detail

// Parses the text form. Variables must be declared before use.
inline FlatCSP read_flat(std::string_view text) { return detail::FlatReader(text).run(); }

} // namespace scsp
