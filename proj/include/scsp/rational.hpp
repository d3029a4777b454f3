// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exact fractions over 64-bit integers. Every value is kept reduced with a
// positive denominator; intermediate products use 128-bit arithmetic and
// any result that does not fit back into 64 bits throws RationalOverflow.

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace scsp {

struct RationalOverflow : std::overflow_error {
    using std::overflow_error::overflow_error;
};

namespace detail {

using wide = __int128;

inline std::int64_t narrow(wide v) {
    if (v > static_cast<wide>(INT64_MAX) || v < static_cast<wide>(INT64_MIN))
        throw RationalOverflow("rational arithmetic overflow");
    return static_cast<std::int64_t>(v);
}

inline wide wide_gcd(wide a, wide b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

} // namespace detail

class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value), den_(1) {} // NOLINT: implicit from integer

    Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        using detail::wide;
        return make(wide(a.num_) * b.den_ + wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        using detail::wide;
        return make(wide(a.num_) * b.den_ - wide(b.num_) * a.den_, wide(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        using detail::wide;
        return make(wide(a.num_) * b.num_, wide(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        using detail::wide;
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return make(wide(a.num_) * b.den_, wide(a.den_) * b.num_);
    }
    Rational operator-() const { return make(-detail::wide(num_), den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        using detail::wide;
        return wide(a.num_) * b.den_ <=> wide(b.num_) * a.den_;
    }

    // "num/den", always with the denominator, e.g. "3/2", "5/1", "-1/3".
    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    static Rational make(detail::wide num, detail::wide den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        detail::wide g = detail::wide_gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        Rational r;
        r.num_ = detail::narrow(num);
        r.den_ = detail::narrow(den);
        return r;
    }

    void assign(std::int64_t num, std::int64_t den) { *this = make(num, den); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0) return 0;
    detail::wide g = detail::wide_gcd(a, b);
    detail::wide l = detail::wide(a) / g * detail::wide(b);
    return detail::narrow(l < 0 ? -l : l);
}

// Exact sum of coefficient * value over the terms.
inline Rational rat_fold(std::span<const std::pair<Rational, std::int64_t>> terms) {
    Rational acc;
    for (const auto& [coef, value] : terms) acc += coef * Rational(value);
    return acc;
}

} // namespace scsp
