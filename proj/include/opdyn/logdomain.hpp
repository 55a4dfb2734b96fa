#pragma once

#include <cmath>
#include <limits>

#include "opdyn/rational.hpp"

namespace opdyn {

// Nonnegative reals in log domain. Products of thousands of weights leave the
// range of binary floating point; everything that multiplies cocycle factors
// or sums p-th powers goes through this type.
struct LogReal {
    double lg = -std::numeric_limits<double>::infinity();  // natural log; -inf encodes 0

    static LogReal zero() { return LogReal{}; }
    static LogReal one() { return LogReal{0.0}; }
    static LogReal from_log(double lg) { return LogReal{lg}; }
    static LogReal from_value(double v) {
        return v <= 0.0 ? zero() : LogReal{std::log(v)};
    }
    static LogReal from_rational(const Rational& q) {
        return q == 0 ? zero() : LogReal{log_rational(q)};
    }

    bool is_zero() const { return std::isinf(lg) && lg < 0; }
    double value() const { return std::exp(lg); }
    double log10_value() const { return lg / std::log(10.0); }

    LogReal& operator*=(LogReal o) {
        if (is_zero() || o.is_zero()) { lg = zero().lg; return *this; }
        lg += o.lg;
        return *this;
    }
    LogReal& operator/=(LogReal o) {
        if (is_zero()) return *this;
        lg -= o.lg;
        return *this;
    }
    // log-sum-exp accumulation
    LogReal& operator+=(LogReal o) {
        if (o.is_zero()) return *this;
        if (is_zero()) { lg = o.lg; return *this; }
        const double hi = std::max(lg, o.lg), lo = std::min(lg, o.lg);
        lg = hi + std::log1p(std::exp(lo - hi));
        return *this;
    }

    friend LogReal operator*(LogReal a, LogReal b) { return a *= b; }
    friend LogReal operator/(LogReal a, LogReal b) { return a /= b; }
    friend LogReal operator+(LogReal a, LogReal b) { return a += b; }
    friend bool operator<(LogReal a, LogReal b) { return a.lg < b.lg; }
    friend bool operator>(LogReal a, LogReal b) { return a.lg > b.lg; }
    friend bool operator<=(LogReal a, LogReal b) { return a.lg <= b.lg; }
    friend bool operator>=(LogReal a, LogReal b) { return a.lg >= b.lg; }
};

inline LogReal pow(LogReal a, double e) {
    if (a.is_zero()) return e > 0 ? LogReal::zero() : LogReal::one();
    return LogReal::from_log(a.lg * e);
}

// A field scalar in polar log form: modulus in log domain plus an argument.
// Real values carry arg 0 or pi.
struct LogScalar {
    LogReal mod;
    double arg = 0.0;

    static LogScalar one() { return {LogReal::one(), 0.0}; }
    static LogScalar zero() { return {LogReal::zero(), 0.0}; }

    bool is_zero() const { return mod.is_zero(); }

    LogScalar& operator*=(const LogScalar& o) {
        mod *= o.mod;
        arg = is_zero() ? 0.0 : arg + o.arg;
        return *this;
    }
    friend LogScalar operator*(LogScalar a, const LogScalar& b) { return a *= b; }

    LogScalar inverse() const {
        if (is_zero()) throw std::domain_error("LogScalar: inverse of zero");
        return {LogReal::from_log(-mod.lg), -arg};
    }

    double real_part() const { return mod.value() * std::cos(arg); }
    double imag_part() const { return mod.value() * std::sin(arg); }
};

// Relative gap between two nonnegative log-domain magnitudes, measured as
// |a-b| / max(a, b); exact zeros compare equal only to each other.
inline double relative_gap(LogReal a, LogReal b) {
    if (a.is_zero() && b.is_zero()) return 0.0;
    if (a.is_zero() || b.is_zero()) return 1.0;
    const double d = std::abs(a.lg - b.lg);
    // for small log gaps, |a-b|/max ~ 1 - exp(-d)
    return -std::expm1(-d);
}

}  // namespace opdyn
