#pragma once

#include <cmath>
#include <stdexcept>

#include "opdyn/logdomain.hpp"
#include "opdyn/rational.hpp"

namespace opdyn {

// Exact scalar over Q or Q(i). Division stays inside the type, so exact-mode
// operator iteration and conjugation checks close under the arithmetic.
struct Scalar {
    Rational re = 0;
    Rational im = 0;

    Scalar() = default;
    Scalar(Rational r) : re(std::move(r)) {}
    Scalar(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    static Scalar one() { return Scalar(Rational(1)); }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }
    Rational abs2() const { return re * re + im * im; }

    Scalar operator+(const Scalar& o) const { return {re + o.re, im + o.im}; }
    Scalar operator-(const Scalar& o) const { return {re - o.re, im - o.im}; }
    Scalar operator*(const Scalar& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    Scalar inverse() const {
        const Rational a2 = abs2();
        if (a2 == 0) throw std::domain_error("Scalar: inverse of zero");
        return {re / a2, -im / a2};
    }
    Scalar operator/(const Scalar& o) const { return *this * o.inverse(); }
    bool operator==(const Scalar& o) const = default;

    LogScalar to_log() const {
        if (is_zero()) return LogScalar::zero();
        if (im == 0) {
            return {LogReal::from_rational(rat_abs(re)), re > 0 ? 0.0 : std::acos(-1.0)};
        }
        const double x = to_double(re), y = to_double(im);
        return {LogReal::from_log(0.5 * log_rational(abs2())), std::atan2(y, x)};
    }
};

inline Scalar scalar_pow(const Scalar& base, long long e) {
    if (e == 0) return Scalar::one();
    Scalar b = e < 0 ? base.inverse() : base;
    unsigned long long n = e < 0 ? static_cast<unsigned long long>(-e)
                                 : static_cast<unsigned long long>(e);
    Scalar acc = Scalar::one();
    while (n > 0) {
        if (n & 1) acc = acc * b;
        b = b * b;
        n >>= 1;
    }
    return acc;
}

// |z|^p as an exact rational. Requires integer p for real z, even p otherwise.
inline Rational abs_pow_exact(const Scalar& z, long long p_int) {
    if (z.is_zero()) return Rational(0);
    if (z.is_real()) return rat_pow(rat_abs(z.re), p_int);
    if (p_int % 2 != 0)
        throw std::domain_error("abs_pow_exact: odd exponent on a complex value");
    return rat_pow(z.abs2(), p_int / 2);
}

}  // namespace opdyn
