#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace opdyn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// log of a positive big integer without overflowing the double conversion.
inline double log_bigint(const BigInt& n) {
    if (n <= 0) throw std::domain_error("log_bigint: nonpositive argument");
    const unsigned bits = msb(n);
    if (bits < 512) return std::log(n.convert_to<double>());
    const unsigned shift = bits - 512;
    const BigInt reduced = n >> shift;
    return std::log(reduced.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

/// log of a positive rational, safe for values far outside double range.
inline double log_rational(const Rational& q) {
    if (q <= 0) throw std::domain_error("log_rational: nonpositive argument");
    return log_bigint(numerator(q)) - log_bigint(denominator(q));
}

inline Rational rat_pow(const Rational& base, long long e) {
    if (e == 0) return Rational(1);
    if (base == 0) {
        if (e < 0) throw std::domain_error("rat_pow: zero base, negative exponent");
        return Rational(0);
    }
    const unsigned long long mag = e < 0 ? static_cast<unsigned long long>(-e)
                                         : static_cast<unsigned long long>(e);
    BigInt num = pow(numerator(base), static_cast<unsigned>(mag));
    BigInt den = pow(denominator(base), static_cast<unsigned>(mag));
    return e < 0 ? Rational(den, num) : Rational(num, den);
}

inline Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// Decimal integer from a string; leading zeros are stripped so the bigint
// constructor cannot reinterpret them as an octal prefix.
inline BigInt parse_decimal_int(std::string s) {
    if (s.empty()) throw std::invalid_argument("parse_rational: empty number");
    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("parse_rational: invalid digits in \"" + s + "\"");
    const auto first = s.find_first_not_of('0');
    s = first == std::string::npos ? "0" : s.substr(first);
    BigInt v(s);
    return negative ? BigInt(-v) : v;
}

/// Parses "p", "p/q" or a plain decimal like "-3.25" into an exact rational.
inline Rational parse_rational(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("parse_rational: empty string");
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt num = parse_decimal_int(s.substr(0, slash));
        BigInt den = parse_decimal_int(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
        return Rational(num, den);
    }
    const auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(parse_decimal_int(s));
    const std::string frac = s.substr(dot + 1);
    if (frac.empty()) return Rational(parse_decimal_int(s.substr(0, dot)));
    const std::string digits = s.substr(0, dot) + frac;
    BigInt den = pow(BigInt(10), static_cast<unsigned>(frac.size()));
    return Rational(parse_decimal_int(digits), den);
}

inline std::string rational_str(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

inline double to_double(const Rational& q) {
    if (q == 0) return 0.0;
    const double lg = log_rational(rat_abs(q));
    if (lg > 700.0) return q > 0 ? HUGE_VAL : -HUGE_VAL;
    if (lg < -745.0) return 0.0;
    return q.convert_to<double>();
}

}  // namespace opdyn
