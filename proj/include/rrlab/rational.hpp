#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "rrlab/errors.hpp"

namespace rrlab {

// Arbitrary-precision rational, always kept in lowest terms with a positive
// denominator. GMP canonicalizes the results of arithmetic; the helpers below
// canonicalize anything built from raw parts.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(const Integer& num, const Integer& den) {
    if (den == 0) throw InvalidInput("zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational make_rational(long num, long den = 1) {
    return make_rational(Integer(num), Integer(den));
}

inline Rational pow2(long e) {
    Rational q(1);
    if (e >= 0) {
        mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return q;
}

inline Rational abs_value(const Rational& q) { return q < 0 ? Rational(-q) : q; }
inline const Rational& min_of(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max_of(const Rational& a, const Rational& b) { return a < b ? b : a; }

// "p/q" with q always present, e.g. "1/1", "-3/8".
std::string to_string(const Rational& q);

// 12 significant digits, for human-readable CSV columns.
std::string to_decimal(const Rational& q);

// Accepts "p/q", "p", and plain integers with optional sign.
Rational parse_rational(std::string_view text);

}  // namespace rrlab
