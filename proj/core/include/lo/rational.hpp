#pragma once
// Exact rational scalars and vectors in Q^d.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lo {

using Rational = mpq_class;
using Integer = mpz_class;

/// A vector in Q^d. Ordered lexicographically, which is what the
/// aggregation maps rely on.
using QVec = std::vector<Rational>;

/// Parses "p/q", "p", or a finite decimal such as "-0.05" exactly.
/// Throws lo::InvalidParameter on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form; the denominator is always written, even when 1.
std::string to_string(const Rational& value);

Rational make_rational(std::int64_t num, std::int64_t den = 1);

inline QVec zero_vec(std::size_t dim) { return QVec(dim, Rational(0)); }

QVec add(const QVec& a, const QVec& b);
QVec sub(const QVec& a, const QVec& b);
QVec scale(const QVec& a, const Rational& s);
void add_scaled(QVec& acc, const QVec& v, const Rational& s);
Rational dot(const QVec& a, const QVec& b);
Rational norm2(const QVec& a);
Rational dist2(const QVec& a, const QVec& b);
bool is_zero(const QVec& a);

/// Largest integer not exceeding x.
Integer floor_of(const Rational& x);
/// Nearest integer, halves rounded toward negative infinity.
Integer round_half_down(const Rational& x);

/// Exact integer power of a rational (exponent >= 0).
Rational pow(const Rational& base, unsigned exponent);

/// Converts an exactly integral rational to int64; throws if it is not.
std::int64_t to_int64(const Rational& x);
std::int64_t to_int64(const Integer& x);

}  // namespace lo
