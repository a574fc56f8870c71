#pragma once

#include <gmpxx.h>
#include <string>
#include <string_view>

namespace qhk {

using Rational = mpq_class;

// Accepts "p/q", "p", "-p/q" and finite decimals like "0.25" (converted exactly).
// Throws Error(InvalidInput) on anything else.
Rational parse_rational(std::string_view text);

// Canonical "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

inline int sign(const Rational& q) { return sgn(q); }

}  // namespace qhk
