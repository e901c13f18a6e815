#ifndef REGDIM_RATIONAL_HPP
#define REGDIM_RATIONAL_HPP

#include <gmpxx.h>

#include <string>

namespace regdim {

// Exact rational arithmetic for probability/ratio inputs given as fractions.
using Rational = mpq_class;

// Accepts "a/b", "a" (integers, arbitrary precision). Throws std::invalid_argument.
Rational parse_rational(const std::string& text);

// Exact value of a finite double (every double is a binary rational).
Rational rational_from_double(double v);

double to_double(const Rational& r);

std::string rational_str(const Rational& r);

}  // namespace regdim

#endif
