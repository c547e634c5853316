#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace compmdp {

using Rational = boost::multiprecision::mpq_rational;

/// Parses "3/4", "0.25", "1", "2.5e-1" into an exact rational.
/// Decimal text is converted exactly (no binary rounding).
Rational parse_rational(std::string_view text);

/// "num/den" in lowest terms; integers print without the "/1".
std::string to_fraction_string(const Rational& q);

/// Nearest double not above q. For the nonnegative values used here this
/// is the round-toward-zero conversion.
double to_double_down(const Rational& q);

/// Nearest double not below q.
double to_double_up(const Rational& q);

/// Exact rational value of the binary64 representation.
Rational exact(double x);

std::vector<Rational> exact(const std::vector<double>& xs);
std::vector<double> down(const std::vector<Rational>& qs);

}  // namespace compmdp
