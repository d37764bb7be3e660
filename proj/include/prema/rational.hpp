#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace prema {

// Exact reals. Simulation and constraint solving share this representation
// so that their results agree bit-for-bit.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Accepts "12", "-3", "2.5", "-0.125", "3/10".
std::optional<Rational> parse_rational(std::string_view text);

// "3/10", "-2", "5".
std::string rational_to_string(const Rational& r);

// Exact decimal spelling when the denominator divides a power of ten
// ("2.5", "-0.125", "3.0"); nullopt otherwise.
std::optional<std::string> rational_to_decimal(const Rational& r);

Rational floor_of(const Rational& r);
Rational ceil_of(const Rational& r);
bool is_integral(const Rational& r);

} // namespace prema
