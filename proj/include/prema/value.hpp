#pragma once

#include "prema/ast.hpp"
#include "prema/rational.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace prema {

struct EnumValue {
    std::string literal;

    friend bool operator==(const EnumValue&, const EnumValue&) = default;
};

// Bool, bounded Int, exact Real, or an enum literal.
using Value = std::variant<bool, std::int64_t, Rational, EnumValue>;

using Valuation = std::map<std::string, Value>;

struct IntBounds {
    std::int64_t min = -32768;
    std::int64_t max = 32767;

    [[nodiscard]] bool contains(std::int64_t v) const { return v >= min && v <= max; }
    [[nodiscard]] std::uint64_t size() const { return static_cast<std::uint64_t>(max - min) + 1; }
};

inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool is_real(const Value& v) { return std::holds_alternative<Rational>(v); }
inline bool is_enum(const Value& v) { return std::holds_alternative<EnumValue>(v); }

// Int and Real promote to Rational; nullopt for Bool/Enum.
std::optional<Rational> as_rational(const Value& v);

// Equality with int->real promotion.
bool values_equal(const Value& a, const Value& b);

// "True", "42", "3/10", "Pay".
std::string value_to_string(const Value& v);

// Parses a literal of the given type ("True", "-3", "0.25", "3/10", "Pay").
std::optional<Value> parse_value(const std::string& text, const Type& type, const IntBounds& bounds);

Value default_value(const Type& type);

// Converts an Int to Real when the declared type is real.
Value coerce_to(const Value& v, const Type& type);

} // namespace prema
