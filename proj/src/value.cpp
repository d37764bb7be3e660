#include "prema/value.hpp"

#include <charconv>

namespace prema {

std::optional<Rational> as_rational(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return Rational(*i);
    }
    if (const auto* r = std::get_if<Rational>(&v)) {
        return *r;
    }
    return std::nullopt;
}

bool values_equal(const Value& a, const Value& b) {
    if (a.index() == b.index()) {
        return a == b;
    }
    auto ra = as_rational(a);
    auto rb = as_rational(b);
    return ra && rb && *ra == *rb;
}

std::string value_to_string(const Value& v) {
    struct Visitor {
        std::string operator()(bool b) const { return b ? "True" : "False"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(const Rational& r) const { return rational_to_string(r); }
        std::string operator()(const EnumValue& e) const { return e.literal; }
    };
    return std::visit(Visitor{}, v);
}

std::optional<Value> parse_value(const std::string& text, const Type& type, const IntBounds& bounds) {
    switch (type.base) {
    case BaseType::Bool:
        if (text == "True") {
            return Value{true};
        }
        if (text == "False") {
            return Value{false};
        }
        return std::nullopt;
    case BaseType::Int: {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size() || !bounds.contains(v)) {
            return std::nullopt;
        }
        return Value{v};
    }
    case BaseType::Real: {
        auto r = parse_rational(text);
        if (!r) {
            return std::nullopt;
        }
        return Value{*r};
    }
    case BaseType::Enum:
        if (type.literal_index(text) < 0) {
            return std::nullopt;
        }
        return Value{EnumValue{text}};
    }
    return std::nullopt;
}

Value default_value(const Type& type) {
    switch (type.base) {
    case BaseType::Bool:
        return false;
    case BaseType::Int:
        return std::int64_t{0};
    case BaseType::Real:
        return Rational(0);
    case BaseType::Enum:
        return EnumValue{type.literals.empty() ? std::string() : type.literals.front()};
    }
    return false;
}

Value coerce_to(const Value& v, const Type& type) {
    if (type.base == BaseType::Real) {
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
            return Rational(*i);
        }
    }
    return v;
}

} // namespace prema
