#include "prema/rational.hpp"

#include <cctype>

namespace prema {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c)) == 0) {
            return false;
        }
    }
    return true;
}

std::optional<Rational> parse_decimal(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (!all_digits(whole) || (dot != std::string_view::npos && !all_digits(frac))) {
        return std::nullopt;
    }
    BigInt num(std::string(whole) + std::string(frac));
    BigInt den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) {
        den *= 10;
    }
    Rational r(num, den);
    return negative ? Rational(-r) : r;
}

} // namespace

std::optional<Rational> parse_rational(std::string_view text) {
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        return parse_decimal(text);
    }
    auto num = parse_decimal(text.substr(0, slash));
    auto den = parse_decimal(text.substr(slash + 1));
    if (!num || !den || *den == 0) {
        return std::nullopt;
    }
    return Rational(*num / *den);
}

std::string rational_to_string(const Rational& r) {
    if (denominator(r) == 1) {
        return numerator(r).str();
    }
    return numerator(r).str() + "/" + denominator(r).str();
}

std::optional<std::string> rational_to_decimal(const Rational& r) {
    BigInt den = denominator(r);
    int twos = 0;
    int fives = 0;
    while (den % 2 == 0) {
        den /= 2;
        ++twos;
    }
    while (den % 5 == 0) {
        den /= 5;
        ++fives;
    }
    if (den != 1) {
        return std::nullopt;
    }
    int digits = std::max(twos, fives);
    BigInt scale = 1;
    for (int i = 0; i < digits; ++i) {
        scale *= 10;
    }
    BigInt scaled = numerator(r) * (scale / denominator(r));
    bool negative = scaled < 0;
    if (negative) {
        scaled = -scaled;
    }
    std::string s = scaled.str();
    if (digits == 0) {
        s += ".0";
    } else {
        if (static_cast<int>(s.size()) <= digits) {
            s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
        }
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    }
    return negative ? "-" + s : s;
}

Rational floor_of(const Rational& r) {
    BigInt q = numerator(r) / denominator(r); // truncates toward zero
    if (r < 0 && Rational(q) != r) {
        q -= 1;
    }
    return Rational(q);
}

Rational ceil_of(const Rational& r) {
    BigInt q = numerator(r) / denominator(r);
    if (r > 0 && Rational(q) != r) {
        q += 1;
    }
    return Rational(q);
}

bool is_integral(const Rational& r) {
    return denominator(r) == 1;
}

} // namespace prema
