#include "prema/eval.hpp"

namespace prema {

namespace {

[[noreturn]] void kind_error(const Expr& e, const std::string& what) {
    throw EvalFault(Code::E101, e.pos, "operand kind mismatch: " + what);
}

std::int64_t checked(__int128 v, const Expr& e, const IntBounds& bounds) {
    if (v < bounds.min || v > bounds.max) {
        throw EvalFault(Code::E302, e.pos,
                        "integer overflow: result outside [" + std::to_string(bounds.min) + ", " +
                            std::to_string(bounds.max) + "]");
    }
    return static_cast<std::int64_t>(v);
}

bool compare(BinaryOp op, const Value& l, const Value& r, const Expr& e) {
    if (op == BinaryOp::Eq || op == BinaryOp::Ne) {
        bool same_kind = (is_bool(l) && is_bool(r)) || (is_enum(l) && is_enum(r)) ||
                         (as_rational(l) && as_rational(r));
        if (!same_kind) {
            kind_error(e, "cannot compare " + value_to_string(l) + " with " + value_to_string(r));
        }
        bool eq = values_equal(l, r);
        return op == BinaryOp::Eq ? eq : !eq;
    }
    if (is_int(l) && is_int(r)) {
        auto a = std::get<std::int64_t>(l);
        auto b = std::get<std::int64_t>(r);
        switch (op) {
        case BinaryOp::Lt: return a < b;
        case BinaryOp::Le: return a <= b;
        case BinaryOp::Gt: return a > b;
        default: return a >= b;
        }
    }
    auto a = as_rational(l);
    auto b = as_rational(r);
    if (!a || !b) {
        kind_error(e, "ordering requires numeric operands");
    }
    switch (op) {
    case BinaryOp::Lt: return *a < *b;
    case BinaryOp::Le: return *a <= *b;
    case BinaryOp::Gt: return *a > *b;
    default: return *a >= *b;
    }
}

Value arithmetic(BinaryOp op, const Value& l, const Value& r, const Expr& e, const IntBounds& bounds) {
    if (op == BinaryOp::Mod) {
        if (!is_int(l) || !is_int(r)) {
            kind_error(e, "'%' requires int operands");
        }
        auto a = std::get<std::int64_t>(l);
        auto b = std::get<std::int64_t>(r);
        if (b == 0) {
            throw EvalFault(Code::E301, e.pos, "modulo by zero");
        }
        std::int64_t m = a % b;
        if (m != 0 && ((m < 0) != (b < 0))) {
            m += b;
        }
        return checked(m, e, bounds);
    }
    if (op == BinaryOp::Div) {
        auto a = as_rational(l);
        auto b = as_rational(r);
        if (!a || !b) {
            kind_error(e, "'/' requires numeric operands");
        }
        if (*b == 0) {
            throw EvalFault(Code::E301, e.pos, "division by zero");
        }
        return Rational(*a / *b);
    }
    if (is_int(l) && is_int(r)) {
        __int128 a = std::get<std::int64_t>(l);
        __int128 b = std::get<std::int64_t>(r);
        switch (op) {
        case BinaryOp::Add: return checked(a + b, e, bounds);
        case BinaryOp::Sub: return checked(a - b, e, bounds);
        default: return checked(a * b, e, bounds);
        }
    }
    auto a = as_rational(l);
    auto b = as_rational(r);
    if (!a || !b) {
        kind_error(e, "arithmetic requires numeric operands");
    }
    switch (op) {
    case BinaryOp::Add: return Rational(*a + *b);
    case BinaryOp::Sub: return Rational(*a - *b);
    default: return Rational(*a * *b);
    }
}

bool truth(const Value& v, const Expr& e) {
    const auto* b = std::get_if<bool>(&v);
    if (b == nullptr) {
        kind_error(e, "expected a boolean, got " + value_to_string(v));
    }
    return *b;
}

} // namespace

Value evaluate(const Expr& e, const Env& env, const IntBounds& bounds) {
    switch (e.kind) {
    case ExprKind::BoolLit:
        return e.bool_value;
    case ExprKind::IntLit:
        return checked(e.int_value, e, bounds);
    case ExprKind::RealLit:
        return e.real_value;
    case ExprKind::Name: {
        if (const Value* v = env.lookup(e.name, e.primed)) {
            return *v;
        }
        return EnumValue{e.name};
    }
    case ExprKind::Unary: {
        Value v = evaluate(*e.lhs, env, bounds);
        if (e.unary_op == UnaryOp::Not) {
            return !truth(v, e);
        }
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
            return checked(-static_cast<__int128>(*i), e, bounds);
        }
        if (const auto* r = std::get_if<Rational>(&v)) {
            return Rational(-*r);
        }
        kind_error(e, "unary minus requires a numeric operand");
    }
    case ExprKind::Binary: {
        if (e.binary_op == BinaryOp::And) {
            return truth(evaluate(*e.lhs, env, bounds), e) && truth(evaluate(*e.rhs, env, bounds), e);
        }
        if (e.binary_op == BinaryOp::Or) {
            return truth(evaluate(*e.lhs, env, bounds), e) || truth(evaluate(*e.rhs, env, bounds), e);
        }
        Value l = evaluate(*e.lhs, env, bounds);
        Value r = evaluate(*e.rhs, env, bounds);
        if (is_comparison(e.binary_op)) {
            return compare(e.binary_op, l, r, e);
        }
        return arithmetic(e.binary_op, l, r, e, bounds);
    }
    case ExprKind::Ite:
        return truth(evaluate(*e.lhs, env, bounds), e) ? evaluate(*e.rhs, env, bounds)
                                                        : evaluate(*e.alt, env, bounds);
    }
    kind_error(e, "unknown expression");
}

bool evaluate_bool(const Expr& e, const Env& env, const IntBounds& bounds) {
    return truth(evaluate(e, env, bounds), e);
}

} // namespace prema
