#pragma once

#include "prema/ast.hpp"
#include "prema/value.hpp"

#include <stdexcept>
#include <string>

namespace prema {

// A runtime fault raised while evaluating an expression: E301 (zero divisor),
// E302 (int out of bounds), or E101 for operands of the wrong kind.
class EvalFault : public std::runtime_error {
public:
    EvalFault(Code code, SourcePos pos, const std::string& message)
        : std::runtime_error(message), code_(code), pos_(pos) {}

    [[nodiscard]] Code code() const { return code_; }
    [[nodiscard]] SourcePos pos() const { return pos_; }

private:
    Code code_;
    SourcePos pos_;
};

// Variable lookup for the evaluator. Returning nullptr makes the name an
// enum literal.
class Env {
public:
    virtual ~Env() = default;
    virtual const Value* lookup(const std::string& name, bool primed) const = 0;
};

class MapEnv final : public Env {
public:
    explicit MapEnv(const Valuation& values) : values_(values) {}

    const Value* lookup(const std::string& name, bool /*primed*/) const override {
        auto it = values_.find(name);
        return it == values_.end() ? nullptr : &it->second;
    }

private:
    const Valuation& values_;
};

// Short-circuit and/or, lazy ite, Python-style floor modulo, `/` always real.
Value evaluate(const Expr& e, const Env& env, const IntBounds& bounds);

bool evaluate_bool(const Expr& e, const Env& env, const IntBounds& bounds);

} // namespace prema
