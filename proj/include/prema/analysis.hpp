#pragma once

#include "prema/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prema {

// -- types --------------------------------------------------------------------

// Static type of an expression. A bare enum literal has kind Enum with
// `literal` set and no owning type yet.
struct ExprType {
    enum class Kind : std::uint8_t { Bool, Int, Real, Enum, Error } kind = Kind::Error;
    std::vector<std::string> literals; // enum variables: their literal set
    std::string literal;               // bare literal

    [[nodiscard]] bool is_numeric() const { return kind == Kind::Int || kind == Kind::Real; }
    [[nodiscard]] bool is_error() const { return kind == Kind::Error; }
};

std::string type_text(const ExprType& t);

// Infers the type of `e`, appending E101 diagnostics for violations.
ExprType infer_type(const Expr& e, const DataDictionary& dict, Diagnostics* out, const TaskAst* task);

Diagnostics type_check(const Model& model);

// -- dimensions ---------------------------------------------------------------

class Dimension {
public:
    Dimension() = default;

    static Dimension base(const std::string& unit, int exponent = 1);

    [[nodiscard]] bool dimensionless() const { return exps_.empty(); }
    [[nodiscard]] int exponent(const std::string& unit) const;
    [[nodiscard]] const std::map<std::string, int>& exponents() const { return exps_; }

    Dimension operator*(const Dimension& o) const;
    Dimension operator/(const Dimension& o) const;
    Dimension inverse() const;

    friend bool operator==(const Dimension&, const Dimension&) = default;

private:
    std::map<std::string, int> exps_; // zero exponents never stored
};

// Brackets notation in base-unit order: "[m/s]", "[m^2]", "[1/s]", "[1]".
std::string format_dimension(const Dimension& d, const std::vector<std::string>& base_units);

// Unknown unit names are returned in `unknown`.
Dimension dimension_of(const UnitExpr& unit, const std::vector<std::string>& base_units,
                       std::vector<std::string>* unknown = nullptr);

Diagnostics dimension_check(const Model& model, const std::vector<std::string>& base_units);

// -- diagrams -----------------------------------------------------------------

std::string emit_state_diagram(const StateMachine& machine);

std::string emit_dependency_diagram(const Slice& slice);

} // namespace prema
