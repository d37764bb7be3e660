#pragma once

#include "prema/diagnostic.hpp"
#include "prema/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace prema {

enum class BaseType : std::uint8_t { Bool, Int, Real, Enum };

struct Type {
    BaseType base = BaseType::Bool;
    std::vector<std::string> literals; // enum only, declaration order

    static Type boolean() { return Type{BaseType::Bool, {}}; }
    static Type integer() { return Type{BaseType::Int, {}}; }
    static Type real() { return Type{BaseType::Real, {}}; }
    static Type enumeration(std::vector<std::string> lits) { return Type{BaseType::Enum, std::move(lits)}; }

    [[nodiscard]] bool is_numeric() const { return base == BaseType::Int || base == BaseType::Real; }
    [[nodiscard]] int literal_index(const std::string& lit) const;

    friend bool operator==(const Type&, const Type&) = default;
};

std::string type_to_string(const Type& t);

enum class ExprKind : std::uint8_t { BoolLit, IntLit, RealLit, Name, Unary, Binary, Ite };
enum class UnaryOp : std::uint8_t { Not, Neg };
enum class BinaryOp : std::uint8_t { Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Mod };

std::string_view op_spelling(UnaryOp op);
std::string_view op_spelling(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);
BinaryOp negate_comparison(BinaryOp op);
BinaryOp swap_comparison(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. Names resolve to variables when declared and to
// enum literals otherwise; `primed` marks post-state references in properties.
struct Expr {
    ExprKind kind = ExprKind::BoolLit;
    bool bool_value = false;
    std::int64_t int_value = 0;
    Rational real_value;
    std::string name;
    bool primed = false;
    UnaryOp unary_op = UnaryOp::Not;
    BinaryOp binary_op = BinaryOp::And;
    ExprPtr lhs; // also: unary operand, ite condition
    ExprPtr rhs; // also: ite then-branch
    ExprPtr alt; // ite else-branch
    SourcePos pos;
};

ExprPtr make_bool(bool v, SourcePos pos = {});
ExprPtr make_int(std::int64_t v, SourcePos pos = {});
ExprPtr make_real(Rational v, SourcePos pos = {});
ExprPtr make_name(std::string name, SourcePos pos = {}, bool primed = false);
ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourcePos pos = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos = {});
ExprPtr make_ite(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourcePos pos = {});
ExprPtr make_not(ExprPtr e);
// Left-nested conjunction; True for an empty list.
ExprPtr make_and(const std::vector<ExprPtr>& conjuncts);
ExprPtr make_or(const std::vector<ExprPtr>& disjuncts);

bool expr_equal(const Expr& a, const Expr& b);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Every Name node, left to right (duplicates kept).
void collect_names(const ExprPtr& e, std::vector<const Expr*>& out);

struct UnitTerm {
    std::string name;
    int exponent = 1;

    friend bool operator==(const UnitTerm&, const UnitTerm&) = default;
};

struct UnitExpr {
    std::vector<UnitTerm> terms; // empty = dimensionless

    friend bool operator==(const UnitExpr&, const UnitExpr&) = default;
};

enum class Role : std::uint8_t { Input, Output, Internal };
std::string_view role_name(Role r);

struct VarDecl {
    std::string name;
    Type type;
    UnitExpr unit;
    Role role = Role::Internal;
    bool mode_flag = false;
    SourcePos pos;
};

struct Stmt;

struct Assign {
    std::string target;
    ExprPtr value;
};

struct IfArm {
    ExprPtr cond;
    std::vector<Stmt> body;
    SourcePos pos;
};

struct IfChain {
    std::vector<IfArm> arms; // if + elifs, never empty
    std::optional<std::vector<Stmt>> else_body;
    SourcePos else_pos;
};

struct Stmt {
    std::variant<Assign, IfChain> node;
    SourcePos pos;
};

struct TaskAst {
    std::string task_id;
    std::string file;
    std::vector<VarDecl> decls;
    std::vector<Stmt> stmts;
};

bool task_equal(const TaskAst& a, const TaskAst& b);

} // namespace prema
