#pragma once

#include "prema/ast.hpp"

#include <string>

namespace prema {

// Minimal-parenthesis rendering; parse(format_expr(e)) == e structurally.
std::string format_expr(const ExprPtr& e);
std::string format_expr(const Expr& e);

std::string format_unit(const UnitExpr& unit);
std::string format_decl(const VarDecl& decl);

// Canonical text: declarations first, one TAB per indent level, single
// spaces around binary operators.
std::string format_ast(const TaskAst& ast);

} // namespace prema
