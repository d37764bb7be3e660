#include "prema/ast.hpp"

namespace prema {

int Type::literal_index(const std::string& lit) const {
    for (std::size_t i = 0; i < literals.size(); ++i) {
        if (literals[i] == lit) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::string type_to_string(const Type& t) {
    switch (t.base) {
    case BaseType::Bool:
        return "bool";
    case BaseType::Int:
        return "int";
    case BaseType::Real:
        return "real";
    case BaseType::Enum: {
        std::string s = "enum {";
        for (std::size_t i = 0; i < t.literals.size(); ++i) {
            s += (i == 0 ? "" : ", ") + t.literals[i];
        }
        return s + "}";
    }
    }
    return "?";
}

std::string_view op_spelling(UnaryOp op) {
    return op == UnaryOp::Not ? "not" : "-";
}

std::string_view op_spelling(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return "or";
    case BinaryOp::And: return "and";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    }
    return "?";
}

bool is_comparison(BinaryOp op) {
    return op >= BinaryOp::Eq && op <= BinaryOp::Ge;
}

bool is_arithmetic(BinaryOp op) {
    return op >= BinaryOp::Add;
}

BinaryOp negate_comparison(BinaryOp op) {
    switch (op) {
    case BinaryOp::Eq: return BinaryOp::Ne;
    case BinaryOp::Ne: return BinaryOp::Eq;
    case BinaryOp::Lt: return BinaryOp::Ge;
    case BinaryOp::Le: return BinaryOp::Gt;
    case BinaryOp::Gt: return BinaryOp::Le;
    case BinaryOp::Ge: return BinaryOp::Lt;
    default: return op;
    }
}

BinaryOp swap_comparison(BinaryOp op) {
    switch (op) {
    case BinaryOp::Lt: return BinaryOp::Gt;
    case BinaryOp::Le: return BinaryOp::Ge;
    case BinaryOp::Gt: return BinaryOp::Lt;
    case BinaryOp::Ge: return BinaryOp::Le;
    default: return op;
    }
}

ExprPtr make_bool(bool v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BoolLit;
    e->bool_value = v;
    e->pos = pos;
    return e;
}

ExprPtr make_int(std::int64_t v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::IntLit;
    e->int_value = v;
    e->pos = pos;
    return e;
}

ExprPtr make_real(Rational v, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::RealLit;
    e->real_value = std::move(v);
    e->pos = pos;
    return e;
}

ExprPtr make_name(std::string name, SourcePos pos, bool primed) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Name;
    e->name = std::move(name);
    e->primed = primed;
    e->pos = pos;
    return e;
}

ExprPtr make_unary(UnaryOp op, ExprPtr operand, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->unary_op = op;
    e->lhs = std::move(operand);
    e->pos = pos;
    return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->binary_op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->pos = pos;
    return e;
}

ExprPtr make_ite(ExprPtr cond, ExprPtr then_e, ExprPtr else_e, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ite;
    e->lhs = std::move(cond);
    e->rhs = std::move(then_e);
    e->alt = std::move(else_e);
    e->pos = pos;
    return e;
}

ExprPtr make_not(ExprPtr e) {
    return make_unary(UnaryOp::Not, std::move(e));
}

ExprPtr make_and(const std::vector<ExprPtr>& conjuncts) {
    if (conjuncts.empty()) {
        return make_bool(true);
    }
    ExprPtr acc = conjuncts.front();
    for (std::size_t i = 1; i < conjuncts.size(); ++i) {
        acc = make_binary(BinaryOp::And, acc, conjuncts[i]);
    }
    return acc;
}

ExprPtr make_or(const std::vector<ExprPtr>& disjuncts) {
    if (disjuncts.empty()) {
        return make_bool(false);
    }
    ExprPtr acc = disjuncts.front();
    for (std::size_t i = 1; i < disjuncts.size(); ++i) {
        acc = make_binary(BinaryOp::Or, acc, disjuncts[i]);
    }
    return acc;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) {
        return !a && !b;
    }
    return expr_equal(*a, *b);
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) {
        return false;
    }
    switch (a.kind) {
    case ExprKind::BoolLit:
        return a.bool_value == b.bool_value;
    case ExprKind::IntLit:
        return a.int_value == b.int_value;
    case ExprKind::RealLit:
        return a.real_value == b.real_value;
    case ExprKind::Name:
        return a.name == b.name && a.primed == b.primed;
    case ExprKind::Unary:
        return a.unary_op == b.unary_op && expr_equal(a.lhs, b.lhs);
    case ExprKind::Binary:
        return a.binary_op == b.binary_op && expr_equal(a.lhs, b.lhs) && expr_equal(a.rhs, b.rhs);
    case ExprKind::Ite:
        return expr_equal(a.lhs, b.lhs) && expr_equal(a.rhs, b.rhs) && expr_equal(a.alt, b.alt);
    }
    return false;
}

void collect_names(const ExprPtr& e, std::vector<const Expr*>& out) {
    if (!e) {
        return;
    }
    if (e->kind == ExprKind::Name) {
        out.push_back(e.get());
        return;
    }
    collect_names(e->lhs, out);
    collect_names(e->rhs, out);
    collect_names(e->alt, out);
}

std::string_view role_name(Role r) {
    switch (r) {
    case Role::Input: return "input";
    case Role::Output: return "output";
    case Role::Internal: return "internal";
    }
    return "internal";
}

namespace {

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b);

bool stmt_equal(const Stmt& a, const Stmt& b) {
    if (a.node.index() != b.node.index()) {
        return false;
    }
    if (const auto* as = std::get_if<Assign>(&a.node)) {
        const auto& bs = std::get<Assign>(b.node);
        return as->target == bs.target && expr_equal(as->value, bs.value);
    }
    const auto& ac = std::get<IfChain>(a.node);
    const auto& bc = std::get<IfChain>(b.node);
    if (ac.arms.size() != bc.arms.size() || ac.else_body.has_value() != bc.else_body.has_value()) {
        return false;
    }
    for (std::size_t i = 0; i < ac.arms.size(); ++i) {
        if (!expr_equal(ac.arms[i].cond, bc.arms[i].cond) || !stmts_equal(ac.arms[i].body, bc.arms[i].body)) {
            return false;
        }
    }
    return !ac.else_body || stmts_equal(*ac.else_body, *bc.else_body);
}

bool stmts_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!stmt_equal(a[i], b[i])) {
            return false;
        }
    }
    return true;
}

} // namespace

bool task_equal(const TaskAst& a, const TaskAst& b) {
    if (a.decls.size() != b.decls.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.decls.size(); ++i) {
        const auto& x = a.decls[i];
        const auto& y = b.decls[i];
        if (x.name != y.name || !(x.type == y.type) || !(x.unit == y.unit) || x.role != y.role ||
            x.mode_flag != y.mode_flag) {
            return false;
        }
    }
    return stmts_equal(a.stmts, b.stmts);
}

} // namespace prema
