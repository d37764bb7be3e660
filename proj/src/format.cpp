#include "prema/format.hpp"

namespace prema {

namespace {

constexpr int kPrecOr = 1;
constexpr int kPrecAnd = 2;
constexpr int kPrecNot = 3;
constexpr int kPrecCmp = 4;
constexpr int kPrecAdd = 5;
constexpr int kPrecMul = 6;
constexpr int kPrecNeg = 7;
constexpr int kPrecAtom = 8;

int precedence(const Expr& e) {
    switch (e.kind) {
    case ExprKind::IntLit:
        return e.int_value < 0 ? kPrecNeg : kPrecAtom;
    case ExprKind::RealLit:
        return e.real_value < 0 ? kPrecNeg : kPrecAtom;
    case ExprKind::Unary:
        return e.unary_op == UnaryOp::Not ? kPrecNot : kPrecNeg;
    case ExprKind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Or: return kPrecOr;
        case BinaryOp::And: return kPrecAnd;
        case BinaryOp::Add:
        case BinaryOp::Sub: return kPrecAdd;
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Mod: return kPrecMul;
        default: return kPrecCmp;
        }
    default:
        return kPrecAtom;
    }
}

std::string real_literal(const Rational& r) {
    if (auto dec = rational_to_decimal(r)) {
        return *dec;
    }
    // Not a finite decimal: spell as a quotient of real literals.
    auto num = rational_to_decimal(Rational(numerator(r)));
    auto den = rational_to_decimal(Rational(denominator(r)));
    return "(" + *num + " / " + *den + ")";
}

void render(const Expr& e, int min_prec, std::string& out);

void render_child(const ExprPtr& e, int min_prec, std::string& out) {
    render(*e, min_prec, out);
}

void render(const Expr& e, int min_prec, std::string& out) {
    int prec = precedence(e);
    bool parens = prec < min_prec;
    if (parens) {
        out += '(';
    }
    switch (e.kind) {
    case ExprKind::BoolLit:
        out += e.bool_value ? "True" : "False";
        break;
    case ExprKind::IntLit:
        out += std::to_string(e.int_value);
        break;
    case ExprKind::RealLit:
        out += real_literal(e.real_value);
        break;
    case ExprKind::Name:
        out += e.name;
        if (e.primed) {
            out += '\'';
        }
        break;
    case ExprKind::Unary:
        if (e.unary_op == UnaryOp::Not) {
            out += "not ";
            render_child(e.lhs, kPrecNot, out);
        } else {
            out += '-';
            // Only bare names avoid parentheses: "-3" would fold into a literal.
            if (e.lhs->kind == ExprKind::Name) {
                render_child(e.lhs, kPrecAtom, out);
            } else {
                out += '(';
                render_child(e.lhs, 0, out);
                out += ')';
            }
        }
        break;
    case ExprKind::Binary: {
        bool cmp = prec == kPrecCmp;
        render_child(e.lhs, cmp ? prec + 1 : prec, out);
        out += ' ';
        out += op_spelling(e.binary_op);
        out += ' ';
        render_child(e.rhs, prec + 1, out);
        break;
    }
    case ExprKind::Ite:
        out += "ite(";
        render_child(e.lhs, 0, out);
        out += ", ";
        render_child(e.rhs, 0, out);
        out += ", ";
        render_child(e.alt, 0, out);
        out += ')';
        break;
    }
    if (parens) {
        out += ')';
    }
}

void render_stmts(const std::vector<Stmt>& stmts, int depth, std::string& out) {
    std::string indent(static_cast<std::size_t>(depth), '\t');
    for (const auto& s : stmts) {
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            out += indent + a->target + " = " + format_expr(a->value) + "\n";
            continue;
        }
        const auto& chain = std::get<IfChain>(s.node);
        for (std::size_t i = 0; i < chain.arms.size(); ++i) {
            out += indent + (i == 0 ? "if " : "elif ") + format_expr(chain.arms[i].cond) + ":\n";
            render_stmts(chain.arms[i].body, depth + 1, out);
        }
        if (chain.else_body) {
            out += indent + "else:\n";
            render_stmts(*chain.else_body, depth + 1, out);
        }
    }
}

} // namespace

std::string format_expr(const ExprPtr& e) {
    return e ? format_expr(*e) : std::string();
}

std::string format_expr(const Expr& e) {
    std::string out;
    render(e, 0, out);
    return out;
}

std::string format_unit(const UnitExpr& unit) {
    std::string out = "[";
    for (std::size_t i = 0; i < unit.terms.size(); ++i) {
        const auto& t = unit.terms[i];
        int shown = t.exponent;
        if (i > 0) {
            out += t.exponent < 0 ? '/' : '*';
            if (t.exponent < 0) {
                shown = -t.exponent;
            }
        }
        out += t.name;
        if (shown != 1) {
            out += '^' + std::to_string(shown);
        }
    }
    return out + "]";
}

std::string format_decl(const VarDecl& decl) {
    std::string out = "var " + decl.name + " : " + type_to_string(decl.type);
    if (!decl.unit.terms.empty()) {
        out += ' ' + format_unit(decl.unit);
    }
    if (decl.role != Role::Internal) {
        out += ' ';
        out += role_name(decl.role);
    }
    if (decl.mode_flag) {
        out += " mode";
    }
    return out;
}

std::string format_ast(const TaskAst& ast) {
    std::string out;
    for (const auto& d : ast.decls) {
        out += format_decl(d) + "\n";
    }
    render_stmts(ast.stmts, 0, out);
    return out;
}

} // namespace prema
