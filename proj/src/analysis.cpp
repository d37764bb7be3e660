#include "prema/analysis.hpp"

#include "prema/format.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace prema {

namespace {

Diagnostic diag(Code code, const TaskAst* task, SourcePos pos, std::string message) {
    Diagnostic d;
    d.code = code;
    if (task != nullptr) {
        d.task_id = task->task_id;
        d.file = task->file;
    }
    d.pos = pos;
    d.message = std::move(message);
    return d;
}

ExprType of_kind(ExprType::Kind k) {
    ExprType t;
    t.kind = k;
    return t;
}

ExprType from_type(const Type& t) {
    switch (t.base) {
    case BaseType::Bool: return of_kind(ExprType::Kind::Bool);
    case BaseType::Int: return of_kind(ExprType::Kind::Int);
    case BaseType::Real: return of_kind(ExprType::Kind::Real);
    case BaseType::Enum: {
        ExprType r = of_kind(ExprType::Kind::Enum);
        r.literals = t.literals;
        return r;
    }
    }
    return {};
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

bool comparable(const ExprType& a, const ExprType& b) {
    using K = ExprType::Kind;
    if (a.is_numeric() && b.is_numeric()) {
        return true;
    }
    if (a.kind != b.kind) {
        return false;
    }
    if (a.kind != K::Enum) {
        return true;
    }
    if (!a.literal.empty() && !b.literal.empty()) {
        return true;
    }
    if (!a.literal.empty()) {
        return contains(b.literals, a.literal);
    }
    if (!b.literal.empty()) {
        return contains(a.literals, b.literal);
    }
    return a.literals == b.literals;
}

} // namespace

std::string type_text(const ExprType& t) {
    switch (t.kind) {
    case ExprType::Kind::Bool: return "bool";
    case ExprType::Kind::Int: return "int";
    case ExprType::Kind::Real: return "real";
    case ExprType::Kind::Enum: {
        if (!t.literal.empty()) {
            return "enum literal " + t.literal;
        }
        std::string s = "enum {";
        for (std::size_t i = 0; i < t.literals.size(); ++i) {
            s += (i > 0 ? ", " : "") + t.literals[i];
        }
        return s + "}";
    }
    case ExprType::Kind::Error: return "<error>";
    }
    return "<error>";
}

ExprType infer_type(const Expr& e, const DataDictionary& dict, Diagnostics* out, const TaskAst* task) {
    using K = ExprType::Kind;
    auto report = [&](const std::string& msg) {
        if (out != nullptr) {
            out->push_back(diag(Code::E101, task, e.pos, msg));
        }
    };
    switch (e.kind) {
    case ExprKind::BoolLit: return of_kind(K::Bool);
    case ExprKind::IntLit: return of_kind(K::Int);
    case ExprKind::RealLit: return of_kind(K::Real);
    case ExprKind::Name: {
        if (const DictEntry* entry = dict.find(e.name)) {
            return violates_state_rule(*entry) ? ExprType{} : from_type(entry->type);
        }
        if (dict.is_literal(e.name)) {
            ExprType t = of_kind(K::Enum);
            t.literal = e.name;
            return t;
        }
        return {};
    }
    case ExprKind::Unary: {
        ExprType a = infer_type(*e.lhs, dict, out, task);
        if (e.unary_op == UnaryOp::Not) {
            if (!a.is_error() && a.kind != K::Bool) {
                report("operand of 'not' must be bool, found " + type_text(a));
            }
            return of_kind(K::Bool);
        }
        if (a.is_error()) {
            return a;
        }
        if (!a.is_numeric()) {
            report("operand of unary '-' must be numeric, found " + type_text(a));
            return {};
        }
        return a;
    }
    case ExprKind::Ite: {
        ExprType c = infer_type(*e.lhs, dict, out, task);
        ExprType a = infer_type(*e.rhs, dict, out, task);
        ExprType b = infer_type(*e.alt, dict, out, task);
        if (!c.is_error() && c.kind != K::Bool) {
            report("condition must be bool, found " + type_text(c));
        }
        if (a.is_numeric() && b.is_numeric()) {
            return of_kind(a.kind == K::Int && b.kind == K::Int ? K::Int : K::Real);
        }
        return a;
    }
    case ExprKind::Binary:
        break;
    }
    ExprType a = infer_type(*e.lhs, dict, out, task);
    ExprType b = infer_type(*e.rhs, dict, out, task);
    std::string op(op_spelling(e.binary_op));
    bool any_error = a.is_error() || b.is_error();
    switch (e.binary_op) {
    case BinaryOp::And:
    case BinaryOp::Or:
        for (const ExprType* t : {&a, &b}) {
            if (!t->is_error() && t->kind != K::Bool) {
                report("operands of '" + op + "' must be bool, found " + type_text(*t));
                break;
            }
        }
        return of_kind(K::Bool);
    case BinaryOp::Eq:
    case BinaryOp::Ne:
        if (!any_error && !comparable(a, b)) {
            report("cannot compare " + type_text(a) + " with " + type_text(b));
        }
        return of_kind(K::Bool);
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
        if (!any_error && !(a.is_numeric() && b.is_numeric())) {
            report("operands of '" + op + "' must be numeric, found " + type_text(a) + " and " + type_text(b));
        }
        return of_kind(K::Bool);
    case BinaryOp::Mod:
        if (any_error) {
            return {};
        }
        if (a.kind != K::Int || b.kind != K::Int) {
            report("operands of '%' must be int, found " + type_text(a) + " and " + type_text(b));
            return {};
        }
        return of_kind(K::Int);
    default:
        if (any_error) {
            return {};
        }
        if (!(a.is_numeric() && b.is_numeric())) {
            report("operands of '" + op + "' must be numeric, found " + type_text(a) + " and " + type_text(b));
            return {};
        }
        if (e.binary_op == BinaryOp::Div) {
            return of_kind(K::Real);
        }
        return of_kind(a.kind == K::Int && b.kind == K::Int ? K::Int : K::Real);
    }
}

namespace {

bool assignable(const Type& target, const ExprType& value) {
    using K = ExprType::Kind;
    switch (target.base) {
    case BaseType::Bool: return value.kind == K::Bool;
    case BaseType::Int: return value.kind == K::Int;
    case BaseType::Real: return value.is_numeric();
    case BaseType::Enum:
        if (value.kind != K::Enum) {
            return false;
        }
        return value.literal.empty() ? value.literals == target.literals : contains(target.literals, value.literal);
    }
    return false;
}

void check_stmts(const std::vector<Stmt>& stmts, const TaskAst& task, const DataDictionary& dict, Diagnostics& out) {
    for (const auto& s : stmts) {
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            if (!a->value) {
                continue;
            }
            ExprType v = infer_type(*a->value, dict, &out, &task);
            const DictEntry* target = dict.find(a->target);
            if (target == nullptr || violates_state_rule(*target) || v.is_error()) {
                continue;
            }
            if (!assignable(target->type, v)) {
                out.push_back(diag(Code::E101, &task, s.pos,
                                   "cannot assign " + type_text(v) + " to '" + a->target + "' of type " +
                                       type_to_string(target->type)));
            }
            continue;
        }
        const auto& chain = std::get<IfChain>(s.node);
        for (const auto& arm : chain.arms) {
            if (arm.cond) {
                ExprType g = infer_type(*arm.cond, dict, &out, &task);
                if (!g.is_error() && g.kind != ExprType::Kind::Bool) {
                    out.push_back(diag(Code::E101, &task, arm.cond->pos, "guard must be bool, found " + type_text(g)));
                }
            }
            check_stmts(arm.body, task, dict, out);
        }
        if (chain.else_body) {
            check_stmts(*chain.else_body, task, dict, out);
        }
    }
}

} // namespace

Diagnostics type_check(const Model& model) {
    Diagnostics out;
    for (const auto& e : model.dictionary.entries) {
        if (violates_state_rule(e)) {
            const TaskAst* task = model.find_task(e.declaring_task);
            std::string why = is_state_name(e.name) ? "state variable" : "mode variable";
            out.push_back(diag(Code::E103, task, e.decl_pos,
                               why + " '" + e.name + "' must be declared enum, found " + type_to_string(e.type)));
        }
    }
    for (const auto& id : model.document_order) {
        const TaskAst* task = model.find_task(id);
        check_stmts(task->stmts, *task, model.dictionary, out);
    }
    return out;
}

// -- dimensions ---------------------------------------------------------------

Dimension Dimension::base(const std::string& unit, int exponent) {
    Dimension d;
    if (exponent != 0) {
        d.exps_[unit] = exponent;
    }
    return d;
}

int Dimension::exponent(const std::string& unit) const {
    auto it = exps_.find(unit);
    return it == exps_.end() ? 0 : it->second;
}

Dimension Dimension::operator*(const Dimension& o) const {
    Dimension r = *this;
    for (const auto& [u, e] : o.exps_) {
        int v = (r.exps_[u] += e);
        if (v == 0) {
            r.exps_.erase(u);
        }
    }
    return r;
}

Dimension Dimension::inverse() const {
    Dimension r;
    for (const auto& [u, e] : exps_) {
        r.exps_[u] = -e;
    }
    return r;
}

Dimension Dimension::operator/(const Dimension& o) const {
    return *this * o.inverse();
}

std::string format_dimension(const Dimension& d, const std::vector<std::string>& base_units) {
    if (d.dimensionless()) {
        return "[1]";
    }
    std::vector<std::string> order = base_units;
    for (const auto& [u, e] : d.exponents()) {
        if (!contains(order, u)) {
            order.push_back(u);
        }
    }
    std::vector<std::string> num;
    std::vector<std::string> den;
    for (const auto& u : order) {
        int e = d.exponent(u);
        if (e == 0) {
            continue;
        }
        int mag = e < 0 ? -e : e;
        std::string term = mag == 1 ? u : u + "^" + std::to_string(mag);
        (e > 0 ? num : den).push_back(term);
    }
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& t : v) {
            s += (s.empty() ? "" : "*") + t;
        }
        return s;
    };
    std::string text = num.empty() ? "1" : join(num);
    if (!den.empty()) {
        text += "/" + (den.size() > 1 ? "(" + join(den) + ")" : den.front());
    }
    return "[" + text + "]";
}

Dimension dimension_of(const UnitExpr& unit, const std::vector<std::string>& base_units,
                       std::vector<std::string>* unknown) {
    Dimension d;
    for (const auto& t : unit.terms) {
        if (!contains(base_units, t.name) && unknown != nullptr) {
            unknown->push_back(t.name);
        }
        d = d * Dimension::base(t.name, t.exponent);
    }
    return d;
}

namespace {

struct Dim {
    bool known = true;
    Dimension d;
};

class DimChecker {
public:
    DimChecker(const Model& model, const std::vector<std::string>& base_units) : model_(model), base_(base_units) {
        for (const auto& e : model.dictionary.entries) {
            std::vector<std::string> unknown;
            Dimension d = dimension_of(e.unit, base_units, &unknown);
            if (unknown.empty()) {
                dims_[e.name] = Dim{true, d};
                continue;
            }
            dims_[e.name] = Dim{false, {}};
            const TaskAst* task = model.find_task(e.declaring_task);
            std::string list;
            for (const auto& b : base_units) {
                list += (list.empty() ? "" : ", ") + b;
            }
            out_.push_back(diag(Code::E102, task, e.decl_pos,
                                "unknown unit '" + unknown.front() + "' on '" + e.name + "' (base units: " + list + ")"));
        }
    }

    Diagnostics run() {
        for (const auto& id : model_.document_order) {
            task_ = model_.find_task(id);
            stmts(task_->stmts);
        }
        return std::move(out_);
    }

private:
    void mismatch(SourcePos pos, const std::string& what, const Dimension& a, const Dimension& b) {
        out_.push_back(diag(Code::E102, task_, pos,
                            "dimension mismatch in " + what + ": " + format_dimension(a, base_) + " vs " +
                                format_dimension(b, base_)));
    }

    Dim of(const Expr& e) {
        switch (e.kind) {
        case ExprKind::BoolLit:
        case ExprKind::IntLit:
        case ExprKind::RealLit:
            return {};
        case ExprKind::Name: {
            auto it = dims_.find(e.name);
            return it == dims_.end() ? Dim{} : it->second;
        }
        case ExprKind::Unary: {
            Dim a = of(*e.lhs);
            return e.unary_op == UnaryOp::Not ? Dim{} : a;
        }
        case ExprKind::Ite: {
            of(*e.lhs);
            Dim a = of(*e.rhs);
            Dim b = of(*e.alt);
            return (a.known && b.known && a.d == b.d) ? a : Dim{false, {}};
        }
        case ExprKind::Binary:
            break;
        }
        Dim a = of(*e.lhs);
        Dim b = of(*e.rhs);
        std::string op = "'" + std::string(op_spelling(e.binary_op)) + "'";
        switch (e.binary_op) {
        case BinaryOp::And:
        case BinaryOp::Or:
            return {};
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
            if (a.known && b.known && !(a.d == b.d)) {
                mismatch(e.pos, op, a.d, b.d);
            }
            return {};
        case BinaryOp::Add:
        case BinaryOp::Sub:
            if (a.known && b.known && !(a.d == b.d)) {
                mismatch(e.pos, op, a.d, b.d);
                return Dim{false, {}};
            }
            return a.known ? a : b;
        case BinaryOp::Mul:
            return (a.known && b.known) ? Dim{true, a.d * b.d} : Dim{false, {}};
        case BinaryOp::Div:
            return (a.known && b.known) ? Dim{true, a.d / b.d} : Dim{false, {}};
        case BinaryOp::Mod:
            if ((a.known && !a.d.dimensionless()) || (b.known && !b.d.dimensionless())) {
                out_.push_back(diag(Code::E102, task_, e.pos,
                                    "'%' requires dimensionless operands: " + format_dimension(a.d, base_) + " vs " +
                                        format_dimension(b.d, base_)));
                return Dim{false, {}};
            }
            return {};
        }
        return {};
    }

    void stmts(const std::vector<Stmt>& list) {
        for (const auto& s : list) {
            if (const auto* a = std::get_if<Assign>(&s.node)) {
                if (!a->value) {
                    continue;
                }
                Dim v = of(*a->value);
                auto it = dims_.find(a->target);
                if (it != dims_.end() && it->second.known && v.known && !(it->second.d == v.d)) {
                    mismatch(s.pos, "assignment to '" + a->target + "'", it->second.d, v.d);
                }
                continue;
            }
            const auto& chain = std::get<IfChain>(s.node);
            for (const auto& arm : chain.arms) {
                if (arm.cond) {
                    of(*arm.cond);
                }
                stmts(arm.body);
            }
            if (chain.else_body) {
                stmts(*chain.else_body);
            }
        }
    }

    const Model& model_;
    std::vector<std::string> base_;
    std::map<std::string, Dim> dims_;
    Diagnostics out_;
    const TaskAst* task_ = nullptr;
};

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + "\"";
}

} // namespace

Diagnostics dimension_check(const Model& model, const std::vector<std::string>& base_units) {
    DimChecker checker(model, base_units);
    return checker.run();
}

// -- diagrams -----------------------------------------------------------------

std::string emit_state_diagram(const StateMachine& machine) {
    std::ostringstream out;
    out << "digraph " << dot_quote(machine.variable) << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=circle];\n";
    for (std::size_t i = 0; i < machine.states.size(); ++i) {
        out << "  " << dot_quote(machine.states[i]);
        if (i == 0) {
            out << " [shape=doublecircle]";
        }
        out << ";\n";
    }
    for (const auto& t : machine.transitions) {
        out << "  " << dot_quote(t.from) << " -> " << dot_quote(t.to) << " [label=" << dot_quote(format_expr(t.guard))
            << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string emit_dependency_diagram(const Slice& slice) {
    std::ostringstream out;
    out << "digraph " << dot_quote("deps:" + slice.key) << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    out << "  " << dot_quote(slice.key) << " [style=\"filled,bold\", fillcolor=lightyellow];\n";
    std::set<std::string> listed{slice.key};
    for (const auto* side : {&slice.uses_key, &slice.used_by_key}) {
        for (const auto& n : side->nodes) {
            if (listed.insert(n).second) {
                out << "  " << dot_quote(n) << ";\n";
            }
        }
    }
    auto direct_group = [&](const SliceSide& side, bool forward) {
        std::vector<std::string> direct;
        for (const auto& e : side.edges) {
            const std::string& here = forward ? e.from : e.to;
            const std::string& there = forward ? e.to : e.from;
            if (here == slice.key && there != slice.key && !contains(direct, there)) {
                direct.push_back(there);
            }
        }
        if (direct.empty()) {
            return;
        }
        out << "  { rank=same;";
        for (const auto& n : direct) {
            out << " " << dot_quote(n) << ";";
        }
        out << " }\n";
    };
    direct_group(slice.uses_key, false);
    direct_group(slice.used_by_key, true);
    std::set<std::tuple<std::string, std::string, EdgeKind>> emitted;
    for (const auto* side : {&slice.uses_key, &slice.used_by_key}) {
        for (const auto& e : side->edges) {
            if (!emitted.emplace(e.from, e.to, e.kind).second) {
                continue;
            }
            out << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to);
            if (e.kind == EdgeKind::Delay) {
                out << " [style=dashed]";
            }
            out << ";\n";
        }
    }
    out << "}\n";
    return out.str();
}

} // namespace prema
