#include "prema/solver.hpp"

#include "prema/diagnostic.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace prema {

namespace {

bool reserved(const std::string& name) {
    static const std::set<std::string> words{"and", "or", "not", "ite", "true", "false", "let", "mod", "div",
                                             "abs", "to_real", "to_int", "distinct", "Int", "Real", "Bool",
                                             "assert", "forall", "exists", "par", "as", "xor"};
    return words.count(name) > 0;
}

// Bare symbol when the name is a plain identifier, |quoted| otherwise.
std::string quote(const std::string& name) {
    bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
    for (char ch : name) {
        simple = simple && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_');
    }
    if (simple && !reserved(name)) {
        return name;
    }
    return "|" + name + "|";
}

std::string int_literal(const BigInt& v) {
    if (v < 0) {
        return "(- " + BigInt(-v).str() + ")";
    }
    return v.str();
}

std::string real_literal(const Rational& r) {
    BigInt n = numerator(r);
    BigInt d = denominator(r);
    std::string num = BigInt(n < 0 ? BigInt(-n) : n).str() + ".0";
    std::string body = d == 1 ? num : "(/ " + num + " " + d.str() + ".0)";
    return n < 0 ? "(- " + body + ")" : body;
}

std::string and_of(const std::vector<std::string>& parts) {
    std::vector<std::string> kept;
    for (const auto& p : parts) {
        if (p == "false") {
            return "false";
        }
        if (p != "true") {
            kept.push_back(p);
        }
    }
    if (kept.empty()) {
        return "true";
    }
    if (kept.size() == 1) {
        return kept.front();
    }
    std::string out = "(and";
    for (const auto& k : kept) {
        out += " " + k;
    }
    return out + ")";
}

std::string implies(const std::string& a, const std::string& b) {
    if (b == "true" || a == "false") {
        return "true";
    }
    if (a == "true") {
        return b;
    }
    return "(=> " + a + " " + b + ")";
}

struct Term {
    std::string text;
    BaseType type = BaseType::Bool;
    std::string ok = "true"; // evaluation succeeds without a runtime fault
};

class Exporter {
public:
    Exporter(const Constraint& c, bool eager) : c_(c), eager_(eager) {
        for (const auto& v : c.vars) {
            vars_.emplace(v.name, &v);
            for (const auto& lit : v.type.literals) {
                literal(lit);
            }
        }
        for (std::size_t i = 0; i < c.definitions.size(); ++i) {
            defs_.emplace(c.definitions[i].name, i);
            for (const auto& lit : c.definitions[i].type.literals) {
                literal(lit);
            }
        }
    }

    std::string run() {
        for (std::size_t i = 0; i < c_.definitions.size(); ++i) {
            emit_definition(i);
        }
        std::vector<std::string> asserts;
        for (const auto& e : c_.conjuncts) {
            Term t = gen(*e);
            if (t.type != BaseType::Bool) {
                throw PremaError(Code::E003, "constraint conjunct is not boolean");
            }
            asserts.push_back(and_of({t.ok, t.text}));
        }
        if (eager_) {
            for (const auto& d : c_.definitions) {
                asserts.push_back(quote("ok!" + d.name));
            }
        }

        std::ostringstream out;
        out << "; prema constraint export\n";
        out << "(set-logic ALL)\n";
        if (!literals_.empty()) {
            out << "; enum literal encoding:";
            for (std::size_t i = 0; i < literals_.size(); ++i) {
                out << " " << literals_[i] << "=" << i;
            }
            out << "\n";
        }
        for (const auto& v : c_.vars) {
            out << "(declare-const " << quote(v.name) << " " << sort(v.type.base) << ")\n";
            switch (v.type.base) {
            case BaseType::Int:
                out << "(assert (and (<= " << int_literal(c_.int_bounds.min) << " " << quote(v.name) << ") (<= "
                    << quote(v.name) << " " << int_literal(c_.int_bounds.max) << ")))\n";
                break;
            case BaseType::Enum: {
                std::vector<std::string> codes;
                bool contiguous = true;
                for (const auto& lit : v.type.literals) {
                    codes.push_back(literal(lit));
                    contiguous = contiguous && std::stol(codes.back()) == std::stol(codes.front()) +
                                                                             static_cast<long>(codes.size()) - 1;
                }
                if (contiguous) {
                    out << "(assert (and (<= " << codes.front() << " " << quote(v.name) << ") (<= " << quote(v.name)
                        << " " << codes.back() << ")))\n";
                } else {
                    out << "(assert (or";
                    for (const auto& code : codes) {
                        out << " (= " << quote(v.name) << " " << code << ")";
                    }
                    out << "))\n";
                }
                break;
            }
            case BaseType::Real:
                if (v.real_range) {
                    if (v.real_range->lo) {
                        out << "(assert (" << (v.real_range->lo_strict ? "<" : "<=") << " "
                            << real_literal(*v.real_range->lo) << " " << quote(v.name) << "))\n";
                    }
                    if (v.real_range->hi) {
                        out << "(assert (" << (v.real_range->hi_strict ? "<" : "<=") << " " << quote(v.name)
                            << " " << real_literal(*v.real_range->hi) << "))\n";
                    }
                }
                break;
            case BaseType::Bool:
                break;
            }
        }
        out << body_.str();
        for (const auto& a : asserts) {
            out << "(assert " << a << ")\n";
        }
        out << "(check-sat)\n(get-model)\n";
        return out.str();
    }

private:
    static std::string sort(BaseType t) {
        switch (t) {
        case BaseType::Bool: return "Bool";
        case BaseType::Real: return "Real";
        default: return "Int";
        }
    }

    std::string literal(const std::string& name) {
        auto [it, inserted] = literal_index_.emplace(name, literals_.size());
        if (inserted) {
            literals_.push_back(name);
        }
        return std::to_string(it->second);
    }

    void emit_definition(std::size_t i) {
        if (state_.count(i) != 0) {
            if (state_[i] == 1) {
                throw PremaError(Code::E003, "cyclic definition '" + c_.definitions[i].name + "'");
            }
            return;
        }
        state_[i] = 1;
        const Definition& d = c_.definitions[i];
        Term t = gen(*d.value);
        std::string text = t.text;
        if (d.type.base == BaseType::Real && t.type == BaseType::Int) {
            text = "(to_real " + text + ")";
        }
        body_ << "(define-fun " << quote(d.name) << " () " << sort(d.type.base) << " " << text << ")\n";
        body_ << "(define-fun " << quote("ok!" + d.name) << " () Bool " << t.ok << ")\n";
        state_[i] = 2;
    }

    static std::string as_real(const Term& t) {
        return t.type == BaseType::Int ? "(to_real " + t.text + ")" : t.text;
    }

    std::string in_bounds(const std::string& text) const {
        return "(and (<= " + int_literal(c_.int_bounds.min) + " " + text + ") (<= " + text + " " +
               int_literal(c_.int_bounds.max) + "))";
    }

    Term gen(const Expr& e) {
        switch (e.kind) {
        case ExprKind::BoolLit:
            return Term{e.bool_value ? "true" : "false", BaseType::Bool, "true"};
        case ExprKind::IntLit:
            return Term{int_literal(e.int_value), BaseType::Int,
                        c_.int_bounds.contains(e.int_value) ? "true" : "false"};
        case ExprKind::RealLit:
            return Term{real_literal(e.real_value), BaseType::Real, "true"};
        case ExprKind::Name: {
            if (auto v = vars_.find(e.name); v != vars_.end()) {
                return Term{quote(e.name), v->second->type.base, "true"};
            }
            if (auto d = defs_.find(e.name); d != defs_.end()) {
                emit_definition(d->second);
                return Term{quote(e.name), c_.definitions[d->second].type.base, quote("ok!" + e.name)};
            }
            return Term{literal(e.name), BaseType::Enum, "true"};
        }
        case ExprKind::Unary: {
            Term a = gen(*e.lhs);
            if (e.unary_op == UnaryOp::Not) {
                return Term{"(not " + a.text + ")", BaseType::Bool, a.ok};
            }
            Term r{"(- " + a.text + ")", a.type, a.ok};
            if (a.type == BaseType::Int) {
                r.ok = and_of({a.ok, in_bounds(r.text)});
            }
            return r;
        }
        case ExprKind::Ite: {
            Term cnd = gen(*e.lhs);
            Term th = gen(*e.rhs);
            Term el = gen(*e.alt);
            std::string ok = and_of({cnd.ok, implies(cnd.text, th.ok), implies("(not " + cnd.text + ")", el.ok)});
            if (th.type != el.type && (th.type == BaseType::Real || el.type == BaseType::Real)) {
                return Term{"(ite " + cnd.text + " " + as_real(th) + " " + as_real(el) + ")", BaseType::Real, ok};
            }
            return Term{"(ite " + cnd.text + " " + th.text + " " + el.text + ")", th.type, ok};
        }
        case ExprKind::Binary:
            return gen_binary(e);
        }
        return {};
    }

    Term gen_binary(const Expr& e) {
        Term a = gen(*e.lhs);
        Term b = gen(*e.rhs);
        switch (e.binary_op) {
        case BinaryOp::And:
            return Term{"(and " + a.text + " " + b.text + ")", BaseType::Bool,
                        and_of({a.ok, implies(a.text, b.ok)})};
        case BinaryOp::Or:
            return Term{"(or " + a.text + " " + b.text + ")", BaseType::Bool,
                        and_of({a.ok, implies("(not " + a.text + ")", b.ok)})};
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: {
            bool mixed = a.type != b.type && (a.type == BaseType::Real || b.type == BaseType::Real);
            std::string l = mixed ? as_real(a) : a.text;
            std::string r = mixed ? as_real(b) : b.text;
            std::string op(op_spelling(e.binary_op));
            std::string text;
            if (e.binary_op == BinaryOp::Eq) {
                text = "(= " + l + " " + r + ")";
            } else if (e.binary_op == BinaryOp::Ne) {
                text = "(not (= " + l + " " + r + "))";
            } else {
                text = "(" + op + " " + l + " " + r + ")";
            }
            return Term{text, BaseType::Bool, and_of({a.ok, b.ok})};
        }
        case BinaryOp::Div: {
            std::string nonzero = "(not (= " + as_real(b) + " 0.0))";
            return Term{"(/ " + as_real(a) + " " + as_real(b) + ")", BaseType::Real,
                        and_of({a.ok, b.ok, nonzero})};
        }
        case BinaryOp::Mod: {
            // Floor modulo: the result takes the sign of the divisor.
            std::string text = "(ite (< " + b.text + " 0) (- (mod (- " + a.text + ") (- " + b.text + "))) (mod " +
                               a.text + " " + b.text + "))";
            return Term{text, BaseType::Int, and_of({a.ok, b.ok, "(not (= " + b.text + " 0))"})};
        }
        default: {
            std::string op(op_spelling(e.binary_op));
            if (a.type == BaseType::Int && b.type == BaseType::Int) {
                std::string text = "(" + op + " " + a.text + " " + b.text + ")";
                return Term{text, BaseType::Int, and_of({a.ok, b.ok, in_bounds(text)})};
            }
            return Term{"(" + op + " " + as_real(a) + " " + as_real(b) + ")", BaseType::Real, and_of({a.ok, b.ok})};
        }
        }
    }

    const Constraint& c_;
    bool eager_;
    std::map<std::string, const SolverVar*> vars_;
    std::map<std::string, std::size_t> defs_;
    std::map<std::string, std::size_t> literal_index_;
    std::vector<std::string> literals_;
    std::map<std::size_t, int> state_;
    std::ostringstream body_;
};

} // namespace

std::string export_smtlib(const Constraint& c, bool eager_definitions) {
    Exporter exporter(c, eager_definitions);
    return exporter.run();
}

} // namespace prema
