#include "prema/solver.hpp"

#include "prema/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace prema {

std::string_view status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Sat: return "SAT";
    case SolveStatus::Unsat: return "UNSAT";
    case SolveStatus::Unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

namespace {

// ---------------------------------------------------------------------------
// Intervals over the extended rationals.

struct Bound {
    bool inf = true;
    Rational v;
    bool open = false;
};

struct Interval {
    Bound lo;
    Bound hi;
    bool empty = false;

    static Interval full() { return {}; }

    static Interval point(const Rational& r) {
        Interval i;
        i.lo = Bound{false, r, false};
        i.hi = Bound{false, r, false};
        return i;
    }

    static Interval closed(const Rational& a, const Rational& b) {
        Interval i;
        i.lo = Bound{false, a, false};
        i.hi = Bound{false, b, false};
        i.normalize();
        return i;
    }

    static Interval none() {
        Interval i;
        i.empty = true;
        return i;
    }

    void normalize() {
        if (!empty && !lo.inf && !hi.inf) {
            if (lo.v > hi.v || (lo.v == hi.v && (lo.open || hi.open))) {
                empty = true;
            }
        }
    }

    [[nodiscard]] bool is_point() const { return !empty && !lo.inf && !hi.inf && lo.v == hi.v; }

    [[nodiscard]] bool contains(const Rational& r) const {
        if (empty) {
            return false;
        }
        bool above = lo.inf || r > lo.v || (r == lo.v && !lo.open);
        bool below = hi.inf || r < hi.v || (r == hi.v && !hi.open);
        return above && below;
    }

    friend bool operator==(const Interval& a, const Interval& b) {
        if (a.empty || b.empty) {
            return a.empty == b.empty;
        }
        auto same = [](const Bound& x, const Bound& y) {
            return x.inf == y.inf && (x.inf || (x.v == y.v && x.open == y.open));
        };
        return same(a.lo, b.lo) && same(a.hi, b.hi);
    }
};

Interval intersect(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) {
        return Interval::none();
    }
    Interval r;
    if (a.lo.inf) {
        r.lo = b.lo;
    } else if (b.lo.inf) {
        r.lo = a.lo;
    } else if (a.lo.v != b.lo.v) {
        r.lo = a.lo.v > b.lo.v ? a.lo : b.lo;
    } else {
        r.lo = Bound{false, a.lo.v, a.lo.open || b.lo.open};
    }
    if (a.hi.inf) {
        r.hi = b.hi;
    } else if (b.hi.inf) {
        r.hi = a.hi;
    } else if (a.hi.v != b.hi.v) {
        r.hi = a.hi.v < b.hi.v ? a.hi : b.hi;
    } else {
        r.hi = Bound{false, a.hi.v, a.hi.open || b.hi.open};
    }
    r.normalize();
    return r;
}

Interval hull(const Interval& a, const Interval& b) {
    if (a.empty) {
        return b;
    }
    if (b.empty) {
        return a;
    }
    Interval r;
    if (a.lo.inf || b.lo.inf) {
        r.lo = Bound{};
    } else if (a.lo.v != b.lo.v) {
        r.lo = a.lo.v < b.lo.v ? a.lo : b.lo;
    } else {
        r.lo = Bound{false, a.lo.v, a.lo.open && b.lo.open};
    }
    if (a.hi.inf || b.hi.inf) {
        r.hi = Bound{};
    } else if (a.hi.v != b.hi.v) {
        r.hi = a.hi.v > b.hi.v ? a.hi : b.hi;
    } else {
        r.hi = Bound{false, a.hi.v, a.hi.open && b.hi.open};
    }
    return r;
}

Interval negate(const Interval& a) {
    if (a.empty) {
        return a;
    }
    Interval r;
    r.lo = a.hi.inf ? Bound{} : Bound{false, -a.hi.v, a.hi.open};
    r.hi = a.lo.inf ? Bound{} : Bound{false, -a.lo.v, a.lo.open};
    return r;
}

Interval add(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) {
        return Interval::none();
    }
    Interval r;
    r.lo = (a.lo.inf || b.lo.inf) ? Bound{} : Bound{false, a.lo.v + b.lo.v, a.lo.open || b.lo.open};
    r.hi = (a.hi.inf || b.hi.inf) ? Bound{} : Bound{false, a.hi.v + b.hi.v, a.hi.open || b.hi.open};
    return r;
}

Interval sub(const Interval& a, const Interval& b) {
    return add(a, negate(b));
}

// Extended rational used for endpoint products: inf in {-1, 0, +1}.
struct Ext {
    int inf = 0;
    Rational v;
};

int sign_of(const Ext& x) {
    if (x.inf != 0) {
        return x.inf;
    }
    return x.v > 0 ? 1 : (x.v < 0 ? -1 : 0);
}

Ext ext_mul(const Ext& x, const Ext& y) {
    int sx = sign_of(x);
    int sy = sign_of(y);
    if (sx == 0 || sy == 0) {
        return Ext{0, Rational(0)};
    }
    if (x.inf != 0 || y.inf != 0) {
        return Ext{sx * sy, Rational(0)};
    }
    return Ext{0, x.v * y.v};
}

bool ext_less(const Ext& a, const Ext& b) {
    if (a.inf != b.inf) {
        return a.inf < b.inf;
    }
    return a.inf == 0 && a.v < b.v;
}

Ext lower_ext(const Interval& a) { return a.lo.inf ? Ext{-1, Rational(0)} : Ext{0, a.lo.v}; }
Ext upper_ext(const Interval& a) { return a.hi.inf ? Ext{1, Rational(0)} : Ext{0, a.hi.v}; }

Interval from_ext(const Ext& lo, const Ext& hi) {
    Interval r;
    r.lo = lo.inf != 0 ? Bound{} : Bound{false, lo.v, false};
    r.hi = hi.inf != 0 ? Bound{} : Bound{false, hi.v, false};
    r.normalize();
    return r;
}

Interval mul(const Interval& a, const Interval& b) {
    if (a.empty || b.empty) {
        return Interval::none();
    }
    Ext c[4] = {ext_mul(lower_ext(a), lower_ext(b)), ext_mul(lower_ext(a), upper_ext(b)),
                ext_mul(upper_ext(a), lower_ext(b)), ext_mul(upper_ext(a), upper_ext(b))};
    Ext lo = c[0];
    Ext hi = c[0];
    for (const auto& x : c) {
        if (ext_less(x, lo)) {
            lo = x;
        }
        if (ext_less(hi, x)) {
            hi = x;
        }
    }
    return from_ext(lo, hi);
}

bool strictly_straddles_zero(const Interval& b) {
    bool below = b.lo.inf || b.lo.v < 0;
    bool above = b.hi.inf || b.hi.v > 0;
    return below && above;
}

// Over-approximation of {1/x : x in b, x != 0}.
Interval reciprocal(const Interval& b) {
    if (b.empty || (b.is_point() && b.lo.v == 0)) {
        return Interval::none();
    }
    if (strictly_straddles_zero(b)) {
        return Interval::full();
    }
    Interval r;
    if (!b.lo.inf && b.lo.v >= 0) {
        r.lo = b.hi.inf ? Bound{false, Rational(0), false} : Bound{false, Rational(1) / b.hi.v, false};
        r.hi = b.lo.v == 0 ? Bound{} : Bound{false, Rational(1) / b.lo.v, false};
    } else {
        r.lo = b.hi.v == 0 ? Bound{} : Bound{false, Rational(1) / b.hi.v, false};
        r.hi = b.lo.inf ? Bound{false, Rational(0), false} : Bound{false, Rational(1) / b.lo.v, false};
    }
    r.normalize();
    return r;
}

Interval divide(const Interval& a, const Interval& b) {
    Interval rb = reciprocal(b);
    if (rb.empty) {
        return rb;
    }
    return mul(a, rb);
}

Interval round_int(const Interval& a, const IntBounds& bounds) {
    if (a.empty) {
        return a;
    }
    Interval r;
    Rational lo = a.lo.inf ? Rational(bounds.min)
                           : (a.lo.open ? Rational(floor_of(a.lo.v) + 1) : ceil_of(a.lo.v));
    Rational hi = a.hi.inf ? Rational(bounds.max)
                           : (a.hi.open ? Rational(ceil_of(a.hi.v) - 1) : floor_of(a.hi.v));
    lo = std::max(lo, Rational(bounds.min));
    hi = std::min(hi, Rational(bounds.max));
    return Interval::closed(lo, hi);
}

// ---------------------------------------------------------------------------
// Literal sets for enum-valued terms.

class LitSet {
public:
    LitSet() = default;
    explicit LitSet(std::size_t n) : words_((n + 63) / 64, 0) {}

    static LitSet all(std::size_t n) {
        LitSet s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s.set(i);
        }
        return s;
    }

    void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
    void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
    [[nodiscard]] bool test(std::size_t i) const { return ((words_[i / 64] >> (i % 64)) & 1U) != 0; }

    [[nodiscard]] std::size_t count() const {
        std::size_t n = 0;
        for (auto w : words_) {
            n += static_cast<std::size_t>(__builtin_popcountll(w));
        }
        return n;
    }

    [[nodiscard]] int first() const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            if (words_[w] != 0) {
                return static_cast<int>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[w])));
            }
        }
        return -1;
    }

    [[nodiscard]] bool empty() const { return first() < 0; }

    LitSet operator&(const LitSet& o) const {
        LitSet r = *this;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            r.words_[i] &= o.words_[i];
        }
        return r;
    }

    LitSet operator|(const LitSet& o) const {
        LitSet r = *this;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            r.words_[i] |= o.words_[i];
        }
        return r;
    }

    friend bool operator==(const LitSet&, const LitSet&) = default;

private:
    std::vector<std::uint64_t> words_;
};

// ---------------------------------------------------------------------------
// Compiled term DAG.

enum class TOp : std::uint8_t { Const, Var, Not, Neg, And, Or, Cmp, Add, Sub, Mul, Div, Mod, Ite };

struct Term {
    TOp op = TOp::Const;
    BaseType type = BaseType::Bool;
    BinaryOp cmp = BinaryOp::Eq;
    int var = -1;
    Value constant;
    int a = -1;
    int b = -1;
    int c = -1;
};

// Abstract value of a term: the set of values it may take without a fault.
struct AVal {
    bool can_t = true;
    bool can_f = true;
    Interval iv;
    LitSet lits;
};

struct Budget {};

struct Linear {
    std::map<int, Rational> coef; // variable index -> coefficient
    Rational k;
};

enum class Rel : std::uint8_t { Lt, Le, Eq };

struct LinCon {
    Linear lhs; // lhs rel 0
    Rel rel = Rel::Le;
};

class Solver {
public:
    Solver(const Constraint& c, const SolveOptions& opts) : c_(c), opts_(opts) {}

    SolveResult run() {
        compile();
        SolveResult result;
        State root = initial_state();
        try {
            Outcome o = dfs(root);
            if (o == Outcome::Sat) {
                result.status = SolveStatus::Sat;
                result.model = std::move(model_);
                return result;
            }
            if (o == Outcome::Unsat) {
                result.status = SolveStatus::Unsat;
                return result;
            }
            result.status = SolveStatus::Unknown;
            result.reason = unknown_reason_.empty() ? "nonlinear real arithmetic" : unknown_reason_;
        } catch (const Budget&) {
            result.status = SolveStatus::Unknown;
            result.reason = "search budget of " + std::to_string(opts_.node_limit) + " nodes exhausted";
        }
        result.smtlib = export_smtlib(c_, opts_.eager_definitions);
        return result;
    }

private:
    enum class Outcome : std::uint8_t { Sat, Unsat, Unknown };

    struct State {
        std::vector<AVal> doms;
    };

    // -- compilation --------------------------------------------------------

    void compile() {
        for (std::size_t i = 0; i < c_.vars.size(); ++i) {
            if (!var_index_.emplace(c_.vars[i].name, static_cast<int>(i)).second) {
                throw PremaError(Code::E003, "duplicate solver variable '" + c_.vars[i].name + "'");
            }
            for (const auto& lit : c_.vars[i].type.literals) {
                intern_literal(lit);
            }
        }
        for (std::size_t i = 0; i < c_.definitions.size(); ++i) {
            def_index_.emplace(c_.definitions[i].name, static_cast<int>(i));
            for (const auto& lit : c_.definitions[i].type.literals) {
                intern_literal(lit);
            }
        }
        // Literal names mentioned anywhere need a slot too.
        std::vector<const Expr*> names;
        for (const auto& e : c_.conjuncts) {
            collect_names(e, names);
        }
        for (const auto& d : c_.definitions) {
            collect_names(d.value, names);
        }
        for (const Expr* n : names) {
            if (var_index_.count(n->name) == 0 && def_index_.count(n->name) == 0) {
                intern_literal(n->name);
            }
        }
        def_terms_.assign(c_.definitions.size(), -1);
        for (const auto& e : c_.conjuncts) {
            roots_.push_back(compile_expr(*e));
        }
        if (opts_.eager_definitions) {
            for (std::size_t i = 0; i < c_.definitions.size(); ++i) {
                int t = def_term(static_cast<int>(i));
                Term eq;
                eq.op = TOp::Cmp;
                eq.cmp = BinaryOp::Eq;
                eq.type = BaseType::Bool;
                eq.a = t;
                eq.b = t;
                roots_.push_back(add_term(std::move(eq)));
            }
        }
        for (int r : roots_) {
            if (terms_[static_cast<std::size_t>(r)].type != BaseType::Bool) {
                throw PremaError(Code::E003, "constraint conjunct is not boolean");
            }
        }
        watchers_.assign(c_.vars.size(), {});
        for (std::size_t r = 0; r < roots_.size(); ++r) {
            std::set<int> vars;
            std::set<int> seen;
            collect_vars(roots_[r], vars, seen);
            for (int v : vars) {
                watchers_[static_cast<std::size_t>(v)].push_back(static_cast<int>(r));
            }
        }
        cache_.resize(terms_.size());
        stamp_.assign(terms_.size(), 0);
    }

    void intern_literal(const std::string& lit) {
        if (lit_index_.emplace(lit, static_cast<int>(lit_names_.size())).second) {
            lit_names_.push_back(lit);
        }
    }

    int add_term(Term t) {
        terms_.push_back(std::move(t));
        return static_cast<int>(terms_.size()) - 1;
    }

    int def_term(int i) {
        auto& slot = def_terms_[static_cast<std::size_t>(i)];
        if (slot == -2) {
            throw PremaError(Code::E003, "cyclic definition '" + c_.definitions[static_cast<std::size_t>(i)].name + "'");
        }
        if (slot < 0) {
            slot = -2;
            slot = compile_expr(*c_.definitions[static_cast<std::size_t>(i)].value);
        }
        return slot;
    }

    static BaseType numeric_join(BaseType a, BaseType b) {
        return (a == BaseType::Int && b == BaseType::Int) ? BaseType::Int : BaseType::Real;
    }

    int compile_expr(const Expr& e) {
        auto it = memo_.find(&e);
        if (it != memo_.end()) {
            return it->second;
        }
        Term t;
        switch (e.kind) {
        case ExprKind::BoolLit:
            t.op = TOp::Const;
            t.type = BaseType::Bool;
            t.constant = e.bool_value;
            break;
        case ExprKind::IntLit:
            t.op = TOp::Const;
            t.type = BaseType::Int;
            t.constant = e.int_value;
            break;
        case ExprKind::RealLit:
            t.op = TOp::Const;
            t.type = BaseType::Real;
            t.constant = e.real_value;
            break;
        case ExprKind::Name: {
            if (e.primed) {
                throw PremaError(Code::E003, "unresolved primed name '" + e.name + "' in constraint");
            }
            if (auto v = var_index_.find(e.name); v != var_index_.end()) {
                t.op = TOp::Var;
                t.var = v->second;
                t.type = c_.vars[static_cast<std::size_t>(v->second)].type.base;
            } else if (auto d = def_index_.find(e.name); d != def_index_.end()) {
                int idx = def_term(d->second);
                memo_[&e] = idx;
                return idx;
            } else {
                t.op = TOp::Const;
                t.type = BaseType::Enum;
                t.constant = EnumValue{e.name};
            }
            break;
        }
        case ExprKind::Unary:
            t.a = compile_expr(*e.lhs);
            if (e.unary_op == UnaryOp::Not) {
                t.op = TOp::Not;
                t.type = BaseType::Bool;
            } else {
                t.op = TOp::Neg;
                t.type = terms_[static_cast<std::size_t>(t.a)].type;
            }
            break;
        case ExprKind::Binary: {
            t.a = compile_expr(*e.lhs);
            t.b = compile_expr(*e.rhs);
            BaseType ta = terms_[static_cast<std::size_t>(t.a)].type;
            BaseType tb = terms_[static_cast<std::size_t>(t.b)].type;
            switch (e.binary_op) {
            case BinaryOp::And: t.op = TOp::And; t.type = BaseType::Bool; break;
            case BinaryOp::Or: t.op = TOp::Or; t.type = BaseType::Bool; break;
            case BinaryOp::Add: t.op = TOp::Add; t.type = numeric_join(ta, tb); break;
            case BinaryOp::Sub: t.op = TOp::Sub; t.type = numeric_join(ta, tb); break;
            case BinaryOp::Mul: t.op = TOp::Mul; t.type = numeric_join(ta, tb); break;
            case BinaryOp::Div: t.op = TOp::Div; t.type = BaseType::Real; break;
            case BinaryOp::Mod: t.op = TOp::Mod; t.type = BaseType::Int; break;
            default:
                t.op = TOp::Cmp;
                t.cmp = e.binary_op;
                t.type = BaseType::Bool;
                break;
            }
            break;
        }
        case ExprKind::Ite: {
            t.op = TOp::Ite;
            t.a = compile_expr(*e.lhs);
            t.b = compile_expr(*e.rhs);
            t.c = compile_expr(*e.alt);
            BaseType tb = terms_[static_cast<std::size_t>(t.b)].type;
            BaseType tc = terms_[static_cast<std::size_t>(t.c)].type;
            t.type = (tb == tc) ? tb : BaseType::Real;
            break;
        }
        }
        int idx = add_term(std::move(t));
        memo_[&e] = idx;
        return idx;
    }

    void collect_vars(int t, std::set<int>& out, std::set<int>& seen) const {
        if (t < 0 || !seen.insert(t).second) {
            return;
        }
        const Term& term = terms_[static_cast<std::size_t>(t)];
        if (term.op == TOp::Var) {
            out.insert(term.var);
        }
        collect_vars(term.a, out, seen);
        collect_vars(term.b, out, seen);
        collect_vars(term.c, out, seen);
    }

    State initial_state() const {
        State s;
        for (const auto& v : c_.vars) {
            AVal d;
            switch (v.type.base) {
            case BaseType::Bool:
                break;
            case BaseType::Int:
                d.iv = Interval::closed(Rational(c_.int_bounds.min), Rational(c_.int_bounds.max));
                break;
            case BaseType::Real:
                if (v.real_range) {
                    if (v.real_range->lo) {
                        d.iv.lo = Bound{false, *v.real_range->lo, v.real_range->lo_strict};
                    }
                    if (v.real_range->hi) {
                        d.iv.hi = Bound{false, *v.real_range->hi, v.real_range->hi_strict};
                    }
                    d.iv.normalize();
                }
                break;
            case BaseType::Enum: {
                d.lits = LitSet(lit_names_.size());
                for (const auto& lit : v.type.literals) {
                    d.lits.set(static_cast<std::size_t>(lit_index_.at(lit)));
                }
                break;
            }
            }
            s.doms.push_back(std::move(d));
        }
        return s;
    }

    // -- abstract evaluation -------------------------------------------------

    const AVal& eval(int t, const State& s) {
        auto ti = static_cast<std::size_t>(t);
        if (stamp_[ti] == generation_) {
            return cache_[ti];
        }
        AVal r = compute(t, s);
        cache_[ti] = std::move(r);
        stamp_[ti] = generation_;
        return cache_[ti];
    }

    AVal bool_val(bool can_t, bool can_f) const {
        AVal v;
        v.can_t = can_t;
        v.can_f = can_f;
        return v;
    }

    AVal num_val(Interval iv, BaseType type) const {
        AVal v;
        v.iv = type == BaseType::Int ? round_int(iv, c_.int_bounds) : std::move(iv);
        return v;
    }

    bool is_bottom(const AVal& v, BaseType type) const {
        switch (type) {
        case BaseType::Bool: return !v.can_t && !v.can_f;
        case BaseType::Enum: return v.lits.empty();
        default: return v.iv.empty;
        }
    }

    AVal compute(int t, const State& s) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        switch (term.op) {
        case TOp::Const: {
            if (const auto* b = std::get_if<bool>(&term.constant)) {
                return bool_val(*b, !*b);
            }
            if (const auto* e = std::get_if<EnumValue>(&term.constant)) {
                AVal v;
                v.lits = LitSet(lit_names_.size());
                v.lits.set(static_cast<std::size_t>(lit_index_.at(e->literal)));
                return v;
            }
            if (const auto* i = std::get_if<std::int64_t>(&term.constant)) {
                if (!c_.int_bounds.contains(*i)) {
                    return num_val(Interval::none(), BaseType::Int);
                }
            }
            return num_val(Interval::point(*as_rational(term.constant)), term.type);
        }
        case TOp::Var:
            return s.doms[static_cast<std::size_t>(term.var)];
        case TOp::Not: {
            const AVal& a = eval(term.a, s);
            return bool_val(a.can_f, a.can_t);
        }
        case TOp::And: {
            AVal a = eval(term.a, s);
            const AVal& b = eval(term.b, s);
            return bool_val(a.can_t && b.can_t, a.can_f || (a.can_t && b.can_f));
        }
        case TOp::Or: {
            AVal a = eval(term.a, s);
            const AVal& b = eval(term.b, s);
            return bool_val(a.can_t || (a.can_f && b.can_t), a.can_f && b.can_f);
        }
        case TOp::Cmp:
            return compute_cmp(term, s);
        case TOp::Neg:
            return num_val(negate(eval(term.a, s).iv), term.type);
        case TOp::Add: {
            Interval a = eval(term.a, s).iv;
            return num_val(add(a, eval(term.b, s).iv), term.type);
        }
        case TOp::Sub: {
            Interval a = eval(term.a, s).iv;
            return num_val(sub(a, eval(term.b, s).iv), term.type);
        }
        case TOp::Mul: {
            Interval a = eval(term.a, s).iv;
            return num_val(mul(a, eval(term.b, s).iv), term.type);
        }
        case TOp::Div: {
            Interval a = eval(term.a, s).iv;
            return num_val(divide(a, eval(term.b, s).iv), term.type);
        }
        case TOp::Mod: {
            Interval a = eval(term.a, s).iv;
            Interval b = eval(term.b, s).iv;
            return num_val(mod_range(a, b), BaseType::Int);
        }
        case TOp::Ite: {
            AVal cnd = eval(term.a, s);
            AVal r;
            bool have = false;
            auto merge = [&](const AVal& v) {
                if (!have) {
                    r = v;
                    have = true;
                    return;
                }
                r.can_t = r.can_t || v.can_t;
                r.can_f = r.can_f || v.can_f;
                r.iv = hull(r.iv, v.iv);
                r.lits = r.lits | v.lits;
            };
            if (cnd.can_t) {
                merge(eval(term.b, s));
            }
            if (cnd.can_f) {
                merge(eval(term.c, s));
            }
            if (!have) {
                return bottom(term.type);
            }
            if (term.type == BaseType::Int) {
                r.iv = round_int(r.iv, c_.int_bounds);
            }
            return r;
        }
        }
        return bottom(term.type);
    }

    AVal bottom(BaseType type) const {
        AVal v;
        v.can_t = false;
        v.can_f = false;
        v.iv = Interval::none();
        v.lits = LitSet(lit_names_.size());
        (void)type;
        return v;
    }

    static Interval mod_range(const Interval& a, const Interval& b) {
        if (a.empty || b.empty || (b.is_point() && b.lo.v == 0)) {
            return Interval::none();
        }
        if (a.is_point() && b.is_point()) {
            // Both fixed: exact floor modulo.
            Rational q = floor_of(a.lo.v / b.lo.v);
            return Interval::point(a.lo.v - b.lo.v * q);
        }
        Interval r;
        if (!b.lo.inf && b.lo.v > 0) {
            r.lo = Bound{false, Rational(0), false};
            r.hi = b.hi.inf ? Bound{} : Bound{false, b.hi.v - 1, false};
            if (!a.lo.inf && a.lo.v >= 0 && !a.hi.inf && (r.hi.inf || a.hi.v < r.hi.v)) {
                r.hi = a.hi;
            }
        } else if (!b.hi.inf && b.hi.v < 0) {
            r.lo = b.lo.inf ? Bound{} : Bound{false, b.lo.v + 1, false};
            r.hi = Bound{false, Rational(0), false};
        } else {
            r.lo = b.lo.inf ? Bound{} : Bound{false, std::min(Rational(0), Rational(b.lo.v + 1)), false};
            r.hi = b.hi.inf ? Bound{} : Bound{false, std::max(Rational(0), Rational(b.hi.v - 1)), false};
        }
        r.normalize();
        return r;
    }

    AVal compute_cmp(const Term& term, const State& s) {
        AVal a = eval(term.a, s);
        const AVal& b = eval(term.b, s);
        BaseType ta = terms_[static_cast<std::size_t>(term.a)].type;
        BaseType tb = terms_[static_cast<std::size_t>(term.b)].type;
        if (is_bottom(a, ta) || is_bottom(b, tb)) {
            return bool_val(false, false);
        }
        if (ta == BaseType::Bool || tb == BaseType::Bool) {
            if (ta != tb) {
                throw PremaError(Code::E003, "comparison between boolean and non-boolean");
            }
            bool can_eq = (a.can_t && b.can_t) || (a.can_f && b.can_f);
            bool can_ne = (a.can_t && b.can_f) || (a.can_f && b.can_t);
            return term.cmp == BinaryOp::Eq ? bool_val(can_eq, can_ne) : bool_val(can_ne, can_eq);
        }
        if (ta == BaseType::Enum || tb == BaseType::Enum) {
            if (ta != tb) {
                throw PremaError(Code::E003, "comparison between enum and non-enum");
            }
            LitSet both = a.lits & b.lits;
            bool can_eq = !both.empty();
            bool can_ne = !(a.lits.count() == 1 && b.lits.count() == 1 && a.lits == b.lits);
            return term.cmp == BinaryOp::Eq ? bool_val(can_eq, can_ne) : bool_val(can_ne, can_eq);
        }
        return bool_val(can_hold(term.cmp, a.iv, b.iv), can_hold(negate_comparison(term.cmp), a.iv, b.iv));
    }

    // Whether some x in a, y in b satisfy x op y.
    static bool can_hold(BinaryOp op, const Interval& a, const Interval& b) {
        switch (op) {
        case BinaryOp::Eq:
            return !intersect(a, b).empty;
        case BinaryOp::Ne:
            return !(a.is_point() && b.is_point() && a.lo.v == b.lo.v);
        case BinaryOp::Lt:
            return a.lo.inf || b.hi.inf || a.lo.v < b.hi.v;
        case BinaryOp::Le:
            return a.lo.inf || b.hi.inf || a.lo.v < b.hi.v || (a.lo.v == b.hi.v && !a.lo.open && !b.hi.open);
        case BinaryOp::Gt:
            return can_hold(BinaryOp::Lt, b, a);
        case BinaryOp::Ge:
            return can_hold(BinaryOp::Le, b, a);
        default:
            return true;
        }
    }

    // -- narrowing ----------------------------------------------------------

    struct Conflict {};

    void narrow_var(int var, const AVal& required, State& s) {
        auto vi = static_cast<std::size_t>(var);
        AVal& d = s.doms[vi];
        BaseType type = c_.vars[vi].type.base;
        AVal next = d;
        switch (type) {
        case BaseType::Bool:
            next.can_t = d.can_t && required.can_t;
            next.can_f = d.can_f && required.can_f;
            break;
        case BaseType::Enum:
            next.lits = d.lits & required.lits;
            break;
        case BaseType::Int:
            next.iv = round_int(intersect(d.iv, required.iv), c_.int_bounds);
            break;
        case BaseType::Real:
            next.iv = intersect(d.iv, required.iv);
            break;
        }
        if (is_bottom(next, type)) {
            throw Conflict{};
        }
        bool changed = false;
        switch (type) {
        case BaseType::Bool: changed = next.can_t != d.can_t || next.can_f != d.can_f; break;
        case BaseType::Enum: changed = !(next.lits == d.lits); break;
        default: changed = !(next.iv == d.iv); break;
        }
        if (changed) {
            d = std::move(next);
            for (int w : watchers_[vi]) {
                if (!queued_[static_cast<std::size_t>(w)]) {
                    queued_[static_cast<std::size_t>(w)] = true;
                    queue_.push_back(w);
                }
            }
        }
    }

    void narrow_bool(int t, bool want, State& s) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        const AVal& cur = eval(t, s);
        if (want ? !cur.can_t : !cur.can_f) {
            throw Conflict{};
        }
        switch (term.op) {
        case TOp::Const:
            return;
        case TOp::Var:
            narrow_var(term.var, bool_val(want, !want), s);
            return;
        case TOp::Not:
            narrow_bool(term.a, !want, s);
            return;
        case TOp::And: {
            if (want) {
                narrow_bool(term.a, true, s);
                narrow_bool(term.b, true, s);
                return;
            }
            const AVal& a = eval(term.a, s);
            if (!a.can_f) {
                narrow_bool(term.b, false, s);
            } else if (!eval(term.b, s).can_f) {
                narrow_bool(term.a, false, s);
            }
            return;
        }
        case TOp::Or: {
            if (!want) {
                narrow_bool(term.a, false, s);
                narrow_bool(term.b, false, s);
                return;
            }
            const AVal& a = eval(term.a, s);
            if (!a.can_t) {
                narrow_bool(term.b, true, s);
            } else if (!eval(term.b, s).can_t) {
                narrow_bool(term.a, true, s);
            }
            return;
        }
        case TOp::Cmp:
            narrow_cmp(term, want ? term.cmp : negate_comparison(term.cmp), s);
            return;
        case TOp::Ite: {
            AVal cnd = eval(term.a, s);
            if (!cnd.can_f) {
                narrow_bool(term.b, want, s);
            } else if (!cnd.can_t) {
                narrow_bool(term.c, want, s);
            } else {
                const AVal& th = eval(term.b, s);
                bool then_ok = want ? th.can_t : th.can_f;
                const AVal& el = eval(term.c, s);
                bool else_ok = want ? el.can_t : el.can_f;
                if (!then_ok) {
                    narrow_bool(term.a, false, s);
                    narrow_bool(term.c, want, s);
                } else if (!else_ok) {
                    narrow_bool(term.a, true, s);
                    narrow_bool(term.b, want, s);
                }
            }
            return;
        }
        default:
            return;
        }
    }

    void narrow_cmp(const Term& term, BinaryOp op, State& s) {
        BaseType ta = terms_[static_cast<std::size_t>(term.a)].type;
        if (ta == BaseType::Bool) {
            AVal a = eval(term.a, s);
            AVal b = eval(term.b, s);
            bool eq = op == BinaryOp::Eq;
            if (a.can_t != a.can_f) {
                narrow_bool(term.b, eq ? a.can_t : !a.can_t, s);
            } else if (b.can_t != b.can_f) {
                narrow_bool(term.a, eq ? b.can_t : !b.can_t, s);
            }
            return;
        }
        if (ta == BaseType::Enum) {
            AVal a = eval(term.a, s);
            AVal b = eval(term.b, s);
            if (op == BinaryOp::Eq) {
                AVal both;
                both.lits = a.lits & b.lits;
                narrow_enum(term.a, both, s);
                narrow_enum(term.b, both, s);
            } else {
                if (b.lits.count() == 1) {
                    AVal rest;
                    rest.lits = a.lits;
                    rest.lits.reset(static_cast<std::size_t>(b.lits.first()));
                    narrow_enum(term.a, rest, s);
                } else if (a.lits.count() == 1) {
                    AVal rest;
                    rest.lits = b.lits;
                    rest.lits.reset(static_cast<std::size_t>(a.lits.first()));
                    narrow_enum(term.b, rest, s);
                }
            }
            return;
        }
        Interval a = eval(term.a, s).iv;
        Interval b = eval(term.b, s).iv;
        Interval ra = Interval::full();
        Interval rb = Interval::full();
        switch (op) {
        case BinaryOp::Eq:
            ra = b;
            rb = a;
            break;
        case BinaryOp::Ne:
            if (b.is_point()) {
                ra = exclude_endpoint(a, b.lo.v);
            }
            if (a.is_point()) {
                rb = exclude_endpoint(b, a.lo.v);
            }
            break;
        case BinaryOp::Lt:
        case BinaryOp::Le: {
            bool strict = op == BinaryOp::Lt;
            if (!b.hi.inf) {
                ra.hi = Bound{false, b.hi.v, strict || b.hi.open};
            }
            if (!a.lo.inf) {
                rb.lo = Bound{false, a.lo.v, strict || a.lo.open};
            }
            break;
        }
        case BinaryOp::Gt:
        case BinaryOp::Ge: {
            bool strict = op == BinaryOp::Gt;
            if (!b.lo.inf) {
                ra.lo = Bound{false, b.lo.v, strict || b.lo.open};
            }
            if (!a.hi.inf) {
                rb.hi = Bound{false, a.hi.v, strict || a.hi.open};
            }
            break;
        }
        default:
            break;
        }
        narrow_num(term.a, ra, s);
        narrow_num(term.b, rb, s);
    }

    static Interval exclude_endpoint(const Interval& a, const Rational& p) {
        Interval r = Interval::full();
        if (!a.lo.inf && a.lo.v == p) {
            r.lo = Bound{false, p, true};
        }
        if (!a.hi.inf && a.hi.v == p) {
            r.hi = Bound{false, p, true};
        }
        return r;
    }

    void narrow_enum(int t, const AVal& req, State& s) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        const AVal& cur = eval(t, s);
        if ((cur.lits & req.lits).empty()) {
            throw Conflict{};
        }
        if (term.op == TOp::Var) {
            narrow_var(term.var, req, s);
        } else if (term.op == TOp::Ite) {
            AVal cnd = eval(term.a, s);
            if (!cnd.can_f) {
                narrow_enum(term.b, req, s);
            } else if (!cnd.can_t) {
                narrow_enum(term.c, req, s);
            } else if ((eval(term.b, s).lits & req.lits).empty()) {
                narrow_bool(term.a, false, s);
                narrow_enum(term.c, req, s);
            } else if ((eval(term.c, s).lits & req.lits).empty()) {
                narrow_bool(term.a, true, s);
                narrow_enum(term.b, req, s);
            }
        }
    }

    void narrow_num(int t, Interval req, State& s) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        if (term.type == BaseType::Int) {
            req = round_int(req, c_.int_bounds);
        }
        const AVal& cur = eval(t, s);
        Interval now = intersect(cur.iv, req);
        if (now.empty) {
            throw Conflict{};
        }
        if (now == cur.iv && term.op != TOp::Div && term.op != TOp::Mod) {
            return;
        }
        switch (term.op) {
        case TOp::Var: {
            AVal r;
            r.iv = req;
            narrow_var(term.var, r, s);
            return;
        }
        case TOp::Neg:
            narrow_num(term.a, negate(now), s);
            return;
        case TOp::Add: {
            Interval a = eval(term.a, s).iv;
            Interval b = eval(term.b, s).iv;
            narrow_num(term.a, sub(now, b), s);
            narrow_num(term.b, sub(now, a), s);
            return;
        }
        case TOp::Sub: {
            Interval a = eval(term.a, s).iv;
            Interval b = eval(term.b, s).iv;
            narrow_num(term.a, add(now, b), s);
            narrow_num(term.b, sub(a, now), s);
            return;
        }
        case TOp::Mul: {
            Interval a = eval(term.a, s).iv;
            Interval b = eval(term.b, s).iv;
            if (!b.contains(Rational(0))) {
                narrow_num(term.a, divide(now, b), s);
            }
            if (!a.contains(Rational(0))) {
                narrow_num(term.b, divide(now, a), s);
            }
            return;
        }
        case TOp::Div: {
            Interval b = eval(term.b, s).iv;
            narrow_num(term.b, exclude_endpoint(b, Rational(0)), s);
            b = eval(term.b, s).iv;
            narrow_num(term.a, mul(now, b), s);
            return;
        }
        case TOp::Mod: {
            Interval b = eval(term.b, s).iv;
            narrow_num(term.b, exclude_endpoint(b, Rational(0)), s);
            return;
        }
        case TOp::Ite: {
            AVal cnd = eval(term.a, s);
            if (!cnd.can_f) {
                narrow_num(term.b, now, s);
            } else if (!cnd.can_t) {
                narrow_num(term.c, now, s);
            } else if (intersect(eval(term.b, s).iv, now).empty) {
                narrow_bool(term.a, false, s);
                narrow_num(term.c, now, s);
            } else if (intersect(eval(term.c, s).iv, now).empty) {
                narrow_bool(term.a, true, s);
                narrow_num(term.b, now, s);
            }
            return;
        }
        default:
            return;
        }
    }

    bool propagate(State& s) {
        queue_.clear();
        queued_.assign(roots_.size(), true);
        for (std::size_t i = 0; i < roots_.size(); ++i) {
            queue_.push_back(static_cast<int>(i));
        }
        std::size_t budget = 64 * roots_.size() + 256;
        std::size_t head = 0;
        try {
            while (head < queue_.size() && budget-- > 0) {
                int r = queue_[head++];
                queued_[static_cast<std::size_t>(r)] = false;
                ++generation_;
                narrow_bool(roots_[static_cast<std::size_t>(r)], true, s);
            }
        } catch (const Conflict&) {
            ++generation_;
            return false;
        }
        ++generation_;
        return true;
    }

    // -- search -------------------------------------------------------------

    bool is_fixed(const AVal& d, BaseType type) const {
        switch (type) {
        case BaseType::Bool: return d.can_t != d.can_f;
        case BaseType::Enum: return d.lits.count() == 1;
        case BaseType::Int: return d.iv.is_point();
        case BaseType::Real: return true; // decided at the leaves
        }
        return true;
    }

    Outcome dfs(State s) {
        if (++nodes_ > opts_.node_limit) {
            throw Budget{};
        }
        if (!propagate(s)) {
            return Outcome::Unsat;
        }
        int pick = -1;
        for (std::size_t i = 0; i < c_.vars.size(); ++i) {
            if (!is_fixed(s.doms[i], c_.vars[i].type.base)) {
                pick = static_cast<int>(i);
                break;
            }
        }
        if (pick < 0) {
            return leaf(s);
        }
        auto pi = static_cast<std::size_t>(pick);
        bool unknown = false;
        auto try_branch = [&](State next) -> bool {
            Outcome o = dfs(std::move(next));
            if (o == Outcome::Sat) {
                return true;
            }
            unknown = unknown || o == Outcome::Unknown;
            return false;
        };
        switch (c_.vars[pi].type.base) {
        case BaseType::Bool:
            for (bool v : {false, true}) {
                if (v ? !s.doms[pi].can_t : !s.doms[pi].can_f) {
                    continue;
                }
                State next = s;
                next.doms[pi].can_t = v;
                next.doms[pi].can_f = !v;
                if (try_branch(std::move(next))) {
                    return Outcome::Sat;
                }
            }
            break;
        case BaseType::Enum:
            for (const auto& lit : c_.vars[pi].type.literals) {
                auto li = static_cast<std::size_t>(lit_index_.at(lit));
                if (!s.doms[pi].lits.test(li)) {
                    continue;
                }
                State next = s;
                next.doms[pi].lits = LitSet(lit_names_.size());
                next.doms[pi].lits.set(li);
                if (try_branch(std::move(next))) {
                    return Outcome::Sat;
                }
            }
            break;
        case BaseType::Int: {
            const Interval& iv = s.doms[pi].iv;
            Rational mid = floor_of((iv.lo.v + iv.hi.v) / 2);
            State left = s;
            left.doms[pi].iv = Interval::closed(iv.lo.v, mid);
            if (try_branch(std::move(left))) {
                return Outcome::Sat;
            }
            State right = s;
            right.doms[pi].iv = Interval::closed(mid + 1, iv.hi.v);
            if (try_branch(std::move(right))) {
                return Outcome::Sat;
            }
            break;
        }
        case BaseType::Real:
            break;
        }
        return unknown ? Outcome::Unknown : Outcome::Unsat;
    }

    Value fixed_value(std::size_t i, const State& s) const {
        const AVal& d = s.doms[i];
        switch (c_.vars[i].type.base) {
        case BaseType::Bool: return d.can_t;
        case BaseType::Enum: return EnumValue{lit_names_[static_cast<std::size_t>(d.lits.first())]};
        case BaseType::Int: return static_cast<std::int64_t>(numerator(d.iv.lo.v));
        case BaseType::Real: return d.iv.lo.v;
        }
        return false;
    }

    Outcome leaf(const State& s) {
        Valuation assignment;
        std::vector<int> free_reals;
        for (std::size_t i = 0; i < c_.vars.size(); ++i) {
            if (c_.vars[i].type.base == BaseType::Real && !s.doms[i].iv.is_point()) {
                free_reals.push_back(static_cast<int>(i));
                continue;
            }
            assignment.emplace(c_.vars[i].name, fixed_value(i, s));
        }
        if (free_reals.empty()) {
            return concrete_check(assignment) ? Outcome::Sat : Outcome::Unsat;
        }
        leaf_state_ = &s;
        decided_.clear();
        pcache_.clear();
        return residual({});
    }

    // Full evaluation through the shared expression evaluator. On success the
    // model (variables and evaluated definitions) is stored.
    bool concrete_check(const Valuation& assignment) {
        Valuation full = assignment;
        try {
            if (opts_.eager_definitions) {
                MapEnv env(full);
                for (const auto& d : c_.definitions) {
                    full[d.name] = coerce_to(evaluate(*d.value, env, c_.int_bounds), d.type);
                }
                for (const auto& e : c_.conjuncts) {
                    if (!evaluate_bool(*e, env, c_.int_bounds)) {
                        return false;
                    }
                }
            } else {
                LazyEnv env(c_, full);
                for (const auto& e : c_.conjuncts) {
                    if (!evaluate_bool(*e, env, c_.int_bounds)) {
                        return false;
                    }
                }
                env.export_to(full);
            }
        } catch (const EvalFault& f) {
            if (f.code() == Code::E101) {
                throw PremaError(Code::E003, std::string("malformed constraint: ") + f.what());
            }
            return false;
        }
        model_ = std::move(full);
        return true;
    }

public:
    // Definitions evaluated on first use, memoized.
    class LazyEnv final : public Env {
    public:
        LazyEnv(const Constraint& c, const Valuation& vars) : c_(c), vars_(vars) {
            for (std::size_t i = 0; i < c.definitions.size(); ++i) {
                defs_.emplace(c.definitions[i].name, i);
            }
        }

        const Value* lookup(const std::string& name, bool /*primed*/) const override {
            if (auto it = vars_.find(name); it != vars_.end()) {
                return &it->second;
            }
            if (auto it = done_.find(name); it != done_.end()) {
                return &it->second;
            }
            auto d = defs_.find(name);
            if (d == defs_.end()) {
                return nullptr;
            }
            const Definition& def = c_.definitions[d->second];
            Value v = coerce_to(evaluate(*def.value, *this, c_.int_bounds), def.type);
            return &done_.emplace(name, std::move(v)).first->second;
        }

        void export_to(Valuation& out) const {
            for (const auto& [k, v] : done_) {
                out[k] = v;
            }
        }

    private:
        const Constraint& c_;
        const Valuation& vars_;
        std::map<std::string, std::size_t> defs_;
        mutable std::map<std::string, Value> done_;
    };

private:
    // -- residual real arithmetic -------------------------------------------

    enum class PKind : std::uint8_t { Known, Residual, Fault };

    struct PVal {
        PKind kind = PKind::Residual;
        Value v;
    };

    PVal peval(int t) {
        if (auto it = pcache_.find(t); it != pcache_.end()) {
            return it->second;
        }
        PVal r = peval_uncached(t);
        pcache_[t] = r;
        return r;
    }

    static PVal known(Value v) { return PVal{PKind::Known, std::move(v)}; }
    static PVal residual_val() { return PVal{PKind::Residual, false}; }
    static PVal fault() { return PVal{PKind::Fault, false}; }

    PVal apply_concrete(const Expr& shape, const std::vector<Value>& args) const {
        // Evaluate one operator on concrete operands through the shared evaluator.
        Valuation env_vals;
        std::vector<ExprPtr> kids;
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string nm = "$" + std::to_string(i);
            env_vals.emplace(nm, args[i]);
            kids.push_back(make_name(nm));
        }
        ExprPtr e;
        if (shape.kind == ExprKind::Unary) {
            e = make_unary(shape.unary_op, kids[0]);
        } else {
            e = make_binary(shape.binary_op, kids[0], kids[1]);
        }
        MapEnv env(env_vals);
        try {
            return known(evaluate(*e, env, c_.int_bounds));
        } catch (const EvalFault& f) {
            if (f.code() == Code::E101) {
                throw PremaError(Code::E003, std::string("malformed constraint: ") + f.what());
            }
            return fault();
        }
    }

    PVal peval_uncached(int t) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        if (auto d = decided_.find(t); d != decided_.end()) {
            return known(d->second);
        }
        switch (term.op) {
        case TOp::Const:
            if (const auto* i = std::get_if<std::int64_t>(&term.constant); i != nullptr && !c_.int_bounds.contains(*i)) {
                return fault();
            }
            return known(term.constant);
        case TOp::Var: {
            auto vi = static_cast<std::size_t>(term.var);
            if (c_.vars[vi].type.base == BaseType::Real && !leaf_state_->doms[vi].iv.is_point()) {
                return residual_val();
            }
            return known(fixed_value(vi, *leaf_state_));
        }
        case TOp::Not: {
            PVal a = peval(term.a);
            if (a.kind != PKind::Known) {
                return a;
            }
            return known(!std::get<bool>(a.v));
        }
        case TOp::And:
        case TOp::Or: {
            PVal a = peval(term.a);
            if (a.kind != PKind::Known) {
                return a;
            }
            bool av = std::get<bool>(a.v);
            if (term.op == TOp::And ? !av : av) {
                return known(av);
            }
            return peval(term.b);
        }
        case TOp::Ite: {
            PVal a = peval(term.a);
            if (a.kind != PKind::Known) {
                return a;
            }
            PVal r = peval(std::get<bool>(a.v) ? term.b : term.c);
            if (r.kind == PKind::Known && term.type == BaseType::Real) {
                r.v = coerce_to(r.v, Type::real());
            }
            return r;
        }
        case TOp::Neg: {
            PVal a = peval(term.a);
            if (a.kind != PKind::Known) {
                return a;
            }
            Expr shape;
            shape.kind = ExprKind::Unary;
            shape.unary_op = UnaryOp::Neg;
            return apply_concrete(shape, {a.v});
        }
        default: {
            PVal a = peval(term.a);
            PVal b = peval(term.b);
            if (a.kind == PKind::Fault || b.kind == PKind::Fault) {
                return fault();
            }
            if (a.kind == PKind::Residual || b.kind == PKind::Residual) {
                return residual_val();
            }
            Expr shape;
            shape.kind = ExprKind::Binary;
            shape.binary_op = binary_of(term);
            return apply_concrete(shape, {a.v, b.v});
        }
        }
    }

    static BinaryOp binary_of(const Term& t) {
        switch (t.op) {
        case TOp::Add: return BinaryOp::Add;
        case TOp::Sub: return BinaryOp::Sub;
        case TOp::Mul: return BinaryOp::Mul;
        case TOp::Div: return BinaryOp::Div;
        case TOp::Mod: return BinaryOp::Mod;
        default: return t.cmp;
        }
    }

    // First undecided atom in evaluation order, or -1.
    int find_atom(int t) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        if (peval(t).kind != PKind::Residual) {
            return -1;
        }
        switch (term.op) {
        case TOp::Not:
            return find_atom(term.a);
        case TOp::And:
        case TOp::Or: {
            if (peval(term.a).kind == PKind::Residual) {
                return find_atom(term.a);
            }
            return find_atom(term.b);
        }
        case TOp::Ite: {
            PVal c = peval(term.a);
            if (c.kind == PKind::Residual) {
                return find_atom(term.a);
            }
            return find_atom(std::get<bool>(c.v) ? term.b : term.c);
        }
        case TOp::Cmp: {
            int inner = find_atom(term.a);
            if (inner < 0) {
                inner = find_atom(term.b);
            }
            return inner >= 0 ? inner : t;
        }
        case TOp::Var:
        case TOp::Const:
            return -1;
        default: {
            int inner = find_atom(term.a);
            return inner >= 0 ? inner : find_atom(term.b);
        }
        }
    }

    struct NonLinear {};

    Linear linearize(int t) {
        const Term& term = terms_[static_cast<std::size_t>(t)];
        PVal p = peval(t);
        if (p.kind == PKind::Known) {
            Linear l;
            l.k = *as_rational(p.v);
            return l;
        }
        if (p.kind == PKind::Fault) {
            throw NonLinear{};
        }
        switch (term.op) {
        case TOp::Var: {
            Linear l;
            l.coef[term.var] = 1;
            return l;
        }
        case TOp::Neg:
            return scale(linearize(term.a), Rational(-1));
        case TOp::Add:
            return combine(linearize(term.a), linearize(term.b), Rational(1));
        case TOp::Sub:
            return combine(linearize(term.a), linearize(term.b), Rational(-1));
        case TOp::Mul: {
            PVal a = peval(term.a);
            PVal b = peval(term.b);
            if (a.kind == PKind::Known) {
                return scale(linearize(term.b), *as_rational(a.v));
            }
            if (b.kind == PKind::Known) {
                return scale(linearize(term.a), *as_rational(b.v));
            }
            throw NonLinear{};
        }
        case TOp::Div: {
            PVal b = peval(term.b);
            if (b.kind == PKind::Known && *as_rational(b.v) != 0) {
                return scale(linearize(term.a), Rational(1) / *as_rational(b.v));
            }
            throw NonLinear{};
        }
        case TOp::Ite: {
            PVal c = peval(term.a);
            if (c.kind != PKind::Known) {
                throw NonLinear{};
            }
            return linearize(std::get<bool>(c.v) ? term.b : term.c);
        }
        default:
            throw NonLinear{};
        }
    }

    static Linear scale(Linear l, const Rational& f) {
        for (auto it = l.coef.begin(); it != l.coef.end();) {
            it->second *= f;
            it = it->second == 0 ? l.coef.erase(it) : std::next(it);
        }
        l.k *= f;
        return l;
    }

    static Linear combine(Linear a, const Linear& b, const Rational& f) {
        for (const auto& [v, c] : b.coef) {
            a.coef[v] += c * f;
            if (a.coef[v] == 0) {
                a.coef.erase(v);
            }
        }
        a.k += b.k * f;
        return a;
    }

    Outcome residual(std::vector<LinCon> cons) {
        if (++nodes_ > opts_.node_limit) {
            throw Budget{};
        }
        for (int root : roots_) {
            PVal p = peval(root);
            if (p.kind == PKind::Fault || (p.kind == PKind::Known && !std::get<bool>(p.v))) {
                return Outcome::Unsat;
            }
            if (p.kind == PKind::Known) {
                continue;
            }
            int atom = find_atom(root);
            if (atom < 0) {
                return Outcome::Unknown;
            }
            return branch_atom(atom, cons);
        }
        return finish_reals(cons);
    }

    Outcome branch_atom(int atom, const std::vector<LinCon>& cons) {
        const Term& term = terms_[static_cast<std::size_t>(atom)];
        Linear diff;
        try {
            diff = combine(linearize(term.a), linearize(term.b), Rational(-1));
        } catch (const NonLinear&) {
            unknown_reason_ = "nonlinear real arithmetic";
            return Outcome::Unknown;
        }
        bool unknown = false;
        for (bool v : {true, false}) {
            BinaryOp op = v ? term.cmp : negate_comparison(term.cmp);
            std::vector<std::vector<LinCon>> alternatives;
            auto with = [&](LinCon lc) {
                std::vector<LinCon> next = cons;
                next.push_back(std::move(lc));
                alternatives.push_back(std::move(next));
            };
            switch (op) {
            case BinaryOp::Lt: with(LinCon{diff, Rel::Lt}); break;
            case BinaryOp::Le: with(LinCon{diff, Rel::Le}); break;
            case BinaryOp::Gt: with(LinCon{scale(diff, Rational(-1)), Rel::Lt}); break;
            case BinaryOp::Ge: with(LinCon{scale(diff, Rational(-1)), Rel::Le}); break;
            case BinaryOp::Eq: with(LinCon{diff, Rel::Eq}); break;
            case BinaryOp::Ne:
                with(LinCon{diff, Rel::Lt});
                with(LinCon{scale(diff, Rational(-1)), Rel::Lt});
                break;
            default: break;
            }
            for (auto& alt : alternatives) {
                auto saved_decided = decided_;
                auto saved_cache = pcache_;
                decided_[atom] = v;
                pcache_.clear();
                Outcome o = residual(std::move(alt));
                if (o == Outcome::Sat) {
                    return o;
                }
                unknown = unknown || o == Outcome::Unknown;
                decided_ = std::move(saved_decided);
                pcache_ = std::move(saved_cache);
            }
        }
        return unknown ? Outcome::Unknown : Outcome::Unsat;
    }

    static bool constant_ok(const LinCon& c) {
        switch (c.rel) {
        case Rel::Lt: return c.lhs.k < 0;
        case Rel::Le: return c.lhs.k <= 0;
        case Rel::Eq: return c.lhs.k == 0;
        }
        return false;
    }

    Outcome finish_reals(std::vector<LinCon> cons) {
        // Domain bounds of the undecided reals join the system.
        std::vector<int> reals;
        for (std::size_t i = 0; i < c_.vars.size(); ++i) {
            if (c_.vars[i].type.base != BaseType::Real || leaf_state_->doms[i].iv.is_point()) {
                continue;
            }
            reals.push_back(static_cast<int>(i));
            const Interval& iv = leaf_state_->doms[i].iv;
            if (!iv.lo.inf) { // lo - x (<|<=) 0
                Linear l;
                l.coef[static_cast<int>(i)] = -1;
                l.k = iv.lo.v;
                cons.push_back(LinCon{l, iv.lo.open ? Rel::Lt : Rel::Le});
            }
            if (!iv.hi.inf) { // x - hi (<|<=) 0
                Linear l;
                l.coef[static_cast<int>(i)] = 1;
                l.k = -iv.hi.v;
                cons.push_back(LinCon{l, iv.hi.open ? Rel::Lt : Rel::Le});
            }
        }
        auto values = fourier_motzkin(std::move(cons), reals);
        if (!values) {
            return Outcome::Unsat;
        }
        Valuation assignment;
        for (std::size_t i = 0; i < c_.vars.size(); ++i) {
            if (auto it = values->find(static_cast<int>(i)); it != values->end()) {
                assignment.emplace(c_.vars[i].name, it->second);
            } else {
                assignment.emplace(c_.vars[i].name, fixed_value(i, *leaf_state_));
            }
        }
        if (concrete_check(assignment)) {
            return Outcome::Sat;
        }
        unknown_reason_ = "real model failed verification";
        return Outcome::Unknown;
    }

    static Rational preferred_point(const Bound& lo, const Bound& hi) {
        Interval iv;
        iv.lo = lo;
        iv.hi = hi;
        if (iv.contains(Rational(0))) {
            return Rational(0);
        }
        if (!lo.inf) {
            Rational cand = lo.open ? Rational(floor_of(lo.v) + 1) : ceil_of(lo.v);
            if (iv.contains(cand)) {
                return cand;
            }
            return (lo.v + hi.v) / 2;
        }
        return hi.open ? Rational(ceil_of(hi.v) - 1) : floor_of(hi.v);
    }

    // Decides a conjunction of linear constraints over `reals` and returns a
    // witness, eliminating equalities by substitution and inequalities by
    // Fourier-Motzkin from the last variable down.
    static std::optional<std::map<int, Rational>> fourier_motzkin(std::vector<LinCon> cons,
                                                                  const std::vector<int>& reals) {
        std::vector<std::pair<int, Linear>> substitutions; // var = expr
        while (true) {
            auto eq = std::find_if(cons.begin(), cons.end(),
                                   [](const LinCon& c) { return c.rel == Rel::Eq && !c.lhs.coef.empty(); });
            if (eq == cons.end()) {
                break;
            }
            LinCon chosen = *eq;
            cons.erase(eq);
            int v = chosen.lhs.coef.rbegin()->first;
            Rational cv = chosen.lhs.coef.at(v);
            Linear expr = chosen.lhs;
            expr.coef.erase(v);
            expr = scale(expr, Rational(-1) / cv); // v = expr
            for (auto& c : cons) {
                auto it = c.lhs.coef.find(v);
                if (it != c.lhs.coef.end()) {
                    Rational f = it->second;
                    c.lhs.coef.erase(it);
                    c.lhs = combine(c.lhs, expr, f);
                }
            }
            for (auto& [sv, se] : substitutions) {
                auto it = se.coef.find(v);
                if (it != se.coef.end()) {
                    Rational f = it->second;
                    se.coef.erase(it);
                    se = combine(se, expr, f);
                }
            }
            substitutions.emplace_back(v, expr);
        }

        std::set<int> substituted;
        for (const auto& [v, e] : substitutions) {
            substituted.insert(v);
        }
        std::vector<int> order;
        for (int v : reals) {
            if (substituted.count(v) == 0) {
                order.push_back(v);
            }
        }

        std::map<int, std::vector<LinCon>> stage; // constraints whose top var is v
        std::vector<LinCon> current = std::move(cons);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int v = *it;
            std::vector<LinCon> lower;
            std::vector<LinCon> upper;
            std::vector<LinCon> rest;
            for (auto& c : current) {
                auto f = c.lhs.coef.find(v);
                if (f == c.lhs.coef.end()) {
                    rest.push_back(std::move(c));
                } else if (f->second > 0) {
                    upper.push_back(std::move(c));
                } else {
                    lower.push_back(std::move(c));
                }
            }
            auto& saved = stage[v];
            saved.insert(saved.end(), lower.begin(), lower.end());
            saved.insert(saved.end(), upper.begin(), upper.end());
            for (const auto& l : lower) {
                for (const auto& u : upper) {
                    Rational cl = -l.lhs.coef.at(v);
                    Rational cu = u.lhs.coef.at(v);
                    Linear sum = combine(scale(u.lhs, cl), l.lhs, cu);
                    sum.coef.erase(v);
                    Rel rel = (l.rel == Rel::Lt || u.rel == Rel::Lt) ? Rel::Lt : Rel::Le;
                    LinCon nc{sum, rel};
                    if (nc.lhs.coef.empty()) {
                        if (!constant_ok(nc)) {
                            return std::nullopt;
                        }
                        continue;
                    }
                    rest.push_back(std::move(nc));
                }
            }
            current = std::move(rest);
            if (current.size() > 20000) {
                throw Budget{};
            }
        }
        for (const auto& c : current) {
            if (!constant_ok(c)) {
                return std::nullopt;
            }
        }

        std::map<int, Rational> values;
        for (int v : order) {
            Bound lo;
            Bound hi;
            for (const auto& c : stage[v]) {
                Rational cv = c.lhs.coef.at(v);
                Rational rest = c.lhs.k;
                for (const auto& [w, cw] : c.lhs.coef) {
                    if (w != v) {
                        rest += cw * values.at(w);
                    }
                }
                Rational bound = -rest / cv; // cv*x + rest rel 0
                bool open = c.rel == Rel::Lt;
                if (cv > 0) {
                    if (hi.inf || bound < hi.v || (bound == hi.v && open)) {
                        hi = Bound{false, bound, open};
                    }
                } else {
                    if (lo.inf || bound > lo.v || (bound == lo.v && open)) {
                        lo = Bound{false, bound, open};
                    }
                }
            }
            values[v] = preferred_point(lo, hi);
        }
        for (auto it = substitutions.rbegin(); it != substitutions.rend(); ++it) {
            Rational val = it->second.k;
            for (const auto& [w, cw] : it->second.coef) {
                val += cw * values.at(w);
            }
            values[it->first] = val;
        }
        return values;
    }

    const Constraint& c_;
    SolveOptions opts_;
    std::map<std::string, int> var_index_;
    std::map<std::string, int> def_index_;
    std::map<std::string, int> lit_index_;
    std::vector<std::string> lit_names_;
    std::vector<Term> terms_;
    std::vector<int> def_terms_;
    std::map<const Expr*, int> memo_;
    std::vector<int> roots_;
    std::vector<std::vector<int>> watchers_;

    std::vector<AVal> cache_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t generation_ = 1;
    std::vector<int> queue_;
    std::vector<bool> queued_;

    std::uint64_t nodes_ = 0;
    Valuation model_;
    std::string unknown_reason_;

    const State* leaf_state_ = nullptr;
    std::map<int, bool> decided_;
    std::map<int, PVal> pcache_;
};

} // namespace

SolveResult solve(const Constraint& c, const SolveOptions& options) {
    Solver solver(c, options);
    return solver.run();
}

bool check_model(const Constraint& c, const Valuation& model) {
    Solver::LazyEnv env(c, model);
    try {
        for (const auto& e : c.conjuncts) {
            if (!evaluate_bool(*e, env, c.int_bounds)) {
                return false;
            }
        }
    } catch (const EvalFault&) {
        return false;
    }
    return true;
}

} // namespace prema
