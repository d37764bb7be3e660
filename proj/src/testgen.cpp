#include "prema/testgen.hpp"

#include "prema/format.hpp"
#include "prema/simulator.hpp"
#include "prema/solver.hpp"
#include "prema/verifier.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace prema {

using nlohmann::ordered_json;

namespace {

constexpr int kMaxConditions = 24;
constexpr int kExactLimit = 8;
constexpr int kTableLimit = 16;
constexpr int kMaskingLimit = 10;
constexpr std::uint64_t kSearchBudget = 200'000;
constexpr int kGreedyChecks = 128;
constexpr int kProbes = 64;

bool is_connective(const Expr& e) {
    if (e.kind == ExprKind::Unary) {
        return e.unary_op == UnaryOp::Not;
    }
    return e.kind == ExprKind::Binary && (e.binary_op == BinaryOp::And || e.binary_op == BinaryOp::Or);
}

void collect_conditions(const ExprPtr& e, std::vector<ExprPtr>& out, std::set<std::string>& seen) {
    if (e->kind == ExprKind::BoolLit) {
        return;
    }
    if (is_connective(*e)) {
        collect_conditions(e->lhs, out, seen);
        if (e->kind == ExprKind::Binary) {
            collect_conditions(e->rhs, out, seen);
        }
        return;
    }
    if (seen.insert(format_expr(e)).second) {
        out.push_back(e);
    }
}

// Guard compiled over condition indices.
class Formula {
public:
    explicit Formula(const Decision& d) {
        for (std::size_t i = 0; i < d.conditions.size(); ++i) {
            index_[format_expr(d.conditions[i])] = static_cast<int>(i);
        }
        root_ = compile(d.expr);
    }

    [[nodiscard]] bool eval(const std::vector<bool>& vec) const { return eval(root_, vec); }

private:
    enum class Op : std::uint8_t { Atom, Const, Not, And, Or };
    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        int atom = -1;
        bool value = false;
    };

    int compile(const ExprPtr& e) {
        Node n{};
        if (e->kind == ExprKind::BoolLit) {
            n.op = Op::Const;
            n.value = e->bool_value;
        } else if (e->kind == ExprKind::Unary && e->unary_op == UnaryOp::Not) {
            n.op = Op::Not;
            n.a = compile(e->lhs);
        } else if (is_connective(*e)) {
            n.op = e->binary_op == BinaryOp::And ? Op::And : Op::Or;
            n.a = compile(e->lhs);
            n.b = compile(e->rhs);
        } else {
            n.op = Op::Atom;
            n.atom = index_.at(format_expr(e));
        }
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    [[nodiscard]] bool eval(int i, const std::vector<bool>& vec) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case Op::Atom: return vec[static_cast<std::size_t>(n.atom)];
        case Op::Const: return n.value;
        case Op::Not: return !eval(n.a, vec);
        case Op::And: return eval(n.a, vec) && eval(n.b, vec);
        case Op::Or: return eval(n.a, vec) || eval(n.b, vec);
        }
        return false;
    }

    std::map<std::string, int> index_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Vector codes: condition 0 is the most significant bit, a set bit means
// False, so code 0 is all-True and ascending codes follow the T-first table.
std::vector<bool> decode(std::uint32_t code, int n) {
    std::vector<bool> vec(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        vec[static_cast<std::size_t>(i)] = ((code >> (n - 1 - i)) & 1U) == 0;
    }
    return vec;
}

std::uint32_t bit_of(int i, int n) {
    return 1U << (n - 1 - i);
}

struct Candidate {
    std::uint32_t t = 0;
    std::uint32_t f = 0;
};

class PairSearch {
public:
    PairSearch(const Decision& d, const VectorFilter& feasible)
        : formula_(d), n_(static_cast<int>(d.conditions.size())), feasible_(feasible) {}

    PairResult run() {
        PairResult out;
        if (n_ > kMaxConditions) {
            for (int i = 0; i < n_; ++i) {
                out.gaps.push_back(CoverageGap{i, "more than " + std::to_string(kMaxConditions) + " conditions"});
            }
            return out;
        }
        std::vector<std::optional<Candidate>> chosen(static_cast<std::size_t>(n_));
        std::vector<bool> depends(static_cast<std::size_t>(n_), false);
        if (n_ <= kExactLimit) {
            exact(chosen, depends);
        } else if (n_ <= kTableLimit) {
            greedy(chosen, depends);
        } else {
            probe(chosen, depends);
        }
        std::vector<bool> masked(static_cast<std::size_t>(n_), false);
        for (int i = 0; i < n_; ++i) {
            auto iu = static_cast<std::size_t>(i);
            if (chosen[iu] || !depends[iu] || n_ > kMaskingLimit) {
                continue;
            }
            chosen[iu] = masking(i);
            masked[iu] = chosen[iu].has_value();
        }
        for (int i = 0; i < n_; ++i) {
            auto iu = static_cast<std::size_t>(i);
            if (!chosen[iu]) {
                out.gaps.push_back(CoverageGap{i, depends[iu] ? "no feasible pair" : "outcome independent"});
                continue;
            }
            McdcPair p;
            p.condition = i;
            p.vec_true = decode(chosen[iu]->t, n_);
            p.vec_false = decode(chosen[iu]->f, n_);
            p.outcome_true = outcome(chosen[iu]->t);
            p.outcome_false = outcome(chosen[iu]->f);
            p.masking = masked[iu];
            out.pairs.push_back(std::move(p));
        }
        return out;
    }

private:
    bool outcome(std::uint32_t code) {
        auto it = outcomes_.find(code);
        if (it != outcomes_.end()) {
            return it->second;
        }
        bool v = formula_.eval(decode(code, n_));
        outcomes_.emplace(code, v);
        return v;
    }

    bool feasible(std::uint32_t code) {
        if (!feasible_) {
            return true;
        }
        auto it = feasible_cache_.find(code);
        if (it != feasible_cache_.end()) {
            return it->second;
        }
        bool v = feasible_(decode(code, n_));
        feasible_cache_.emplace(code, v);
        return v;
    }

    bool usable(const Candidate& c) { return feasible(c.t) && feasible(c.f); }

    // Unique-cause candidates of condition i at the boolean level, ascending.
    std::vector<Candidate> candidates(int i) {
        std::vector<Candidate> out;
        std::uint32_t bit = bit_of(i, n_);
        std::uint32_t size = 1U << n_;
        for (std::uint32_t t = 0; t < size; ++t) {
            if ((t & bit) == 0 && outcome(t) != outcome(t | bit)) {
                out.push_back(Candidate{t, t | bit});
            }
        }
        return out;
    }

    void exact(std::vector<std::optional<Candidate>>& chosen, std::vector<bool>& depends) {
        std::vector<std::vector<Candidate>> cands(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            auto iu = static_cast<std::size_t>(i);
            for (const Candidate& c : candidates(i)) {
                depends[iu] = true;
                if (usable(c)) {
                    cands[iu].push_back(c);
                }
            }
        }
        greedy_pick(cands, chosen);
        std::size_t bound = selected_size(chosen) + 1;
        std::vector<std::optional<Candidate>> cur(static_cast<std::size_t>(n_));
        std::vector<std::optional<Candidate>> best;
        std::uint64_t nodes = 0;
        std::multiset<std::uint32_t> used;
        std::function<void(int)> dfs = [&](int i) {
            if (++nodes > kSearchBudget) {
                return;
            }
            if (i == n_) {
                std::set<std::uint32_t> distinct(used.begin(), used.end());
                if (distinct.size() < bound) {
                    bound = distinct.size();
                    best = cur;
                }
                return;
            }
            auto iu = static_cast<std::size_t>(i);
            if (cands[iu].empty()) {
                dfs(i + 1);
                return;
            }
            for (const Candidate& c : cands[iu]) {
                used.insert(c.t);
                used.insert(c.f);
                std::set<std::uint32_t> distinct(used.begin(), used.end());
                if (distinct.size() < bound) {
                    cur[iu] = c;
                    dfs(i + 1);
                    cur[iu].reset();
                }
                used.erase(used.find(c.t));
                used.erase(used.find(c.f));
            }
        };
        dfs(0);
        if (!best.empty()) {
            chosen = best;
        }
    }

    static std::size_t selected_size(const std::vector<std::optional<Candidate>>& chosen) {
        std::set<std::uint32_t> s;
        for (const auto& c : chosen) {
            if (c) {
                s.insert(c->t);
                s.insert(c->f);
            }
        }
        return s.size();
    }

    // Prefers candidates that reuse already selected vectors.
    static void greedy_pick(const std::vector<std::vector<Candidate>>& cands,
                            std::vector<std::optional<Candidate>>& chosen) {
        std::set<std::uint32_t> used;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const Candidate* pick = nullptr;
            int best_new = 3;
            for (const Candidate& c : cands[i]) {
                int fresh = static_cast<int>(used.count(c.t) == 0) + static_cast<int>(used.count(c.f) == 0);
                if (fresh < best_new) {
                    best_new = fresh;
                    pick = &c;
                }
            }
            if (pick != nullptr) {
                chosen[i] = *pick;
                used.insert(pick->t);
                used.insert(pick->f);
            }
        }
    }

    void greedy(std::vector<std::optional<Candidate>>& chosen, std::vector<bool>& depends) {
        std::set<std::uint32_t> used;
        for (int i = 0; i < n_; ++i) {
            auto iu = static_cast<std::size_t>(i);
            std::vector<Candidate> cands = candidates(i);
            depends[iu] = !cands.empty();
            auto fresh = [&](const Candidate& c) {
                return static_cast<int>(used.count(c.t) == 0) + static_cast<int>(used.count(c.f) == 0);
            };
            std::stable_sort(cands.begin(), cands.end(),
                             [&](const Candidate& a, const Candidate& b) { return fresh(a) < fresh(b); });
            int checks = 0;
            for (const Candidate& c : cands) {
                if (++checks > kGreedyChecks) {
                    break;
                }
                if (usable(c)) {
                    chosen[iu] = c;
                    used.insert(c.t);
                    used.insert(c.f);
                    break;
                }
            }
        }
    }

    void probe(std::vector<std::optional<Candidate>>& chosen, std::vector<bool>& depends) {
        std::uint32_t all = (1U << n_) - 1;
        std::vector<std::uint32_t> bases{0, all};
        std::mt19937 rng(1);
        std::uniform_int_distribution<std::uint32_t> dist(0, all);
        while (static_cast<int>(bases.size()) < kProbes) {
            bases.push_back(dist(rng));
        }
        for (int i = 0; i < n_; ++i) {
            auto iu = static_cast<std::size_t>(i);
            std::uint32_t bit = bit_of(i, n_);
            for (std::uint32_t b : bases) {
                Candidate c{b & ~bit, b | bit};
                if (outcome(c.t) == outcome(c.f)) {
                    continue;
                }
                depends[iu] = true;
                if (usable(c)) {
                    chosen[iu] = c;
                    break;
                }
            }
        }
    }

    // Condition i alone decides the outcome at both vectors; other
    // conditions may differ between them.
    std::optional<Candidate> masking(int i) {
        std::uint32_t bit = bit_of(i, n_);
        std::uint32_t size = 1U << n_;
        for (std::uint32_t t = 0; t < size; ++t) {
            if ((t & bit) != 0 || outcome(t) == outcome(t | bit) || !feasible(t)) {
                continue;
            }
            for (std::uint32_t f = 0; f < size; ++f) {
                if ((f & bit) == 0 || outcome(f) == outcome(t) || outcome(f) == outcome(f & ~bit)) {
                    continue;
                }
                if (feasible(f)) {
                    return Candidate{t, f};
                }
            }
        }
        return std::nullopt;
    }

    Formula formula_;
    int n_;
    const VectorFilter& feasible_;
    std::map<std::uint32_t, bool> outcomes_;
    std::map<std::uint32_t, bool> feasible_cache_;
};

void walk_decisions(const std::vector<Stmt>& stmts, const std::string& task_id, int& chain,
                    std::vector<Decision>& out) {
    for (const auto& s : stmts) {
        const auto* c = std::get_if<IfChain>(&s.node);
        if (c == nullptr) {
            continue;
        }
        int ordinal = chain++;
        for (std::size_t k = 0; k < c->arms.size(); ++k) {
            Decision d;
            d.task_id = task_id;
            d.index = static_cast<int>(out.size());
            d.chain = ordinal;
            d.arm = static_cast<int>(k);
            d.pos = c->arms[k].pos;
            d.expr = c->arms[k].cond;
            std::set<std::string> seen;
            collect_conditions(d.expr, d.conditions, seen);
            out.push_back(std::move(d));
        }
        for (const auto& arm : c->arms) {
            walk_decisions(arm.body, task_id, chain, out);
        }
        if (c->else_body) {
            walk_decisions(*c->else_body, task_id, chain, out);
        }
    }
}

ExprPtr literal_of(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) {
        return make_bool(*b);
    }
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return make_int(*i);
    }
    if (const auto* r = std::get_if<Rational>(&v)) {
        return make_real(*r);
    }
    return make_name(std::get<EnumValue>(v).literal);
}

// Statement facts the dependency closure needs.
struct AssignSite {
    int seq = 0;
    std::string target;
    ExprPtr value;
    std::vector<ExprPtr> guards; // every arm condition evaluated on the way in
};

struct ChainSite {
    int seq = 0;
    std::vector<ExprPtr> path; // enclosing guards
};

void index_task(const std::vector<Stmt>& stmts, std::vector<ExprPtr>& path, int& seq, std::vector<AssignSite>& assigns,
                std::vector<ChainSite>& chains) {
    for (const auto& s : stmts) {
        int me = seq++;
        if (const auto* a = std::get_if<Assign>(&s.node)) {
            assigns.push_back(AssignSite{me, a->target, a->value, path});
            continue;
        }
        const auto& c = std::get<IfChain>(s.node);
        chains.push_back(ChainSite{me, path});
        std::size_t base = path.size();
        for (const auto& arm : c.arms) {
            path.push_back(arm.cond);
            index_task(arm.body, path, seq, assigns, chains);
        }
        if (c.else_body) {
            index_task(*c.else_body, path, seq, assigns, chains);
        }
        path.resize(base);
    }
}

void add_names(const ExprPtr& e, const Model& model, std::set<std::string>& out) {
    std::vector<const Expr*> names;
    collect_names(e, names);
    for (const Expr* n : names) {
        if (model.dictionary.find(n->name) != nullptr) {
            out.insert(n->name);
        }
    }
}

// Shared per-task state for concretization.
class TaskContext {
public:
    TaskContext(const Model& model, const TaskAst& task)
        : model_(model), task_(task), enc_(encode(model, std::vector<std::string>{task.task_id}, 1)) {
        std::vector<ExprPtr> path;
        int seq = 0;
        index_task(task.stmts, path, seq, assigns_, chains_);
        for (const auto& a : assigns_) {
            if (model.dictionary.find(a.target) != nullptr) {
                task_vars_.insert(a.target);
            }
            add_names(a.value, model, task_vars_);
            for (const auto& g : a.guards) {
                add_names(g, model, task_vars_);
            }
        }
        for (const auto& c : chains_) {
            for (const auto& g : c.path) {
                add_names(g, model, task_vars_);
            }
        }
        for (const auto& d : task.decls) {
            task_vars_.insert(d.name);
        }
        for (const auto& v : enc_.vars) {
            if (task_vars_.count(base_name(v.name)) != 0) {
                base_.vars.push_back(v);
            }
        }
        for (const auto& d : enc_.definitions) {
            if (d.name.rfind("$br", 0) == 0 || task_vars_.count(base_name(d.name)) != 0) {
                base_.definitions.push_back(d);
            }
        }
        base_.int_bounds = model.int_bounds;
    }

    std::optional<TestCase> concretize(const Decision& d, const std::vector<bool>& vec) {
        if (d.chain < 0 || static_cast<std::size_t>(d.chain) >= enc_.branches.size()) {
            throw PremaError(Code::E003, "decision does not belong to task '" + task_.task_id + "'");
        }
        const SsaBranch& br = enc_.branches[static_cast<std::size_t>(d.chain)];
        std::set<std::string> closure = closure_of(d);

        Constraint c = base_;
        c.conjuncts.push_back(make_binary(BinaryOp::Ge, make_name(br.literal), make_int(d.arm)));
        c.conjuncts.push_back(make_binary(BinaryOp::Le, make_name(br.literal), make_int(br.arms + 1)));
        for (std::size_t i = 0; i < d.conditions.size(); ++i) {
            ExprPtr atom = rename_expr(d.conditions[i], br.scope);
            c.conjuncts.push_back(vec[i] ? atom : make_not(atom));
        }
        for (const auto& name : task_vars_) {
            if (closure.count(name) != 0) {
                continue;
            }
            const DictEntry* e = model_.dictionary.find(name);
            std::string ssa = ssa_name(name, e->is_input() ? 1 : 0);
            c.conjuncts.push_back(make_binary(BinaryOp::Eq, make_name(ssa), literal_of(default_value(e->type))));
        }
        SolveOptions so;
        so.eager_definitions = true;
        so.node_limit = kSearchBudget;
        SolveResult r = solve(c, so);
        if (r.status != SolveStatus::Sat) {
            return std::nullopt;
        }
        TestCase tc;
        tc.task_id = d.task_id;
        tc.decision = d.index;
        tc.decision_line = d.pos.line;
        tc.vector = vec;
        tc.expected_outcome = decision_outcome(d, vec);
        for (const auto& e : model_.dictionary.entries) {
            if (closure.count(e.name) == 0) {
                continue;
            }
            if (e.is_input()) {
                tc.inputs[e.name] = r.model.at(ssa_name(e.name, 1));
            } else {
                tc.pre_state[e.name] = r.model.at(ssa_name(e.name, 0));
            }
        }
        return tc;
    }

private:
    static std::string base_name(const std::string& ssa) { return ssa.substr(0, ssa.find('@')); }

    // Variables whose initial values can reach the decision's conditions.
    std::set<std::string> closure_of(const Decision& d) const {
        const ChainSite& site = chains_.at(static_cast<std::size_t>(d.chain));
        std::set<std::string> out;
        for (const auto& g : site.path) {
            add_names(g, model_, out);
        }
        const auto& stmts = chain_arms(d);
        for (int k = 0; k <= d.arm; ++k) {
            add_names(stmts[static_cast<std::size_t>(k)], model_, out);
        }
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& a : assigns_) {
                if (a.seq >= site.seq || out.count(a.target) == 0) {
                    continue;
                }
                std::size_t before = out.size();
                add_names(a.value, model_, out);
                for (const auto& g : a.guards) {
                    add_names(g, model_, out);
                }
                grew = grew || out.size() != before;
            }
        }
        return out;
    }

    std::vector<ExprPtr> chain_arms(const Decision& d) const {
        std::vector<ExprPtr> out;
        int chain = 0;
        std::function<bool(const std::vector<Stmt>&)> find = [&](const std::vector<Stmt>& stmts) {
            for (const auto& s : stmts) {
                const auto* c = std::get_if<IfChain>(&s.node);
                if (c == nullptr) {
                    continue;
                }
                if (chain++ == d.chain) {
                    for (const auto& arm : c->arms) {
                        out.push_back(arm.cond);
                    }
                    return true;
                }
                for (const auto& arm : c->arms) {
                    if (find(arm.body)) {
                        return true;
                    }
                }
                if (c->else_body && find(*c->else_body)) {
                    return true;
                }
            }
            return false;
        };
        find(task_.stmts);
        return out;
    }

    const Model& model_;
    const TaskAst& task_;
    SsaEncoding enc_;
    std::vector<AssignSite> assigns_;
    std::vector<ChainSite> chains_;
    std::set<std::string> task_vars_;
    Constraint base_;
};

std::uint32_t encode_vec(const std::vector<bool>& vec) {
    std::uint32_t code = 0;
    for (bool b : vec) {
        code = (code << 1U) | (b ? 0U : 1U);
    }
    return code;
}

std::string assignments_text(const TestCase& tc, const Model& model) {
    std::ostringstream out;
    bool first = true;
    for (const auto& e : model.dictionary.entries) {
        const Valuation& src = e.is_input() ? tc.inputs : tc.pre_state;
        auto it = src.find(e.name);
        if (it == src.end()) {
            continue;
        }
        out << (first ? "" : ";") << e.name << "=" << value_to_string(it->second);
        first = false;
    }
    return out.str();
}

} // namespace

std::vector<Decision> enumerate_decisions(const TaskAst& task) {
    std::vector<Decision> out;
    int chain = 0;
    walk_decisions(task.stmts, task.task_id, chain, out);
    return out;
}

bool decision_outcome(const Decision& d, const std::vector<bool>& vec) {
    if (vec.size() != d.conditions.size()) {
        throw PremaError(Code::E003, "vector length " + std::to_string(vec.size()) + " does not match " +
                                         std::to_string(d.conditions.size()) + " conditions");
    }
    return Formula(d).eval(vec);
}

PairResult mcdc_pairs(const Decision& d, const VectorFilter& feasible) {
    return PairSearch(d, feasible).run();
}

std::string vector_text(const std::vector<bool>& vec) {
    std::string out;
    for (bool b : vec) {
        out += b ? 'T' : 'F';
    }
    return out;
}

std::optional<TestCase> concretize(const Decision& d, const std::vector<bool>& vec, const Model& model) {
    const TaskAst* task = model.find_task(d.task_id);
    if (task == nullptr) {
        throw PremaError(Code::E003, "unknown task '" + d.task_id + "'");
    }
    TaskContext ctx(model, *task);
    return ctx.concretize(d, vec);
}

TaskCoverage task_coverage(const Model& model, const TaskAst& task) {
    TaskCoverage tc;
    tc.task_id = task.task_id;
    std::vector<Decision> decisions = enumerate_decisions(task);
    tc.decisions = static_cast<int>(decisions.size());
    if (decisions.empty()) {
        return tc;
    }
    TaskContext ctx(model, task);
    for (const Decision& d : decisions) {
        std::map<std::uint32_t, std::optional<TestCase>> solved;
        VectorFilter filter = [&](const std::vector<bool>& vec) {
            auto [it, fresh] = solved.try_emplace(encode_vec(vec));
            if (fresh) {
                it->second = ctx.concretize(d, vec);
            }
            return it->second.has_value();
        };
        PairResult pr = mcdc_pairs(d, filter);
        tc.required += static_cast<int>(d.conditions.size());
        tc.achieved += static_cast<int>(pr.pairs.size());

        std::map<std::uint32_t, std::vector<int>> covers;
        for (const auto& p : pr.pairs) {
            covers[encode_vec(p.vec_true)].push_back(p.condition);
            covers[encode_vec(p.vec_false)].push_back(p.condition);
        }
        int j = 0;
        for (const auto& [code, conds] : covers) {
            auto it = solved.find(code);
            std::optional<TestCase> t =
                it != solved.end() ? it->second : ctx.concretize(d, decode(code, static_cast<int>(d.conditions.size())));
            if (!t) {
                continue;
            }
            t->case_id = "D" + std::to_string(d.index + 1) + "." + std::to_string(++j);
            t->covers = conds;
            tc.cases.push_back(std::move(*t));
        }
        tc.details.push_back(DecisionReport{d, std::move(pr)});
    }
    tc.percent = tc.required == 0 ? 0.0 : 100.0 * tc.achieved / tc.required;
    return tc;
}

double CoverageReport::fraction_at_100() const {
    return tasks_with_decisions == 0 ? 0.0 : static_cast<double>(tasks_at_100) / tasks_with_decisions;
}

std::size_t CoverageReport::case_count() const {
    std::size_t n = 0;
    for (const auto& t : tasks) {
        n += t.cases.size();
    }
    return n;
}

CoverageReport coverage(const Model& model, const std::optional<std::string>& task_id) {
    CoverageReport report;
    if (task_id && model.find_task(*task_id) == nullptr) {
        throw PremaError(Code::E003, "unknown task '" + *task_id + "'");
    }
    for (const auto& task : model.tasks) {
        if (task_id && task.task_id != *task_id) {
            continue;
        }
        TaskCoverage tc = task_coverage(model, task);
        if (tc.decisions == 0) {
            ++report.tasks_without_decisions;
        } else {
            ++report.tasks_with_decisions;
            if (tc.required > 0 && tc.achieved == tc.required) {
                ++report.tasks_at_100;
            }
            if (tc.achieved < tc.required) {
                ++report.tasks_with_gaps;
            }
        }
        report.tasks.push_back(std::move(tc));
    }
    return report;
}

std::string test_cases_csv(const CoverageReport& report, const Model& model) {
    std::ostringstream out;
    out << "task_id,decision_line,case_id,expected_outcome,assignments\n";
    for (const auto& t : report.tasks) {
        for (const auto& c : t.cases) {
            out << c.task_id << "," << c.decision_line << "," << c.case_id << ","
                << (c.expected_outcome ? "True" : "False") << "," << assignments_text(c, model) << "\n";
        }
    }
    return out.str();
}

ordered_json coverage_to_json(const CoverageReport& report, const Model& model) {
    ordered_json out;
    out["schema"] = "prema-coverage/1";
    ordered_json tasks = ordered_json::array();
    ordered_json cases = ordered_json::array();
    for (const auto& t : report.tasks) {
        ordered_json decisions = ordered_json::array();
        for (const auto& dr : t.details) {
            ordered_json conds = ordered_json::array();
            for (const auto& c : dr.decision.conditions) {
                conds.push_back(format_expr(c));
            }
            ordered_json pairs = ordered_json::array();
            for (const auto& p : dr.pairs.pairs) {
                pairs.push_back(ordered_json{{"condition", p.condition},
                                             {"kind", p.masking ? "masking" : "unique-cause"},
                                             {"true_vector", vector_text(p.vec_true)},
                                             {"false_vector", vector_text(p.vec_false)},
                                             {"outcome_true", p.outcome_true},
                                             {"outcome_false", p.outcome_false}});
            }
            ordered_json gaps = ordered_json::array();
            for (const auto& g : dr.pairs.gaps) {
                gaps.push_back(ordered_json{{"condition", g.condition}, {"code", "E401"}, {"reason", g.reason}});
            }
            decisions.push_back(ordered_json{{"index", dr.decision.index},
                                             {"line", dr.decision.pos.line},
                                             {"guard", format_expr(dr.decision.expr)},
                                             {"conditions", std::move(conds)},
                                             {"pairs", std::move(pairs)},
                                             {"gaps", std::move(gaps)}});
        }
        tasks.push_back(ordered_json{{"task_id", t.task_id},
                                     {"decisions", t.decisions},
                                     {"required", t.required},
                                     {"achieved", t.achieved},
                                     {"percent", t.percent},
                                     {"test_cases", t.cases.size()},
                                     {"decision_details", std::move(decisions)}});
        for (const auto& c : t.cases) {
            cases.push_back(ordered_json{{"task_id", c.task_id},
                                         {"decision", c.decision},
                                         {"decision_line", c.decision_line},
                                         {"case_id", c.case_id},
                                         {"covers", c.covers},
                                         {"vector", vector_text(c.vector)},
                                         {"pre_state", valuation_to_json(c.pre_state, model)},
                                         {"inputs", valuation_to_json(c.inputs, model)},
                                         {"expected_outcome", c.expected_outcome}});
        }
    }
    out["tasks"] = std::move(tasks);
    out["aggregate"] = ordered_json{{"tasks_with_decisions", report.tasks_with_decisions},
                                    {"tasks_at_100", report.tasks_at_100},
                                    {"fraction_at_100", report.fraction_at_100()},
                                    {"tasks_without_decisions", report.tasks_without_decisions},
                                    {"tasks_with_gaps", report.tasks_with_gaps},
                                    {"test_cases", report.case_count()}};
    out["cases"] = std::move(cases);
    return out;
}

} // namespace prema
