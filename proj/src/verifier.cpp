#include "prema/verifier.hpp"

#include "prema/analysis.hpp"
#include "prema/eval.hpp"
#include "prema/format.hpp"
#include "prema/parser.hpp"

#include <set>

namespace prema {

using nlohmann::ordered_json;

std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Valid: return "VALID";
    case Verdict::Counterexample: return "COUNTEREXAMPLE";
    case Verdict::Unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

std::string ssa_name(const std::string& var, int cycle) {
    return var + "@" + std::to_string(cycle);
}

ExprPtr rename_expr(const ExprPtr& e, const std::map<std::string, std::string>& scope) {
    switch (e->kind) {
    case ExprKind::Name: {
        auto it = scope.find(e->name);
        if (it == scope.end()) {
            return e; // enum literal
        }
        return make_name(it->second, e->pos);
    }
    case ExprKind::Unary:
        return make_unary(e->unary_op, rename_expr(e->lhs, scope), e->pos);
    case ExprKind::Binary:
        return make_binary(e->binary_op, rename_expr(e->lhs, scope), rename_expr(e->rhs, scope), e->pos);
    case ExprKind::Ite:
        return make_ite(rename_expr(e->lhs, scope), rename_expr(e->rhs, scope), rename_expr(e->alt, scope), e->pos);
    default:
        return e;
    }
}

namespace {

ExprPtr conj(const ExprPtr& a, const ExprPtr& b) {
    if (!a) {
        return b;
    }
    return make_binary(BinaryOp::And, a, b);
}

class Encoder {
public:
    Encoder(const Model& model, SsaEncoding& enc) : model_(model), enc_(enc) {}

    void run(const std::vector<const TaskAst*>& schedule) {
        for (const auto& e : model_.dictionary.entries) {
            if (!e.is_input()) {
                std::string n = ssa_name(e.name, 0);
                enc_.vars.push_back(SolverVar{n, e.type, std::nullopt});
                cur_[e.name] = n;
                enc_.initial[e.name] = n;
            }
        }
        for (int c = 1; c <= enc_.depth; ++c) {
            cycle_ = c;
            versions_.clear();
            branch_count_ = 0;
            for (const auto& e : model_.dictionary.entries) {
                if (e.is_input()) {
                    std::string n = ssa_name(e.name, c);
                    enc_.vars.push_back(SolverVar{n, e.type, std::nullopt});
                    cur_[e.name] = n;
                    if (c == 1) {
                        enc_.initial[e.name] = n;
                    }
                }
            }
            for (const TaskAst* task : schedule) {
                task_ = task;
                stmts(task->stmts, nullptr);
            }
            for (const auto& e : model_.dictionary.entries) {
                if (!e.is_input()) {
                    std::string n = ssa_name(e.name, c);
                    enc_.definitions.push_back(Definition{n, e.type, make_name(cur_[e.name])});
                    cur_[e.name] = n;
                }
            }
        }
        for (const auto& e : model_.dictionary.entries) {
            enc_.final[e.name] = cur_[e.name];
        }
    }

    ExprPtr rename(const ExprPtr& e) const { return rename_expr(e, cur_); }

private:
    void targets(const ExprPtr& e, const ExprPtr& ctx) {
        switch (e->kind) {
        case ExprKind::Unary:
            targets(e->lhs, ctx);
            return;
        case ExprKind::Ite: {
            targets(e->lhs, ctx);
            ExprPtr c = rename(e->lhs);
            targets(e->rhs, conj(ctx, c));
            targets(e->alt, conj(ctx, make_not(c)));
            return;
        }
        case ExprKind::Binary:
            break;
        default:
            return;
        }
        targets(e->lhs, ctx);
        if (e->binary_op == BinaryOp::And) {
            targets(e->rhs, conj(ctx, rename(e->lhs)));
            return;
        }
        if (e->binary_op == BinaryOp::Or) {
            targets(e->rhs, conj(ctx, make_not(rename(e->lhs))));
            return;
        }
        targets(e->rhs, ctx);
        if (e->binary_op == BinaryOp::Div || e->binary_op == BinaryOp::Mod) {
            ExprPtr zero = make_binary(BinaryOp::Eq, rename(e->rhs), make_int(0));
            enc_.div_targets.push_back(DivTarget{task_->task_id, e->pos, cycle_, format_expr(e), conj(ctx, zero)});
        }
    }

    void stmts(const std::vector<Stmt>& list, const ExprPtr& pc) {
        for (const auto& s : list) {
            if (const auto* a = std::get_if<Assign>(&s.node)) {
                const DictEntry* entry = model_.dictionary.find(a->target);
                if (entry == nullptr || entry->is_input()) {
                    continue;
                }
                targets(a->value, pc);
                ExprPtr rhs = rename(a->value);
                std::string name = a->target + "@" + std::to_string(cycle_) + "." + std::to_string(++versions_[a->target]);
                ExprPtr value = pc ? make_ite(pc, rhs, make_name(cur_[a->target])) : rhs;
                enc_.definitions.push_back(Definition{name, entry->type, value});
                cur_[a->target] = name;
                continue;
            }
            const auto& chain = std::get<IfChain>(s.node);
            int n = static_cast<int>(chain.arms.size());
            std::vector<ExprPtr> guards;
            ExprPtr ctx = pc;
            for (const auto& arm : chain.arms) {
                targets(arm.cond, ctx);
                guards.push_back(rename(arm.cond));
                ctx = conj(ctx, make_not(guards.back()));
            }
            ExprPtr inner = make_int(chain.else_body ? n : n + 1);
            for (int i = n - 1; i >= 0; --i) {
                inner = make_ite(guards[static_cast<std::size_t>(i)], make_int(i), inner);
            }
            ExprPtr value = pc ? make_ite(pc, inner, make_int(n + 2)) : inner;
            std::string lit = "$br" + std::to_string(cycle_) + "." + std::to_string(++branch_count_);
            enc_.definitions.push_back(Definition{lit, Type::integer(), value});
            enc_.branches.push_back(SsaBranch{lit, n, cycle_, task_->task_id, s.pos, guards, cur_});
            for (int i = 0; i < n; ++i) {
                ExprPtr arm_pc = make_binary(BinaryOp::Eq, make_name(lit), make_int(i));
                stmts(chain.arms[static_cast<std::size_t>(i)].body, arm_pc);
            }
            if (chain.else_body) {
                stmts(*chain.else_body, make_binary(BinaryOp::Eq, make_name(lit), make_int(n)));
            }
        }
    }

    const Model& model_;
    SsaEncoding& enc_;
    std::map<std::string, std::string> cur_;
    std::map<std::string, int> versions_;
    int cycle_ = 0;
    int branch_count_ = 0;
    const TaskAst* task_ = nullptr;
};

int decode_arm(std::int64_t code, int arms) {
    if (code == arms + 1) {
        return -1;
    }
    return static_cast<int>(code);
}

struct Partial {
    Valuation values;
    std::optional<EvalFault> fault;
};

Partial evaluate_partial(const SsaEncoding& enc, const Valuation& pre, const std::vector<Valuation>& inputs,
                         const IntBounds& bounds, const Model* model) {
    Partial p;
    for (const auto& v : enc.vars) {
        auto at = v.name.rfind('@');
        std::string base = v.name.substr(0, at);
        int cycle = std::stoi(v.name.substr(at + 1));
        const Valuation& src = cycle == 0 ? pre : inputs.at(static_cast<std::size_t>(cycle - 1));
        auto it = src.find(base);
        if (it == src.end()) {
            if (model == nullptr) {
                throw PremaError(Code::E003, "no value for '" + base + "'");
            }
            const DictEntry* e = model->dictionary.find(base);
            p.values[v.name] = default_value(e->type);
        } else {
            p.values[v.name] = coerce_to(it->second, v.type);
        }
    }
    MapEnv env(p.values);
    for (const auto& d : enc.definitions) {
        try {
            p.values[d.name] = coerce_to(evaluate(*d.value, env, bounds), d.type);
        } catch (const EvalFault& f) {
            p.fault = f;
            break;
        }
    }
    return p;
}

std::vector<PathStep> path_from(const SsaEncoding& enc, const Valuation& values) {
    std::vector<PathStep> out;
    for (const auto& b : enc.branches) {
        auto it = values.find(b.literal);
        if (it == values.end()) {
            break;
        }
        auto code = std::get<std::int64_t>(it->second);
        int n = b.arms;
        if (code == n + 2) {
            continue;
        }
        out.push_back(PathStep{b.cycle, b.task_id, b.pos, decode_arm(code, n)});
    }
    return out;
}

ExprPtr parse_property(const std::string& text, const Model& model, const char* what) {
    ExprParseResult r = parse_expression(text, true);
    if (!r.expr || has_errors(r.diagnostics)) {
        std::string msg = r.diagnostics.empty() ? "malformed expression" : r.diagnostics.front().message;
        throw PremaError(Code::E001, std::string(what) + ": " + msg);
    }
    std::vector<const Expr*> names;
    collect_names(r.expr, names);
    for (const Expr* n : names) {
        if (model.dictionary.find(n->name) == nullptr && !model.dictionary.is_literal(n->name)) {
            throw PremaError(Code::E104, std::string(what) + ": unknown variable '" + n->name + "'");
        }
    }
    Diagnostics diags;
    ExprType t = infer_type(*r.expr, model.dictionary, &diags, nullptr);
    if (!diags.empty()) {
        throw PremaError(Code::E101, std::string(what) + ": " + diags.front().message);
    }
    if (t.kind != ExprType::Kind::Bool) {
        throw PremaError(Code::E101, std::string(what) + " must be bool, found " + type_text(t));
    }
    return r.expr;
}

ExprPtr rename_property(const ExprPtr& e, const SsaEncoding& enc) {
    switch (e->kind) {
    case ExprKind::Name: {
        const auto& table = e->primed ? enc.final : enc.initial;
        auto it = table.find(e->name);
        return it == table.end() ? make_name(e->name, e->pos) : make_name(it->second, e->pos);
    }
    case ExprKind::Unary:
        return make_unary(e->unary_op, rename_property(e->lhs, enc), e->pos);
    case ExprKind::Binary:
        return make_binary(e->binary_op, rename_property(e->lhs, enc), rename_property(e->rhs, enc), e->pos);
    case ExprKind::Ite:
        return make_ite(rename_property(e->lhs, enc), rename_property(e->rhs, enc), rename_property(e->alt, enc),
                        e->pos);
    default:
        return e;
    }
}

Counterexample extract(const Model& model, const SsaEncoding& enc, const Valuation& values) {
    Counterexample cex;
    for (const auto& e : model.dictionary.entries) {
        if (!e.is_input()) {
            cex.pre_state[e.name] = values.at(ssa_name(e.name, 0));
        }
    }
    for (int c = 1; c <= enc.depth; ++c) {
        Valuation row;
        for (const auto& e : model.dictionary.entries) {
            if (e.is_input()) {
                row[e.name] = values.at(ssa_name(e.name, c));
            }
        }
        cex.inputs.push_back(std::move(row));
    }
    return cex;
}

SsaEncoding encode_for(const Model& model, const VerifyOptions& options) {
    return encode(model, options.selection, options.depth);
}

} // namespace

SsaEncoding encode(const Model& model, const std::optional<std::vector<std::string>>& selection, int depth) {
    if (depth < 1) {
        throw PremaError(Code::E003, "depth must be at least 1");
    }
    std::vector<const TaskAst*> schedule;
    if (selection) {
        schedule = schedule_subset(model, *selection);
    } else {
        if (!model.schedulable) {
            throw PremaError(Code::E201, "the task schedule has a circular same-cycle dependency");
        }
        for (const auto& t : model.tasks) {
            schedule.push_back(&t);
        }
    }
    SsaEncoding enc;
    enc.depth = depth;
    for (const TaskAst* t : schedule) {
        enc.selection.push_back(t->task_id);
    }
    Encoder encoder(model, enc);
    encoder.run(schedule);
    return enc;
}

Valuation evaluate_encoding(const SsaEncoding& enc, const Valuation& pre, const std::vector<Valuation>& inputs,
                            const IntBounds& bounds) {
    Partial p = evaluate_partial(enc, pre, inputs, bounds, nullptr);
    if (p.fault) {
        throw *p.fault;
    }
    return p.values;
}

Valuation final_state(const SsaEncoding& enc, const Valuation& evaluated) {
    Valuation out;
    for (const auto& [var, name] : enc.final) {
        auto it = evaluated.find(name);
        if (it != evaluated.end()) {
            out[var] = it->second;
        }
    }
    return out;
}

namespace {

struct PropertyQuery {
    ExprPtr prop;
    ExprPtr assume;
    SsaEncoding enc;
    Constraint constraint; // assumption and not property
};

PropertyQuery property_query(const Model& model, const std::string& property, const std::string& assumption,
                             const VerifyOptions& options) {
    PropertyQuery q;
    q.prop = parse_property(property, model, "property");
    if (!assumption.empty()) {
        q.assume = parse_property(assumption, model, "assumption");
    }
    q.enc = encode_for(model, options);
    Constraint& c = q.constraint;
    c.vars = q.enc.vars;
    c.definitions = q.enc.definitions;
    c.int_bounds = model.int_bounds;
    if (q.assume) {
        c.conjuncts.push_back(rename_property(q.assume, q.enc));
    }
    c.conjuncts.push_back(make_not(rename_property(q.prop, q.enc)));
    return q;
}

} // namespace

std::string property_smtlib(const Model& model, const std::string& property, const std::string& assumption,
                            const VerifyOptions& options) {
    return export_smtlib(property_query(model, property, assumption, options).constraint, true);
}

VerifyResult verify(const Model& model, const std::string& property, const std::string& assumption,
                    const VerifyOptions& options) {
    PropertyQuery q = property_query(model, property, assumption, options);
    const SsaEncoding& enc = q.enc;
    const Constraint& c = q.constraint;
    VerifyResult result;
    result.property = format_expr(q.prop);
    result.assumption = q.assume ? format_expr(q.assume) : "";
    result.depth = enc.depth;
    result.selection = enc.selection;

    SolveOptions so;
    so.eager_definitions = true;
    so.node_limit = options.node_limit;
    SolveResult r = solve(c, so);
    switch (r.status) {
    case SolveStatus::Unsat:
        result.verdict = Verdict::Valid;
        break;
    case SolveStatus::Unknown:
        result.verdict = Verdict::Unknown;
        result.reason = r.reason;
        result.smtlib = r.smtlib;
        break;
    case SolveStatus::Sat: {
        result.verdict = Verdict::Counterexample;
        Counterexample cex = extract(model, enc, r.model);
        cex.error_path = path_from(enc, r.model);
        cex.violated_property = result.property;
        result.counterexample = std::move(cex);
        break;
    }
    }
    return result;
}

VerifyResult check_runtime_safety(const Model& model, const VerifyOptions& options) {
    SsaEncoding enc = encode_for(model, options);
    VerifyResult result;
    result.property = "no division or modulo by zero";
    result.depth = enc.depth;
    result.selection = enc.selection;
    if (enc.div_targets.empty()) {
        result.verdict = Verdict::Valid;
        return result;
    }
    std::vector<ExprPtr> conds;
    for (const auto& t : enc.div_targets) {
        conds.push_back(t.condition);
    }
    Constraint c;
    c.vars = enc.vars;
    c.definitions = enc.definitions;
    c.int_bounds = model.int_bounds;
    c.conjuncts.push_back(make_or(conds));
    SolveOptions so;
    so.eager_definitions = false;
    so.node_limit = options.node_limit;
    SolveResult r = solve(c, so);
    switch (r.status) {
    case SolveStatus::Unsat:
        result.verdict = Verdict::Valid;
        break;
    case SolveStatus::Unknown:
        result.verdict = Verdict::Unknown;
        result.reason = r.reason;
        result.smtlib = r.smtlib;
        break;
    case SolveStatus::Sat: {
        result.verdict = Verdict::Counterexample;
        Counterexample cex = extract(model, enc, r.model);
        Partial p = evaluate_partial(enc, cex.pre_state, cex.inputs, model.int_bounds, &model);
        cex.error_path = path_from(enc, p.values);
        MapEnv env(p.values);
        for (const auto& t : enc.div_targets) {
            try {
                if (evaluate_bool(*t.condition, env, model.int_bounds)) {
                    cex.fault_site = t;
                    break;
                }
            } catch (const EvalFault&) {
                continue;
            }
        }
        cex.violated_property = cex.fault_site ? "divisor of '" + cex.fault_site->text + "' is zero" : result.property;
        result.counterexample = std::move(cex);
        break;
    }
    }
    return result;
}

namespace {

class PropertyEnv final : public Env {
public:
    PropertyEnv(const Model& model, const Valuation& pre, const Valuation* first_inputs, const Valuation& post)
        : model_(model), pre_(pre), first_(first_inputs), post_(post) {}

    const Value* lookup(const std::string& name, bool primed) const override {
        const DictEntry* e = model_.dictionary.find(name);
        if (e == nullptr) {
            return nullptr;
        }
        const Valuation* src = primed ? &post_ : (e->is_input() && first_ != nullptr ? first_ : &pre_);
        auto it = src->find(name);
        return it == src->end() ? nullptr : &it->second;
    }

private:
    const Model& model_;
    const Valuation& pre_;
    const Valuation* first_;
    const Valuation& post_;
};

} // namespace

bool evaluate_property(const Expr& property, const Model& model, const Valuation& pre,
                       const std::vector<Valuation>& inputs, const Valuation& post) {
    PropertyEnv env(model, pre, inputs.empty() ? nullptr : &inputs.front(), post);
    return evaluate_bool(property, env, model.int_bounds);
}

std::vector<PathStep> path_of(const std::vector<BranchEvent>& events) {
    std::vector<PathStep> out;
    for (const auto& e : events) {
        out.push_back(PathStep{e.cycle, e.task_id, e.pos, e.arm});
    }
    return out;
}

ordered_json verify_to_json(const VerifyResult& r, const Model& model) {
    ordered_json out;
    out["schema"] = "prema-verify/1";
    out["verdict"] = std::string(verdict_name(r.verdict));
    out["property"] = r.property;
    if (!r.assumption.empty()) {
        out["assumption"] = r.assumption;
    }
    out["depth"] = r.depth;
    out["selection"] = r.selection;
    if (r.counterexample) {
        const Counterexample& c = *r.counterexample;
        ordered_json cex;
        cex["pre_state"] = valuation_to_json(c.pre_state, model);
        ordered_json inputs = ordered_json::array();
        for (const auto& row : c.inputs) {
            inputs.push_back(valuation_to_json(row, model));
        }
        cex["inputs"] = std::move(inputs);
        ordered_json path = ordered_json::array();
        for (const auto& s : c.error_path) {
            path.push_back(ordered_json{{"cycle", s.cycle}, {"task", s.task_id}, {"line", s.pos.line}, {"arm", s.arm}});
        }
        cex["error_path"] = std::move(path);
        cex["violated_property"] = c.violated_property;
        if (c.fault_site) {
            cex["fault_site"] = ordered_json{{"task", c.fault_site->task_id},
                                             {"line", c.fault_site->pos.line},
                                             {"col", c.fault_site->pos.col},
                                             {"cycle", c.fault_site->cycle},
                                             {"expression", c.fault_site->text}};
        }
        out["counterexample"] = std::move(cex);
    }
    if (r.verdict == Verdict::Unknown) {
        out["reason"] = r.reason;
        out["smtlib"] = r.smtlib;
    }
    return out;
}

} // namespace prema
