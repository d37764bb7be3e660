#include "prema/model.hpp"

#include "prema/solver.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>
#include <tuple>

namespace prema {

std::string_view edge_kind_name(EdgeKind k) {
    return k == EdgeKind::SameCycle ? "same_cycle" : "delay";
}

std::string_view edge_tag_name(EdgeTag t) {
    return t == EdgeTag::Rhs ? "rhs" : "guard";
}

const DictEntry* DataDictionary::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries[it->second];
}

DictEntry* DataDictionary::find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries[it->second];
}

std::vector<const DictEntry*> DataDictionary::inputs() const {
    std::vector<const DictEntry*> out;
    for (const auto& e : entries) {
        if (e.is_input()) {
            out.push_back(&e);
        }
    }
    return out;
}

void DataDictionary::add(DictEntry e) {
    index_.emplace(e.name, entries.size());
    entries.push_back(std::move(e));
}

void DataDictionary::index_literals() {
    literals_.clear();
    for (const auto& e : entries) {
        for (const auto& lit : e.type.literals) {
            literals_.insert(lit);
        }
    }
}

const TaskAst* Model::find_task(const std::string& id) const {
    for (const auto& t : tasks) {
        if (t.task_id == id) {
            return &t;
        }
    }
    return nullptr;
}

const StateMachine* Model::find_machine(const std::string& var) const {
    for (const auto& m : machines) {
        if (m.variable == var) {
            return &m;
        }
    }
    return nullptr;
}

std::vector<ExprPtr> flatten_and(const ExprPtr& e) {
    std::vector<ExprPtr> out;
    std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& x) {
        if (x->kind == ExprKind::Binary && x->binary_op == BinaryOp::And) {
            walk(x->lhs);
            walk(x->rhs);
        } else {
            out.push_back(x);
        }
    };
    walk(e);
    return out;
}

namespace {

Diagnostic make_diag(Code code, const TaskAst& task, SourcePos pos, std::string message) {
    Diagnostic d;
    d.code = code;
    d.task_id = task.task_id;
    d.file = task.file;
    d.pos = pos;
    d.message = std::move(message);
    return d;
}

template <typename F>
void for_each_stmt(const std::vector<Stmt>& stmts, F&& f) {
    for (const auto& s : stmts) {
        f(s);
        if (const auto* chain = std::get_if<IfChain>(&s.node)) {
            for (const auto& arm : chain->arms) {
                for_each_stmt(arm.body, f);
            }
            if (chain->else_body) {
                for_each_stmt(*chain->else_body, f);
            }
        }
    }
}

class Builder {
public:
    Builder(std::vector<TaskAst> tasks, const BuildOptions& options) : options_(options) {
        model_.int_bounds = options.int_bounds;
        model_.tasks = std::move(tasks);
        for (std::size_t i = 0; i < model_.tasks.size(); ++i) {
            model_.document_order.push_back(model_.tasks[i].task_id);
            doc_index_[model_.tasks[i].task_id] = i;
        }
    }

    Model run() {
        build_dictionary();
        record_sites();
        build_graph();
        schedule();
        if (options_.extract_machines) {
            model_.machines = extract_state_machines(model_, &model_.diagnostics);
        }
        return std::move(model_);
    }

private:
    void build_dictionary() {
        for (const auto& task : model_.tasks) {
            for (const auto& decl : task.decls) {
                if (const DictEntry* prior = model_.dictionary.find(decl.name)) {
                    Diagnostic d = make_diag(Code::E105, task, decl.pos,
                                             "duplicate declaration of '" + decl.name + "'");
                    d.related.push_back(RelatedLocation{prior->declaring_task, prior->decl_pos, "first declared here"});
                    model_.diagnostics.push_back(std::move(d));
                    continue;
                }
                DictEntry e;
                e.name = decl.name;
                e.type = decl.type;
                e.unit = decl.unit;
                e.role = decl.role;
                e.mode_flag = decl.mode_flag;
                e.declaring_task = task.task_id;
                e.decl_pos = decl.pos;
                model_.dictionary.add(std::move(e));
            }
        }
        model_.dictionary.index_literals();
        for (const auto& e : model_.dictionary.entries) {
            if (model_.dictionary.is_literal(e.name)) {
                const TaskAst* task = model_.find_task(e.declaring_task);
                model_.diagnostics.push_back(make_diag(Code::E105, *task, e.decl_pos,
                                                       "variable '" + e.name + "' clashes with an enum literal"));
            }
        }
        for (const auto& e : model_.dictionary.entries) {
            model_.graph.nodes.push_back(e.name);
        }
    }

    bool poisoned(const ExprPtr& e) const {
        if (e == nullptr || e->kind != ExprKind::Name) {
            return false;
        }
        const DictEntry* entry = model_.dictionary.find(e->name);
        return entry != nullptr && violates_state_rule(*entry);
    }

    // Bare names compared with or assigned to a state variable that already
    // carries E103; they were meant as its literals.
    void literal_operands(const ExprPtr& e, std::set<const Expr*>& out) const {
        if (e == nullptr) {
            return;
        }
        if (e->kind == ExprKind::Binary && (e->binary_op == BinaryOp::Eq || e->binary_op == BinaryOp::Ne)) {
            if (poisoned(e->lhs) && e->rhs->kind == ExprKind::Name) {
                out.insert(e->rhs.get());
            }
            if (poisoned(e->rhs) && e->lhs->kind == ExprKind::Name) {
                out.insert(e->lhs.get());
            }
        }
        literal_operands(e->lhs, out);
        literal_operands(e->rhs, out);
        literal_operands(e->alt, out);
    }

    void record_uses(const TaskAst& task, const ExprPtr& e, const std::string& target = {}) {
        std::vector<const Expr*> names;
        collect_names(e, names);
        std::set<const Expr*> quiet;
        literal_operands(e, quiet);
        const DictEntry* assigned = target.empty() ? nullptr : model_.dictionary.find(target);
        if (assigned != nullptr && violates_state_rule(*assigned) && e->kind == ExprKind::Name) {
            quiet.insert(e.get());
        }
        for (const Expr* n : names) {
            if (DictEntry* entry = model_.dictionary.find(n->name)) {
                entry->use_sites.push_back(Site{task.task_id, n->pos});
            } else if (!model_.dictionary.is_literal(n->name) && quiet.count(n) == 0) {
                model_.diagnostics.push_back(
                    make_diag(Code::E104, task, n->pos, "undeclared variable '" + n->name + "'"));
            }
        }
    }

    void record_sites() {
        for (const auto& task : model_.tasks) {
            for_each_stmt(task.stmts, [&](const Stmt& s) {
                if (const auto* a = std::get_if<Assign>(&s.node)) {
                    DictEntry* entry = model_.dictionary.find(a->target);
                    if (entry == nullptr) {
                        model_.diagnostics.push_back(
                            make_diag(Code::E104, task, s.pos, "assignment to undeclared variable '" + a->target + "'"));
                    } else {
                        entry->def_sites.push_back(Site{task.task_id, s.pos});
                        definers_[a->target].insert(task.task_id);
                        if (entry->is_input()) {
                            model_.diagnostics.push_back(
                                make_diag(Code::E106, task, s.pos, "assignment to input variable '" + a->target + "'"));
                        }
                    }
                    if (a->value) {
                        record_uses(task, a->value, a->target);
                    }
                } else {
                    const auto& chain = std::get<IfChain>(s.node);
                    for (const auto& arm : chain.arms) {
                        if (arm.cond) {
                            record_uses(task, arm.cond);
                        }
                    }
                }
            });
        }
    }

    struct Read {
        std::string name;
        SourcePos pos;
        EdgeKind kind;
        bool cross;
    };

    Read classify(const TaskAst& task, const Expr& n, const std::set<std::string>& defined) const {
        Read r{n.name, n.pos, EdgeKind::Delay, false};
        const DictEntry* e = model_.dictionary.find(n.name);
        if (e->is_input() || defined.count(n.name) != 0) {
            r.kind = EdgeKind::SameCycle;
            return r;
        }
        auto d = definers_.find(n.name);
        if (d != definers_.end()) {
            for (const auto& t : d->second) {
                if (t != task.task_id) {
                    r.kind = EdgeKind::SameCycle;
                    r.cross = true;
                }
            }
        }
        return r;
    }

    std::vector<Read> reads_of(const TaskAst& task, const ExprPtr& e, const std::set<std::string>& defined) const {
        std::vector<Read> out;
        if (!e) {
            return out;
        }
        std::vector<const Expr*> names;
        collect_names(e, names);
        for (const Expr* n : names) {
            if (model_.dictionary.find(n->name) != nullptr) {
                out.push_back(classify(task, *n, defined));
            }
        }
        return out;
    }

    void add_edge(DepEdge e) {
        auto key = std::make_tuple(e.from, e.to, e.kind, e.tag, e.task_id);
        if (seen_edges_.insert(key).second) {
            model_.graph.edges.push_back(std::move(e));
        }
    }

    void visit(const TaskAst& task, const std::vector<Stmt>& stmts, std::vector<std::vector<Read>>& guards,
               std::set<std::string>& defined) {
        for (const auto& s : stmts) {
            if (const auto* a = std::get_if<Assign>(&s.node)) {
                if (model_.dictionary.find(a->target) != nullptr) {
                    for (const auto& g : guards) {
                        for (const auto& r : g) {
                            add_edge(DepEdge{a->target, r.name, r.kind, EdgeTag::Guard, task.task_id, r.pos, r.cross});
                        }
                    }
                    for (const auto& r : reads_of(task, a->value, defined)) {
                        add_edge(DepEdge{a->target, r.name, r.kind, EdgeTag::Rhs, task.task_id, r.pos, r.cross});
                    }
                }
                defined.insert(a->target);
                continue;
            }
            const auto& chain = std::get<IfChain>(s.node);
            std::size_t depth = guards.size();
            for (const auto& arm : chain.arms) {
                guards.push_back(reads_of(task, arm.cond, defined));
                visit(task, arm.body, guards, defined);
            }
            if (chain.else_body) {
                visit(task, *chain.else_body, guards, defined);
            }
            guards.resize(depth);
        }
    }

    void build_graph() {
        for (const auto& task : model_.tasks) {
            std::vector<std::vector<Read>> guards;
            std::set<std::string> defined;
            visit(task, task.stmts, guards, defined);
        }
        for (const auto& e : model_.graph.edges) {
            if (!e.cross_task) {
                continue;
            }
            for (const auto& t : definers_[e.to]) {
                if (t != e.task_id) {
                    model_.task_deps[e.task_id].insert(t);
                }
            }
        }
    }

    // Tarjan's algorithm over tasks in document order.
    std::vector<std::vector<std::string>> strongly_connected() const {
        const auto& ids = model_.document_order;
        std::map<std::string, int> index;
        std::map<std::string, int> low;
        std::set<std::string> on_stack;
        std::vector<std::string> stack;
        std::vector<std::vector<std::string>> sccs;
        int counter = 0;
        std::function<void(const std::string&)> strong = [&](const std::string& v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            on_stack.insert(v);
            auto it = model_.task_deps.find(v);
            if (it != model_.task_deps.end()) {
                for (const auto& w : it->second) {
                    if (index.count(w) == 0) {
                        strong(w);
                        low[v] = std::min(low[v], low[w]);
                    } else if (on_stack.count(w) != 0) {
                        low[v] = std::min(low[v], index[w]);
                    }
                }
            }
            if (low[v] == index[v]) {
                std::vector<std::string> comp;
                std::string w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack.erase(w);
                    comp.push_back(w);
                } while (w != v);
                sccs.push_back(std::move(comp));
            }
        };
        for (const auto& v : ids) {
            if (index.count(v) == 0) {
                strong(v);
            }
        }
        for (auto& c : sccs) {
            std::sort(c.begin(), c.end(), [&](const auto& a, const auto& b) {
                return doc_index_.at(a) < doc_index_.at(b);
            });
        }
        std::sort(sccs.begin(), sccs.end(), [&](const auto& a, const auto& b) {
            return doc_index_.at(a.front()) < doc_index_.at(b.front());
        });
        return sccs;
    }

    // A closed variable path through same-cycle edges inside the component
    // that uses at least one cross-task edge.
    std::optional<std::vector<const DepEdge*>> variable_cycle(const std::set<std::string>& comp) const {
        std::vector<const DepEdge*> inside;
        for (const auto& e : model_.graph.edges) {
            if (e.kind == EdgeKind::SameCycle && comp.count(e.task_id) != 0) {
                inside.push_back(&e);
            }
        }
        for (const DepEdge* start : inside) {
            if (!start->cross_task) {
                continue;
            }
            bool produced_inside = false;
            for (const auto& t : definers_.at(start->to)) {
                produced_inside = produced_inside || (t != start->task_id && comp.count(t) != 0);
            }
            if (!produced_inside) {
                continue;
            }
            std::map<std::string, const DepEdge*> parent;
            std::deque<std::string> queue{start->to};
            std::set<std::string> seen{start->to};
            while (!queue.empty()) {
                std::string v = queue.front();
                queue.pop_front();
                if (v == start->from) {
                    std::vector<const DepEdge*> path;
                    for (std::string cur = v; cur != start->to; cur = parent.at(cur)->from) {
                        path.push_back(parent.at(cur));
                    }
                    std::reverse(path.begin(), path.end());
                    path.insert(path.begin(), start);
                    return path;
                }
                for (const DepEdge* e : inside) {
                    if (e->from == v && seen.insert(e->to).second) {
                        parent[e->to] = e;
                        queue.push_back(e->to);
                    }
                }
            }
        }
        return std::nullopt;
    }

    std::vector<std::string> task_cycle(const std::set<std::string>& comp, const std::string& start) const {
        // DFS for a simple cycle back to `start` using dependencies inside comp.
        std::vector<std::string> path{start};
        std::set<std::string> visited{start};
        std::function<bool(const std::string&)> dfs = [&](const std::string& v) -> bool {
            auto it = model_.task_deps.find(v);
            if (it == model_.task_deps.end()) {
                return false;
            }
            for (const auto& w : it->second) {
                if (comp.count(w) == 0) {
                    continue;
                }
                if (w == start) {
                    path.push_back(w);
                    return true;
                }
                if (visited.insert(w).second) {
                    path.push_back(w);
                    if (dfs(w)) {
                        return true;
                    }
                    path.pop_back();
                }
            }
            return false;
        };
        dfs(start);
        return path;
    }

    void report_cycle(const std::vector<std::string>& comp_list) {
        std::set<std::string> comp(comp_list.begin(), comp_list.end());
        if (auto cycle = variable_cycle(comp)) {
            const DepEdge* first = cycle->front();
            std::string text = first->from;
            for (const DepEdge* e : *cycle) {
                text += " -> " + e->to;
            }
            const TaskAst* task = model_.find_task(first->task_id);
            Diagnostic d = make_diag(Code::E201, *task, first->pos, "circular definition: " + text);
            for (const DepEdge* e : *cycle) {
                d.related.push_back(RelatedLocation{e->task_id, e->pos, e->from + " uses " + e->to});
            }
            model_.diagnostics.push_back(std::move(d));
            return;
        }
        std::vector<std::string> path = task_cycle(comp, comp_list.front());
        std::string text;
        for (const auto& t : path) {
            text += (text.empty() ? "" : " -> ") + t;
        }
        const TaskAst* task = model_.find_task(comp_list.front());
        Diagnostic d = make_diag(Code::E201, *task, SourcePos{}, "circular dependency between tasks: " + text);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            for (const auto& e : model_.graph.edges) {
                if (e.task_id == path[i] && e.cross_task && definers_[e.to].count(path[i + 1]) != 0) {
                    d.related.push_back(RelatedLocation{e.task_id, e.pos, e.from + " uses " + e.to});
                    break;
                }
            }
        }
        model_.diagnostics.push_back(std::move(d));
    }

    void schedule() {
        for (const auto& comp : strongly_connected()) {
            if (comp.size() > 1) {
                model_.schedulable = false;
                report_cycle(comp);
            }
        }
        if (!model_.schedulable) {
            return; // keep document order
        }
        std::vector<std::string> order = kahn(model_.document_order);
        std::vector<TaskAst> scheduled;
        scheduled.reserve(model_.tasks.size());
        for (const auto& id : order) {
            scheduled.push_back(std::move(model_.tasks[doc_index_.at(id)]));
        }
        model_.tasks = std::move(scheduled);
    }

    std::vector<std::string> kahn(const std::vector<std::string>& ids) const {
        return kahn_order(model_.task_deps, doc_index_, ids);
    }

public:
    static std::vector<std::string> kahn_order(const std::map<std::string, std::set<std::string>>& deps,
                                               const std::map<std::string, std::size_t>& doc_index,
                                               const std::vector<std::string>& ids) {
        std::set<std::string> members(ids.begin(), ids.end());
        std::map<std::string, int> indegree;
        std::map<std::string, std::vector<std::string>> dependents;
        for (const auto& id : ids) {
            indegree[id] = 0;
        }
        for (const auto& id : ids) {
            auto it = deps.find(id);
            if (it == deps.end()) {
                continue;
            }
            for (const auto& d : it->second) {
                if (members.count(d) != 0) {
                    ++indegree[id];
                    dependents[d].push_back(id);
                }
            }
        }
        using Item = std::pair<std::size_t, std::string>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
        for (const auto& id : ids) {
            if (indegree[id] == 0) {
                ready.emplace(doc_index.at(id), id);
            }
        }
        std::vector<std::string> order;
        while (!ready.empty()) {
            std::string id = ready.top().second;
            ready.pop();
            order.push_back(id);
            for (const auto& n : dependents[id]) {
                if (--indegree[n] == 0) {
                    ready.emplace(doc_index.at(n), n);
                }
            }
        }
        return order;
    }

private:
    BuildOptions options_;
    Model model_;
    std::map<std::string, std::size_t> doc_index_;
    std::map<std::string, std::set<std::string>> definers_;
    std::set<std::tuple<std::string, std::string, EdgeKind, EdgeTag, std::string>> seen_edges_;
};

// -- state machines ----------------------------------------------------------

bool is_state_literal_eq(const Expr& e, const std::string& var, const Type& type, std::string* literal) {
    if (e.kind != ExprKind::Binary || e.binary_op != BinaryOp::Eq) {
        return false;
    }
    const Expr* l = e.lhs.get();
    const Expr* r = e.rhs.get();
    if (l->kind != ExprKind::Name || r->kind != ExprKind::Name) {
        return false;
    }
    if (r->name == var) {
        std::swap(l, r);
    }
    if (l->name != var || type.literal_index(r->name) < 0) {
        return false;
    }
    *literal = r->name;
    return true;
}

// A state literal `X == L` appearing as a top-level conjunct of `e`.
std::optional<std::string> state_conjunct(const ExprPtr& e, const std::string& var, const Type& type) {
    for (const auto& c : flatten_and(e)) {
        std::string lit;
        if (is_state_literal_eq(*c, var, type, &lit)) {
            return lit;
        }
    }
    return std::nullopt;
}

class Extractor {
public:
    Extractor(const Model& model, Diagnostics* diags) : model_(model), diags_(diags) {}

    std::vector<StateMachine> run() {
        std::vector<StateMachine> out;
        for (const auto& entry : model_.dictionary.entries) {
            bool named = is_state_name(entry.name);
            if (!(named || entry.mode_flag) || entry.type.base != BaseType::Enum) {
                continue;
            }
            StateMachine m;
            m.variable = entry.name;
            m.states = entry.type.literals;
            m.mode = entry.mode_flag && !named;
            for (const auto& id : model_.document_order) {
                const TaskAst* task = model_.find_task(id);
                std::vector<ExprPtr> path;
                walk(*task, task->stmts, entry, path, m);
            }
            out.push_back(std::move(m));
        }
        return out;
    }

private:
    void walk(const TaskAst& task, const std::vector<Stmt>& stmts, const DictEntry& var, std::vector<ExprPtr>& path,
              StateMachine& m) {
        for (const auto& s : stmts) {
            if (const auto* a = std::get_if<Assign>(&s.node)) {
                if (a->target == var.name && a->value) {
                    on_assign(task, s.pos, *a, var, path, m);
                }
                continue;
            }
            const auto& chain = std::get<IfChain>(s.node);
            std::size_t depth = path.size();
            std::vector<ExprPtr> prior;
            for (const auto& arm : chain.arms) {
                if (!arm.cond) {
                    break; // recovered syntax error
                }
                for (const auto& p : prior) {
                    path.push_back(make_not(p));
                }
                for (const auto& c : flatten_and(arm.cond)) {
                    path.push_back(c);
                }
                walk(task, arm.body, var, path, m);
                path.resize(depth);
                prior.push_back(arm.cond);
            }
            if (chain.else_body && prior.size() == chain.arms.size()) {
                for (const auto& p : prior) {
                    path.push_back(make_not(p));
                }
                walk(task, *chain.else_body, var, path, m);
                path.resize(depth);
            }
        }
    }

    void on_assign(const TaskAst& task, SourcePos pos, const Assign& a, const DictEntry& var,
                   const std::vector<ExprPtr>& path, StateMachine& m) {
        const Expr& rhs = *a.value;
        if (rhs.kind != ExprKind::Name || var.type.literal_index(rhs.name) < 0) {
            bool non_literal = rhs.kind != ExprKind::Name || model_.dictionary.find(rhs.name) != nullptr;
            if (diags_ != nullptr && non_literal) {
                Diagnostic d;
                d.code = Code::E107;
                d.task_id = task.task_id;
                d.file = task.file;
                d.pos = pos;
                d.message = "state variable '" + var.name + "' must be assigned one of its literals";
                diags_->push_back(std::move(d));
            }
            return;
        }
        const std::string& to = rhs.name;
        std::optional<std::string> from;
        std::size_t matched = path.size();
        for (std::size_t i = 0; i < path.size(); ++i) {
            std::string lit;
            if (is_state_literal_eq(*path[i], var.name, var.type, &lit)) {
                from = lit;
                matched = i;
                break;
            }
        }
        if (from) {
            std::vector<ExprPtr> rest;
            for (std::size_t i = 0; i < path.size(); ++i) {
                if (i == matched) {
                    continue;
                }
                const Expr& c = *path[i];
                if (c.kind == ExprKind::Unary && c.unary_op == UnaryOp::Not) {
                    auto other = state_conjunct(c.lhs, var.name, var.type);
                    if (other && *other != *from) {
                        continue; // implied by the matched state conjunct
                    }
                    if (other) {
                        // not (X == from and r) reduces to not r under X == from
                        std::vector<ExprPtr> inner;
                        for (const auto& k : flatten_and(c.lhs)) {
                            std::string lit;
                            if (!is_state_literal_eq(*k, var.name, var.type, &lit) || lit != *from) {
                                inner.push_back(k);
                            }
                        }
                        if (!inner.empty()) {
                            rest.push_back(make_not(make_and(inner)));
                            continue;
                        }
                    }
                }
                rest.push_back(path[i]);
            }
            ExprPtr guard = rest.empty() ? make_bool(true) : make_and(rest);
            std::vector<ExprPtr> check = rest;
            check.push_back(path[matched]);
            if (feasible(check)) {
                m.transitions.push_back(Transition{*from, to, guard, task.task_id, pos});
            }
            return;
        }
        ExprPtr guard = path.empty() ? make_bool(true) : make_and(path);
        for (const auto& s : var.type.literals) {
            std::vector<ExprPtr> check = path;
            check.push_back(make_binary(BinaryOp::Eq, make_name(var.name), make_name(s)));
            if (feasible(check)) {
                m.transitions.push_back(Transition{s, to, guard, task.task_id, pos});
            }
        }
    }

    // Unknown and ill-typed guards are kept.
    bool feasible(const std::vector<ExprPtr>& conjuncts) const {
        Constraint c;
        c.int_bounds = model_.int_bounds;
        std::set<std::string> seen;
        for (const auto& e : conjuncts) {
            std::vector<const Expr*> names;
            collect_names(e, names);
            for (const Expr* n : names) {
                const DictEntry* entry = model_.dictionary.find(n->name);
                if (entry != nullptr) {
                    if (seen.insert(n->name).second) {
                        c.vars.push_back(SolverVar{n->name, entry->type, std::nullopt});
                    }
                } else if (!model_.dictionary.is_literal(n->name)) {
                    return true;
                }
            }
            c.conjuncts.push_back(e);
        }
        try {
            SolveOptions opts;
            opts.node_limit = 200'000;
            return solve(c, opts).status != SolveStatus::Unsat;
        } catch (const PremaError&) {
            return true;
        }
    }

    const Model& model_;
    Diagnostics* diags_;
};

} // namespace

Model build_model(std::vector<TaskAst> tasks, const BuildOptions& options) {
    Builder builder(std::move(tasks), options);
    return builder.run();
}

std::vector<StateMachine> extract_state_machines(const Model& model, Diagnostics* diagnostics) {
    Extractor extractor(model, diagnostics);
    return extractor.run();
}

Slice key_variable_slice(const Model& model, const std::string& key, int depth) {
    if (model.dictionary.find(key) == nullptr) {
        throw PremaError(Code::E104, "unknown variable '" + key + "'");
    }
    auto side = [&](bool forward) {
        SliceSide out;
        std::set<std::tuple<std::string, std::string, EdgeKind>> seen_edges;
        std::set<std::string> seen{key};
        std::vector<std::string> frontier{key};
        for (int level = 0; !frontier.empty() && (depth <= 0 || level < depth); ++level) {
            std::vector<std::string> next;
            for (const auto& v : frontier) {
                for (const auto& e : model.graph.edges) {
                    const std::string& here = forward ? e.from : e.to;
                    const std::string& there = forward ? e.to : e.from;
                    if (here != v) {
                        continue;
                    }
                    if (seen_edges.emplace(e.from, e.to, e.kind).second) {
                        DepEdge copy = e;
                        out.edges.push_back(std::move(copy));
                    }
                    if (seen.insert(there).second) {
                        out.nodes.push_back(there);
                        next.push_back(there);
                    }
                }
            }
            frontier = std::move(next);
        }
        return out;
    };
    Slice s;
    s.key = key;
    s.used_by_key = side(true);
    s.uses_key = side(false);
    return s;
}

bool is_state_name(const std::string& name) {
    return name.size() >= 5 && name.compare(name.size() - 5, 5, "State") == 0;
}

bool violates_state_rule(const DictEntry& e) {
    return (is_state_name(e.name) || e.mode_flag) && e.type.base != BaseType::Enum;
}

std::vector<std::string> resolve_selection(const Model& model, const std::vector<std::string>& patterns) {
    std::vector<std::string> out;
    std::set<std::string> taken;
    for (const auto& pattern : patterns) {
        std::string p = pattern;
        while (p.size() > 1 && p.back() == '/') {
            p.pop_back();
        }
        bool any = false;
        for (const auto& id : model.document_order) {
            bool match = id == p || id.rfind(p + "/", 0) == 0;
            if (match) {
                any = true;
                if (taken.insert(id).second) {
                    out.push_back(id);
                }
            }
        }
        if (!any) {
            throw PremaError(Code::E003, "unknown task '" + pattern + "'");
        }
    }
    return out;
}

std::vector<const TaskAst*> schedule_subset(const Model& model, const std::vector<std::string>& selection) {
    std::map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < model.document_order.size(); ++i) {
        doc_index[model.document_order[i]] = i;
    }
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& id : selection) {
        if (doc_index.count(id) == 0) {
            throw PremaError(Code::E003, "unknown task '" + id + "'");
        }
        if (seen.insert(id).second) {
            ids.push_back(id);
        }
    }
    std::sort(ids.begin(), ids.end(), [&](const auto& a, const auto& b) { return doc_index[a] < doc_index[b]; });
    std::vector<std::string> order = Builder::kahn_order(model.task_deps, doc_index, ids);
    if (order.size() != ids.size()) {
        throw PremaError(Code::E201, "selected tasks have a circular same-cycle dependency");
    }
    std::vector<const TaskAst*> out;
    for (const auto& id : order) {
        out.push_back(model.find_task(id));
    }
    return out;
}

} // namespace prema
