#include "prema/simulator.hpp"

#include "prema/eval.hpp"

#include <set>
#include <sstream>

namespace prema {

using nlohmann::ordered_json;

Valuation init_state(const Model& model) {
    Valuation v;
    for (const auto& e : model.dictionary.entries) {
        v.emplace(e.name, default_value(e.type));
    }
    return v;
}

Simulator::Simulator(const Model& model) : model_(model) {
    for (const auto& t : model.tasks) {
        schedule_.push_back(&t);
    }
    for (const auto& m : model.machines) {
        machines_.emplace(m.variable, &m);
    }
    for (const DictEntry* e : model.dictionary.inputs()) {
        required_.insert(e->name);
    }
}

Simulator::Simulator(const Model& model, const std::vector<std::string>& selection)
    : model_(model), schedule_(schedule_subset(model, selection)) {
    for (const auto& m : model.machines) {
        machines_.emplace(m.variable, &m);
    }
    std::set<std::string> ids;
    for (const TaskAst* t : schedule_) {
        ids.insert(t->task_id);
    }
    for (const DictEntry* e : model.dictionary.inputs()) {
        for (const Site& s : e->use_sites) {
            if (ids.count(s.task_id) != 0) {
                required_.insert(e->name);
                break;
            }
        }
    }
}

Valuation Simulator::init_state() const {
    return prema::init_state(model_);
}

void Simulator::check_inputs(const Valuation& inputs) const {
    for (const auto& [name, value] : inputs) {
        const DictEntry* e = model_.dictionary.find(name);
        if (e == nullptr || !e->is_input()) {
            throw PremaError(Code::E003, "'" + name + "' is not an input variable");
        }
    }
    for (const auto& name : required_) {
        if (inputs.count(name) == 0) {
            throw PremaError(Code::E003, "missing input '" + name + "'");
        }
    }
}

namespace {

class Executor {
public:
    Executor(const Model& model, const std::map<std::string, const StateMachine*>& machines, Valuation& cur,
             StepResult& result, int cycle)
        : model_(model), machines_(machines), cur_(cur), result_(result), cycle_(cycle), env_(cur) {}

    void run(const TaskAst& task) {
        task_ = &task;
        exec(task.stmts);
    }

private:
    void exec(const std::vector<Stmt>& stmts) {
        for (const auto& s : stmts) {
            if (const auto* a = std::get_if<Assign>(&s.node)) {
                assign(s, *a);
                continue;
            }
            const auto& chain = std::get<IfChain>(s.node);
            int taken = -1;
            for (std::size_t i = 0; i < chain.arms.size(); ++i) {
                if (evaluate_bool(*chain.arms[i].cond, env_, model_.int_bounds)) {
                    taken = static_cast<int>(i);
                    break;
                }
            }
            if (taken < 0 && chain.else_body) {
                taken = static_cast<int>(chain.arms.size());
            }
            result_.branches.push_back(BranchEvent{cycle_, task_->task_id, s.pos, taken});
            if (taken >= 0 && taken < static_cast<int>(chain.arms.size())) {
                exec(chain.arms[static_cast<std::size_t>(taken)].body);
            } else if (taken >= 0) {
                exec(*chain.else_body);
            }
        }
    }

    void assign(const Stmt& s, const Assign& a) {
        const DictEntry* entry = model_.dictionary.find(a.target);
        Value v = evaluate(*a.value, env_, model_.int_bounds);
        if (entry == nullptr) {
            return;
        }
        v = coerce_to(v, entry->type);
        auto it = cur_.find(a.target);
        if (machines_.count(a.target) != 0 && it != cur_.end() && !values_equal(it->second, v)) {
            result_.fired.push_back(FiredTransition{a.target, value_to_string(it->second), value_to_string(v),
                                                    task_->task_id, s.pos});
        }
        cur_[a.target] = std::move(v);
    }

    const Model& model_;
    const std::map<std::string, const StateMachine*>& machines_;
    Valuation& cur_;
    StepResult& result_;
    int cycle_;
    MapEnv env_;
    const TaskAst* task_ = nullptr;
};

} // namespace

StepResult Simulator::step(const Valuation& pre, const Valuation& inputs, int cycle) const {
    check_inputs(inputs);
    StepResult result;
    result.post = pre;
    for (const auto& [name, value] : inputs) {
        result.post[name] = value;
    }
    Executor ex(model_, machines_, result.post, result, cycle);
    for (const TaskAst* task : schedule_) {
        try {
            ex.run(*task);
        } catch (const EvalFault& f) {
            RuntimeFault fault;
            fault.code = f.code();
            fault.task_id = task->task_id;
            fault.file = task->file;
            fault.pos = f.pos();
            fault.cycle = cycle;
            fault.message = f.what();
            result.fault = std::move(fault);
            return result;
        }
    }
    return result;
}

Trace Simulator::run(const std::vector<Valuation>& rows) const {
    return run_from(init_state(), rows);
}

Trace Simulator::run_from(Valuation pre, const std::vector<Valuation>& rows) const {
    Trace trace;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        int cycle = static_cast<int>(i) + 1;
        StepResult r = step(pre, rows[i], cycle);
        if (r.fault) {
            trace.halted = std::move(r.fault);
            break;
        }
        CycleRecord rec;
        rec.cycle = cycle;
        rec.inputs = rows[i];
        rec.post = r.post;
        rec.fired = std::move(r.fired);
        rec.branches = std::move(r.branches);
        pre = std::move(r.post);
        trace.cycles.push_back(std::move(rec));
    }
    return trace;
}

// -- CSV ----------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

} // namespace

std::vector<Valuation> parse_input_csv(const std::string& text, const Model& model,
                                       const std::set<std::string>* required) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    std::vector<const DictEntry*> columns;
    std::vector<Valuation> rows;
    auto fail = [&](const std::string& msg) {
        throw PremaError(Code::E003, "input CSV line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> cells = split_csv(line);
        if (header.empty()) {
            header = cells;
            if (header.empty() || header.front() != "cycle") {
                fail("header must start with 'cycle'");
            }
            std::set<std::string> seen;
            for (std::size_t i = 1; i < header.size(); ++i) {
                const DictEntry* e = model.dictionary.find(header[i]);
                if (e == nullptr || !e->is_input()) {
                    fail("column '" + header[i] + "' is not an input variable");
                }
                if (!seen.insert(header[i]).second) {
                    fail("duplicate column '" + header[i] + "'");
                }
                columns.push_back(e);
            }
            for (const DictEntry* e : model.dictionary.inputs()) {
                if (seen.count(e->name) == 0 && (required == nullptr || required->count(e->name) != 0)) {
                    fail("missing column for input '" + e->name + "'");
                }
            }
            continue;
        }
        if (cells.size() != header.size()) {
            fail("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        std::int64_t cycle = 0;
        std::istringstream cyc(cells[0]);
        if (!(cyc >> cycle) || !cyc.eof()) {
            fail("cycle '" + cells[0] + "' is not an integer");
        }
        Valuation row;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            const DictEntry* e = columns[i - 1];
            auto v = parse_value(cells[i], e->type, model.int_bounds);
            if (!v) {
                fail("invalid value '" + cells[i] + "' for " + e->name + " (" + type_to_string(e->type) + ")");
            }
            row.emplace(e->name, coerce_to(*v, e->type));
        }
        rows.push_back(std::move(row));
    }
    if (header.empty()) {
        line_no = 1;
        fail("missing header");
    }
    return rows;
}

// -- JSON ---------------------------------------------------------------------

ordered_json value_to_json(const Value& v) {
    if (const auto* b = std::get_if<bool>(&v)) {
        return *b;
    }
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return *i;
    }
    if (const auto* r = std::get_if<Rational>(&v)) {
        return rational_to_string(*r);
    }
    return std::get<EnumValue>(v).literal;
}

std::optional<Value> value_from_json(const ordered_json& j, const Type& type, const IntBounds& bounds) {
    switch (type.base) {
    case BaseType::Bool:
        if (j.is_boolean()) {
            return Value{j.get<bool>()};
        }
        break;
    case BaseType::Int:
        if (j.is_number_integer()) {
            auto v = j.get<std::int64_t>();
            if (bounds.contains(v)) {
                return Value{v};
            }
            return std::nullopt;
        }
        break;
    case BaseType::Real:
        if (j.is_number_integer()) {
            return Value{Rational(j.get<std::int64_t>())};
        }
        break;
    case BaseType::Enum:
        break;
    }
    if (j.is_string()) {
        auto v = parse_value(j.get<std::string>(), type, bounds);
        if (v) {
            return coerce_to(*v, type);
        }
    }
    return std::nullopt;
}

ordered_json valuation_to_json(const Valuation& v, const Model& model) {
    ordered_json out = ordered_json::object();
    for (const auto& e : model.dictionary.entries) {
        auto it = v.find(e.name);
        if (it != v.end()) {
            out[e.name] = value_to_json(it->second);
        }
    }
    for (const auto& [name, value] : v) {
        if (!out.contains(name)) {
            out[name] = value_to_json(value);
        }
    }
    return out;
}

ordered_json fault_to_json(const RuntimeFault& f) {
    return ordered_json{{"code", std::string(code_name(f.code))},
                        {"task", f.task_id},
                        {"file", f.file},
                        {"line", f.pos.line},
                        {"col", f.pos.col},
                        {"cycle", f.cycle},
                        {"message", f.message}};
}

ordered_json fired_to_json(const FiredTransition& f) {
    return ordered_json{{"variable", f.variable}, {"from", f.from}, {"to", f.to}, {"task", f.task_id},
                        {"line", f.pos.line}};
}

ordered_json cycle_to_json(const CycleRecord& c, const Model& model) {
    ordered_json fired = ordered_json::array();
    for (const auto& f : c.fired) {
        fired.push_back(fired_to_json(f));
    }
    return ordered_json{{"cycle", c.cycle},
                        {"inputs", valuation_to_json(c.inputs, model)},
                        {"post", valuation_to_json(c.post, model)},
                        {"fired", fired}};
}

ordered_json trace_to_json(const Trace& trace, const Model& model) {
    ordered_json cycles = ordered_json::array();
    for (const auto& c : trace.cycles) {
        cycles.push_back(cycle_to_json(c, model));
    }
    ordered_json out;
    out["schema"] = "prema-trace/1";
    out["cycles"] = std::move(cycles);
    out["halted"] = trace.halted ? fault_to_json(*trace.halted) : ordered_json(nullptr);
    return out;
}

Valuation inputs_from_json(const ordered_json& j, const Model& model) {
    if (!j.is_object()) {
        throw PremaError(Code::E003, "inputs must be a JSON object");
    }
    Valuation out;
    for (const auto& [key, value] : j.items()) {
        const DictEntry* e = model.dictionary.find(key);
        if (e == nullptr || !e->is_input()) {
            throw PremaError(Code::E003, "'" + key + "' is not an input variable");
        }
        auto v = value_from_json(value, e->type, model.int_bounds);
        if (!v) {
            throw PremaError(Code::E003, "invalid value for input '" + key + "' (" + type_to_string(e->type) + ")");
        }
        out.emplace(key, *v);
    }
    for (const DictEntry* e : model.dictionary.inputs()) {
        if (out.count(e->name) == 0) {
            throw PremaError(Code::E003, "missing input '" + e->name + "'");
        }
    }
    return out;
}

// -- sessions -----------------------------------------------------------------

std::string SessionManager::create(std::shared_ptr<const Model> model) {
    auto s = std::make_shared<Session>();
    s->model = std::move(model);
    s->sim = std::make_unique<Simulator>(*s->model);
    s->snap.valuation = s->sim->init_state();
    std::lock_guard lock(mu_);
    std::string id = "s" + std::to_string(next_++);
    s->snap.id = id;
    sessions_.emplace(id, std::move(s));
    return id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw PremaError(Code::E003, "unknown session '" + id + "'");
    }
    return it->second;
}

bool SessionManager::exists(const std::string& id) const {
    std::lock_guard lock(mu_);
    return sessions_.count(id) != 0;
}

std::shared_ptr<const Model> SessionManager::model_of(const std::string& id) const {
    return find(id)->model;
}

CycleRecord SessionManager::step(const std::string& id, const Valuation& inputs, std::optional<RuntimeFault>* fault) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    if (s->snap.halted) {
        throw PremaError(Code::E003, "session '" + id + "' halted by " + std::string(code_name(s->snap.halted->code)) +
                                         " at cycle " + std::to_string(s->snap.halted->cycle));
    }
    int cycle = s->snap.cycle + 1;
    StepResult r = s->sim->step(s->snap.valuation, inputs, cycle);
    CycleRecord rec;
    rec.cycle = cycle;
    rec.inputs = inputs;
    if (r.fault) {
        s->snap.halted = r.fault;
        s->snap.trace.halted = r.fault;
        if (fault != nullptr) {
            *fault = r.fault;
        }
        rec.post = s->snap.valuation;
        return rec;
    }
    rec.post = r.post;
    rec.fired = r.fired;
    rec.branches = r.branches;
    s->snap.cycle = cycle;
    s->snap.valuation = std::move(r.post);
    s->snap.fired.insert(s->snap.fired.end(), rec.fired.begin(), rec.fired.end());
    s->snap.trace.cycles.push_back(rec);
    return rec;
}

SessionManager::Snapshot SessionManager::state(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    return s->snap;
}

} // namespace prema
