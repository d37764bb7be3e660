#pragma once

#include "prema/ast.hpp"
#include "prema/diagnostic.hpp"
#include "prema/value.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prema {

struct Site {
    std::string task_id;
    SourcePos pos;
};

struct DictEntry {
    std::string name;
    Type type;
    UnitExpr unit;
    Role role = Role::Internal;
    bool mode_flag = false;
    std::string declaring_task;
    SourcePos decl_pos;
    std::vector<Site> def_sites;
    std::vector<Site> use_sites;

    [[nodiscard]] bool is_input() const { return role == Role::Input; }
};

// Name ends in "State".
bool is_state_name(const std::string& name);
// A state or mode variable declared with a non-enum type (E103).
bool violates_state_rule(const DictEntry& e);

class DataDictionary {
public:
    // Entries keep declaration order (document order of tasks).
    std::vector<DictEntry> entries;

    [[nodiscard]] const DictEntry* find(const std::string& name) const;
    DictEntry* find(const std::string& name);
    [[nodiscard]] bool is_literal(const std::string& name) const { return literals_.count(name) != 0; }
    [[nodiscard]] std::vector<const DictEntry*> inputs() const;

    void add(DictEntry e);
    void index_literals();

private:
    std::map<std::string, std::size_t> index_;
    std::set<std::string> literals_;
};

enum class EdgeKind : std::uint8_t { SameCycle, Delay };
enum class EdgeTag : std::uint8_t { Rhs, Guard };

std::string_view edge_kind_name(EdgeKind k);
std::string_view edge_tag_name(EdgeTag t);

// `from` is the assigned variable, `to` the variable it reads.
struct DepEdge {
    std::string from;
    std::string to;
    EdgeKind kind = EdgeKind::SameCycle;
    EdgeTag tag = EdgeTag::Rhs;
    std::string task_id;
    SourcePos pos;
    bool cross_task = false; // `to` is produced by another task this cycle
};

struct DependencyGraph {
    std::vector<std::string> nodes; // dictionary order
    std::vector<DepEdge> edges;     // unique per (from, to, kind, tag, task)
};

struct Transition {
    std::string from;
    std::string to;
    ExprPtr guard;
    std::string task_id;
    SourcePos pos;
};

struct StateMachine {
    std::string variable;
    std::vector<std::string> states;
    std::vector<Transition> transitions;
    bool mode = false; // extracted because of the mode flag
};

struct Model {
    IntBounds int_bounds;
    DataDictionary dictionary;
    std::vector<TaskAst> tasks; // scheduled order
    std::vector<std::string> document_order;
    bool schedulable = true;
    // Task-level same-cycle dependencies: task -> tasks that must run first.
    std::map<std::string, std::set<std::string>> task_deps;
    DependencyGraph graph;
    std::vector<StateMachine> machines;
    Diagnostics diagnostics;

    [[nodiscard]] const TaskAst* find_task(const std::string& id) const;
    [[nodiscard]] const StateMachine* find_machine(const std::string& var) const;
};

struct BuildOptions {
    IntBounds int_bounds;
    bool extract_machines = true;
};

// Builds dictionary, graph, schedule and state machines. The model is always
// produced; problems are reported in model.diagnostics (E104, E105, E106,
// E107, E201).
Model build_model(std::vector<TaskAst> tasks, const BuildOptions& options = {});

std::vector<StateMachine> extract_state_machines(const Model& model, Diagnostics* diagnostics = nullptr);

struct SliceSide {
    std::vector<std::string> nodes; // BFS order
    std::vector<DepEdge> edges;     // unique per (from, to, kind)
};

struct Slice {
    std::string key;
    SliceSide uses_key;    // variables whose definitions read the key
    SliceSide used_by_key; // variables the key's definitions read
};

// depth <= 0 means unlimited. Throws PremaError(E104) for an unknown key.
Slice key_variable_slice(const Model& model, const std::string& key, int depth);

// Orders the selected tasks by their mutual same-cycle dependencies, ties by
// document order. Throws PremaError(E201) when the selection is cyclic and
// PremaError(E003) for an unknown task id.
std::vector<const TaskAst*> schedule_subset(const Model& model, const std::vector<std::string>& selection);

// Task ids in `model` matching `pattern`: an exact id or a "<stem>/" prefix.
std::vector<std::string> resolve_selection(const Model& model, const std::vector<std::string>& patterns);

// Conjuncts of `e` with nested `and` flattened, left to right.
std::vector<ExprPtr> flatten_and(const ExprPtr& e);

} // namespace prema
