#pragma once

#include "prema/model.hpp"
#include "prema/simulator.hpp"
#include "prema/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace prema {

struct SsaBranch {
    std::string literal; // definition name: arm index, arms for else, arms+1 for none, arms+2 unreached
    int arms = 0;
    int cycle = 0;
    std::string task_id;
    SourcePos pos;
    std::vector<ExprPtr> guards;                // arm conditions over SSA names
    std::map<std::string, std::string> scope;   // variable -> SSA name at the chain
};

// A division or modulo whose divisor may be zero when `condition` holds.
struct DivTarget {
    std::string task_id;
    SourcePos pos;
    int cycle = 0;
    std::string text;   // the faulting expression, pre-SSA spelling
    ExprPtr condition;  // evaluated ∧ divisor == 0, over SSA names
};

// Versioned encoding of k cycles of the selected tasks. Non-input variables
// enter as v@0; inputs are fresh per cycle (x@1 .. x@k); assignments define
// v@c.n and each cycle ends with v@c := latest version.
struct SsaEncoding {
    int depth = 1;
    std::vector<std::string> selection; // scheduled order
    std::vector<SolverVar> vars;
    std::vector<Definition> definitions;
    std::vector<SsaBranch> branches;
    std::vector<DivTarget> div_targets;
    std::map<std::string, std::string> initial; // variable -> SSA name for unprimed references
    std::map<std::string, std::string> final;   // variable -> SSA name for primed references
};

// `selection` = nullopt runs every task; an empty selection is the identity.
// Throws PremaError(E201) for a cyclic selection, E003 for unknown ids.
SsaEncoding encode(const Model& model, const std::optional<std::vector<std::string>>& selection, int depth = 1);

std::string ssa_name(const std::string& var, int cycle);

// Replaces variable names through `scope`; names outside it are kept.
ExprPtr rename_expr(const ExprPtr& e, const std::map<std::string, std::string>& scope);

// Evaluates every definition at a concrete point; returns variables and
// definitions. Throws EvalFault when the execution faults.
Valuation evaluate_encoding(const SsaEncoding& enc, const Valuation& pre, const std::vector<Valuation>& inputs,
                            const IntBounds& bounds);

// Post-state (v@k per variable, inputs from the last cycle) of an evaluated encoding.
Valuation final_state(const SsaEncoding& enc, const Valuation& evaluated);

struct PathStep {
    int cycle = 0;
    std::string task_id;
    SourcePos pos;
    int arm = -1;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct Counterexample {
    Valuation pre_state;                // non-input variables
    std::vector<Valuation> inputs;      // one per cycle
    std::vector<PathStep> error_path;
    std::string violated_property;
    std::optional<DivTarget> fault_site; // runtime-safety counterexamples
};

enum class Verdict : std::uint8_t { Valid, Counterexample, Unknown };
std::string_view verdict_name(Verdict v);

struct VerifyResult {
    Verdict verdict = Verdict::Unknown;
    std::optional<Counterexample> counterexample;
    std::string property;
    std::string assumption;
    std::string reason;
    std::string smtlib;
    int depth = 1;
    std::vector<std::string> selection;
};

struct VerifyOptions {
    std::optional<std::vector<std::string>> selection;
    int depth = 1;
    std::uint64_t node_limit = 4'000'000;
};

// Property and assumption use unprimed names for the pre-state (inputs: the
// first cycle) and primed names for the post-state after `depth` cycles.
// Throws PremaError(E001) for unparsable text, E101 for a non-boolean
// property, E104 for unknown names.
VerifyResult verify(const Model& model, const std::string& property, const std::string& assumption = "",
                    const VerifyOptions& options = {});

// SMT-LIB script of the verification query: sat exactly when a
// counterexample exists.
std::string property_smtlib(const Model& model, const std::string& property, const std::string& assumption = "",
                            const VerifyOptions& options = {});

VerifyResult check_runtime_safety(const Model& model, const VerifyOptions& options = {});

// Evaluates a property over a concrete run: unprimed names read `pre` (inputs
// from the first row), primed names read `post`.
bool evaluate_property(const Expr& property, const Model& model, const Valuation& pre,
                       const std::vector<Valuation>& inputs, const Valuation& post);

// Branch events of a run restricted to the error-path shape.
std::vector<PathStep> path_of(const std::vector<BranchEvent>& events);

nlohmann::ordered_json verify_to_json(const VerifyResult& r, const Model& model);

} // namespace prema
