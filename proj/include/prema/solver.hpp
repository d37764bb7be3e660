#pragma once

#include "prema/ast.hpp"
#include "prema/value.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prema {

struct RealRange {
    std::optional<Rational> lo;
    std::optional<Rational> hi;
    bool lo_strict = false;
    bool hi_strict = false;
};

struct SolverVar {
    std::string name;
    Type type;
    std::optional<RealRange> real_range; // reals only; unbounded when absent
};

// A named functional definition `name := value` over earlier names. The
// verifier's SSA versions and branch literals are definitions.
struct Definition {
    std::string name;
    Type type;
    ExprPtr value;
};

// Conjunction of boolean expressions over typed variables. Names that are
// neither variables nor definitions denote enum literals.
struct Constraint {
    std::vector<SolverVar> vars; // search order = declaration order
    std::vector<Definition> definitions;
    std::vector<ExprPtr> conjuncts;
    IntBounds int_bounds;
};

enum class SolveStatus : std::uint8_t { Sat, Unsat, Unknown };

std::string_view status_name(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::Unknown;
    Valuation model; // variables plus every definition that evaluated
    std::string reason;
    std::string smtlib; // attached on Unknown
};

struct SolveOptions {
    // Eager: every definition must evaluate without a runtime fault (the
    // execution is fault-free). Lazy: only definitions the conjuncts need.
    bool eager_definitions = true;
    std::uint64_t node_limit = 4'000'000;
};

// Bounded decision procedure: propagate-and-branch over bool/enum/int with
// interval reasoning over exact rationals, then linear real arithmetic by
// Fourier-Motzkin at the leaves. A conjunct holds when it evaluates to True
// without a fault. Models are the lexicographically smallest over the
// variable order (False < True, enum declaration order, ascending ints).
// Throws PremaError(E003) for a malformed constraint.
SolveResult solve(const Constraint& c, const SolveOptions& options = {});

// True when every conjunct evaluates to True under `model` (which must bind
// every variable); definitions are evaluated on demand.
bool check_model(const Constraint& c, const Valuation& model);

// SMT-LIB v2: declare-const per variable, define-fun per definition, enums
// as bounded Int with a comment table, runtime-fault side conditions made
// explicit, check-sat and get-model. With eager definitions every
// definition must also be fault-free.
std::string export_smtlib(const Constraint& c, bool eager_definitions = true);

} // namespace prema
