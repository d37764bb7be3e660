#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls the search or encoding code under test.

#include "prema/eval.hpp"
#include "prema/format.hpp"
#include "prema/parser.hpp"
#include "prema/simulator.hpp"
#include "prema/solver.hpp"
#include "prema/testgen.hpp"
#include "prema/verifier.hpp"
#include "prema/workspace.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace prema::oracle {

inline std::filesystem::path fixture_dir() {
    return std::filesystem::path(PREMA_FIXTURE_DIR);
}

inline CompiledProject load_fixture(const std::string& name) {
    return compile_project(fixture_dir() / name / "prema.json");
}

inline CompiledProject load_fixture(const std::string& name, const IntBounds& bounds) {
    ProjectConfig cfg = load_project_config(fixture_dir() / name / "prema.json");
    cfg.int_bounds = bounds;
    return compile_project(cfg);
}

inline ExprPtr parse(const std::string& text) {
    ExprParseResult r = parse_expression(text, true);
    if (!r.expr) {
        throw std::runtime_error("oracle: cannot parse '" + text + "'");
    }
    return r.expr;
}

// -- random points ---------------------------------------------------------------

inline Value random_value(const Type& type, std::mt19937& rng, const IntBounds& bounds, std::int64_t span = 40) {
    switch (type.base) {
    case BaseType::Bool:
        return std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    case BaseType::Int: {
        std::int64_t lo = std::max(bounds.min, -span);
        std::int64_t hi = std::min(bounds.max, span);
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    }
    case BaseType::Real: {
        auto num = std::uniform_int_distribution<std::int64_t>(-4 * span, 4 * span)(rng);
        auto den = std::uniform_int_distribution<std::int64_t>(1, 4)(rng);
        // A zero now and then so divisions get exercised at zero.
        if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
            num = 0;
        }
        return Rational(num, den);
    }
    case BaseType::Enum: {
        auto i = std::uniform_int_distribution<std::size_t>(0, type.literals.size() - 1)(rng);
        return EnumValue{type.literals[i]};
    }
    }
    return false;
}

inline Valuation random_pre_state(const Model& model, std::mt19937& rng) {
    Valuation v;
    for (const auto& e : model.dictionary.entries) {
        if (!e.is_input()) {
            v[e.name] = random_value(e.type, rng, model.int_bounds);
        }
    }
    return v;
}

inline Valuation random_inputs(const Model& model, std::mt19937& rng, const std::set<std::string>& names) {
    Valuation v;
    for (const auto& e : model.dictionary.entries) {
        if (e.is_input() && names.count(e.name) != 0) {
            v[e.name] = random_value(e.type, rng, model.int_bounds);
        }
    }
    return v;
}

// -- FOUR-1 synthetic input stream --------------------------------------------------

// Sensor-like rows: commands are rare, sensors fire a few cycles after the
// corresponding motion starts. Deterministic for a given seed.
inline std::string four1_csv(int rows, std::uint32_t seed = 15273) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> pct(0, 99);
    std::ostringstream out;
    out << "cycle,open_cmd,close_cmd,fully_open,fully_closed,obstacle\n";
    auto b = [](bool v) { return v ? "True" : "False"; };
    for (int i = 1; i <= rows; ++i) {
        out << i << ',' << b(pct(rng) < 8) << ',' << b(pct(rng) < 3) << ',' << b(pct(rng) < 30) << ','
            << b(pct(rng) < 30) << ',' << b(pct(rng) < 5) << '\n';
    }
    return out.str();
}

// -- boolean structure of a guard ----------------------------------------------------

// Evaluates `e` with every sub-expression equal to conditions[i] replaced by
// vec[i]; only not/and/or are interpreted.
inline bool eval_structure(const ExprPtr& e, const std::vector<ExprPtr>& conditions, const std::vector<bool>& vec) {
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (expr_equal(e, conditions[i])) {
            return vec[i];
        }
    }
    if (e->kind == ExprKind::BoolLit) {
        return e->bool_value;
    }
    if (e->kind == ExprKind::Unary && e->unary_op == UnaryOp::Not) {
        return !eval_structure(e->lhs, conditions, vec);
    }
    if (e->kind == ExprKind::Binary && e->binary_op == BinaryOp::And) {
        return eval_structure(e->lhs, conditions, vec) && eval_structure(e->rhs, conditions, vec);
    }
    if (e->kind == ExprKind::Binary && e->binary_op == BinaryOp::Or) {
        return eval_structure(e->lhs, conditions, vec) || eval_structure(e->rhs, conditions, vec);
    }
    throw std::runtime_error("oracle: atom not among conditions: " + format_expr(e));
}

inline std::vector<bool> vector_of(std::uint32_t mask, std::size_t n) {
    std::vector<bool> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = ((mask >> i) & 1U) != 0;
    }
    return v;
}

struct TruthTable {
    std::size_t n = 0;
    std::vector<bool> outcome; // indexed by mask, bit i = condition i

    TruthTable(const ExprPtr& guard, const std::vector<ExprPtr>& conditions) : n(conditions.size()) {
        outcome.resize(std::size_t{1} << n);
        for (std::uint32_t m = 0; m < outcome.size(); ++m) {
            outcome[m] = eval_structure(guard, conditions, vector_of(m, n));
        }
    }

    [[nodiscard]] bool at(const std::vector<bool>& vec) const {
        std::uint32_t m = 0;
        for (std::size_t i = 0; i < vec.size(); ++i) {
            m |= vec[i] ? (1U << i) : 0U;
        }
        return outcome[m];
    }

    // Unique cause: vectors differ only in condition i and the outcome flips.
    [[nodiscard]] bool unique_cause(std::size_t i, std::uint32_t a, std::uint32_t b) const {
        return (a ^ b) == (1U << i) && outcome[a] != outcome[b];
    }

    // Masking: condition i differs, outcomes differ, and flipping i alone
    // flips the outcome at both vectors.
    [[nodiscard]] bool masking(std::size_t i, std::uint32_t a, std::uint32_t b) const {
        std::uint32_t bit = 1U << i;
        return ((a ^ b) & bit) != 0 && outcome[a] != outcome[b] && outcome[a] != outcome[a ^ bit] &&
               outcome[b] != outcome[b ^ bit];
    }

    [[nodiscard]] bool has_unique_cause(std::size_t i, const std::function<bool(std::uint32_t)>& ok) const {
        for (std::uint32_t a = 0; a < outcome.size(); ++a) {
            if (ok(a) && ok(a ^ (1U << i)) && unique_cause(i, a, a ^ (1U << i))) {
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] bool has_any_pair(std::size_t i, const std::function<bool(std::uint32_t)>& ok) const {
        for (std::uint32_t a = 0; a < outcome.size(); ++a) {
            for (std::uint32_t b = 0; b < outcome.size(); ++b) {
                if (ok(a) && ok(b) && masking(i, a, b)) {
                    return true;
                }
            }
        }
        return false;
    }

    // Size of the smallest vector set holding a unique-cause pair for every
    // condition that has one, by exhaustive subset search (n <= 4).
    [[nodiscard]] int minimal_unique_cause_set() const {
        std::size_t rows = outcome.size();
        int best = -1;
        for (std::uint32_t subset = 0; subset < (1U << rows); ++subset) {
            int size = __builtin_popcount(subset);
            if (best >= 0 && size >= best) {
                continue;
            }
            bool all = true;
            for (std::size_t i = 0; i < n && all; ++i) {
                bool achievable = has_unique_cause(i, [](std::uint32_t) { return true; });
                bool covered = !achievable;
                for (std::uint32_t a = 0; a < rows && !covered; ++a) {
                    std::uint32_t b = a ^ (1U << i);
                    covered = ((subset >> a) & 1U) != 0 && ((subset >> b) & 1U) != 0 && unique_cause(i, a, b);
                }
                all = covered;
            }
            if (all) {
                best = size;
            }
        }
        return best;
    }
};

// Positions of the if-chains of a task in pre-order.
inline void chain_positions(const std::vector<Stmt>& stmts, std::vector<SourcePos>& out) {
    for (const auto& s : stmts) {
        if (const auto* chain = std::get_if<IfChain>(&s.node)) {
            out.push_back(s.pos);
            for (const auto& arm : chain->arms) {
                chain_positions(arm.body, out);
            }
            if (chain->else_body) {
                chain_positions(*chain->else_body, out);
            }
        }
    }
}

// Runs the test case's task once from its pre-state and inputs and reports
// whether the decision came out as `expected_outcome`. The chain must be
// reached and no earlier arm may have been taken.
inline bool simulator_confirms(const Model& model, const Decision& d, const TestCase& tc, std::string* why = nullptr) {
    const TaskAst* task = model.find_task(tc.task_id);
    std::vector<SourcePos> chains;
    chain_positions(task->stmts, chains);
    Simulator sim(model, std::vector<std::string>{tc.task_id});
    Valuation pre = sim.init_state();
    for (const auto& [k, v] : tc.pre_state) {
        pre[k] = v;
    }
    Valuation inputs;
    for (const auto& name : sim.required_inputs()) {
        inputs[name] = default_value(model.dictionary.find(name)->type);
    }
    for (const auto& [k, v] : tc.inputs) {
        inputs[k] = v;
    }
    StepResult r = sim.step(pre, inputs);
    if (r.fault) {
        if (why != nullptr) {
            *why = "fault: " + r.fault->message;
        }
        return false;
    }
    const SourcePos& at = chains.at(static_cast<std::size_t>(d.chain));
    for (const auto& b : r.branches) {
        if (b.pos == at) {
            bool reached = b.arm < 0 || b.arm >= d.arm;
            bool outcome = b.arm == d.arm;
            if (why != nullptr) {
                *why = "arm " + std::to_string(b.arm);
            }
            return reached && outcome == tc.expected_outcome;
        }
    }
    if (why != nullptr) {
        *why = "chain not reached";
    }
    return false;
}

// -- exhaustive enumeration -----------------------------------------------------

inline std::vector<Value> domain_of(const Type& type, const IntBounds& bounds) {
    std::vector<Value> out;
    switch (type.base) {
    case BaseType::Bool:
        out = {false, true};
        break;
    case BaseType::Int:
        for (std::int64_t v = bounds.min; v <= bounds.max; ++v) {
            out.emplace_back(v);
        }
        break;
    case BaseType::Enum:
        for (const auto& l : type.literals) {
            out.emplace_back(EnumValue{l});
        }
        break;
    case BaseType::Real:
        throw std::runtime_error("oracle: real variables have no finite domain");
    }
    return out;
}

// Calls `visit` on every assignment of `names` over their finite domains.
inline void enumerate(const std::vector<std::pair<std::string, Type>>& vars, const IntBounds& bounds,
                      const std::function<void(const Valuation&)>& visit) {
    std::vector<std::vector<Value>> domains;
    for (const auto& [name, type] : vars) {
        domains.push_back(domain_of(type, bounds));
    }
    Valuation cur;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == vars.size()) {
            visit(cur);
            return;
        }
        for (const auto& v : domains[i]) {
            cur[vars[i].first] = v;
            rec(i + 1);
        }
    };
    rec(0);
}

// A conjunct holds when it evaluates to True without a fault.
inline bool holds(const Expr& e, const Valuation& v, const IntBounds& bounds) {
    try {
        MapEnv env(v);
        Value r = evaluate(e, env, bounds);
        return is_bool(r) && std::get<bool>(r);
    } catch (const EvalFault&) {
        return false;
    }
}

inline bool brute_force_sat(const Constraint& c) {
    std::vector<std::pair<std::string, Type>> vars;
    for (const auto& v : c.vars) {
        vars.emplace_back(v.name, v.type);
    }
    bool sat = false;
    enumerate(vars, c.int_bounds, [&](const Valuation& v) {
        if (sat) {
            return;
        }
        bool all = true;
        for (const auto& e : c.conjuncts) {
            all = all && holds(*e, v, c.int_bounds);
        }
        sat = all;
    });
    return sat;
}

// Exhaustively checks `property` (under `assumption`) over every pre-state
// of the non-input variables and every input sequence of length `depth`.
// Executions that fault are not executions and are skipped (counted in
// `faults`). Returns the number of violating points.
struct Enumeration {
    std::uint64_t violations = 0;
    std::uint64_t executions = 0;
    std::uint64_t faults = 0;
};

inline Enumeration enumerate_runs(const Model& model, const std::vector<std::string>& selection, int depth,
                                  const std::string& property, const std::string& assumption = "") {
    Simulator sim(model, selection);
    ExprPtr prop = parse(property.empty() ? "True" : property);
    ExprPtr assume = assumption.empty() ? nullptr : parse(assumption);
    std::vector<std::pair<std::string, Type>> vars;
    for (const auto& e : model.dictionary.entries) {
        if (!e.is_input()) {
            vars.emplace_back(e.name, e.type);
        }
    }
    for (int c = 0; c < depth; ++c) {
        for (const auto& name : sim.required_inputs()) {
            vars.emplace_back(name + "#" + std::to_string(c), model.dictionary.find(name)->type);
        }
    }
    Enumeration out;
    enumerate(vars, model.int_bounds, [&](const Valuation& point) {
        Valuation pre;
        std::vector<Valuation> rows(static_cast<std::size_t>(depth));
        for (const auto& [k, v] : point) {
            auto hash = k.find('#');
            if (hash == std::string::npos) {
                pre[k] = v;
            } else {
                rows[static_cast<std::size_t>(std::stoi(k.substr(hash + 1)))][k.substr(0, hash)] = v;
            }
        }
        Valuation full = sim.init_state();
        for (const auto& [k, v] : pre) {
            full[k] = v;
        }
        Trace t = sim.run_from(full, rows);
        if (t.halted) {
            ++out.faults;
            return;
        }
        ++out.executions;
        const Valuation& post = t.cycles.back().post;
        try {
            if (assume && !evaluate_property(*assume, model, full, rows, post)) {
                return;
            }
            if (!evaluate_property(*prop, model, full, rows, post)) {
                ++out.violations;
            }
        } catch (const EvalFault&) {
            ++out.violations;
        }
    });
    return out;
}

} // namespace prema::oracle
