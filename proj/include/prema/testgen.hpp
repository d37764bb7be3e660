#pragma once

#include "prema/model.hpp"
#include "prema/value.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace prema {

// One if/elif guard. Conditions are the distinct atoms of the guard
// (comparisons and boolean variable references) in left-to-right order.
struct Decision {
    std::string task_id;
    int index = 0;    // document order within the task, from 0
    int chain = 0;    // if-chain ordinal within the task (pre-order)
    int arm = 0;      // arm of that chain
    SourcePos pos;
    ExprPtr expr;
    std::vector<ExprPtr> conditions;
};

std::vector<Decision> enumerate_decisions(const TaskAst& task);

// Outcome of the guard with every condition replaced by vec[i].
bool decision_outcome(const Decision& d, const std::vector<bool>& vec);

struct McdcPair {
    int condition = 0;
    std::vector<bool> vec_true;  // condition holds
    std::vector<bool> vec_false;
    bool outcome_true = false;
    bool outcome_false = false;
    bool masking = false;
};

struct CoverageGap {
    int condition = 0;
    std::string reason;
};

struct PairResult {
    std::vector<McdcPair> pairs; // ordered by condition
    std::vector<CoverageGap> gaps;
};

using VectorFilter = std::function<bool(const std::vector<bool>&)>;

// Boolean-level independence pairs. `feasible` (when set) rejects vectors
// that cannot be realized; unique-cause pairs come first, masking pairs only
// for conditions without one.
PairResult mcdc_pairs(const Decision& d, const VectorFilter& feasible = {});

struct TestCase {
    std::string task_id;
    int decision = 0;
    int decision_line = 0;
    std::string case_id;
    std::vector<int> covers;
    std::vector<bool> vector;
    Valuation pre_state; // non-input variables the decision depends on
    Valuation inputs;    // input variables the decision depends on
    bool expected_outcome = false;
};

// Solves for a task execution that reaches the decision with the given
// condition values; nullopt when infeasible. Variables of the task outside
// the decision's dependency closure stay at their initial values.
std::optional<TestCase> concretize(const Decision& d, const std::vector<bool>& vec, const Model& model);

struct DecisionReport {
    Decision decision;
    PairResult pairs;
};

struct TaskCoverage {
    std::string task_id;
    int decisions = 0;
    int required = 0;
    int achieved = 0;
    double percent = 0.0;
    std::vector<DecisionReport> details;
    std::vector<TestCase> cases;
};

struct CoverageReport {
    std::vector<TaskCoverage> tasks; // scheduled order
    int tasks_with_decisions = 0;
    int tasks_at_100 = 0;
    int tasks_without_decisions = 0;
    int tasks_with_gaps = 0;
    [[nodiscard]] double fraction_at_100() const;
    [[nodiscard]] std::size_t case_count() const;
};

TaskCoverage task_coverage(const Model& model, const TaskAst& task);

// `task_id` restricts generation to one task; throws PremaError(E003) when unknown.
CoverageReport coverage(const Model& model, const std::optional<std::string>& task_id = std::nullopt);

std::string vector_text(const std::vector<bool>& vec); // "TFT"

// "task_id,decision_line,case_id,expected_outcome,assignments"
std::string test_cases_csv(const CoverageReport& report, const Model& model);

// "prema-coverage/1"
nlohmann::ordered_json coverage_to_json(const CoverageReport& report, const Model& model);

} // namespace prema
