#pragma once

#include "prema/model.hpp"
#include "prema/value.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prema {

struct FiredTransition {
    std::string variable;
    std::string from;
    std::string to;
    std::string task_id;
    SourcePos pos;

    friend bool operator==(const FiredTransition&, const FiredTransition&) = default;
};

// One executed if-chain. arm = index of the taken arm, arms.size() for the
// else branch, -1 when no arm ran.
struct BranchEvent {
    int cycle = 0;
    std::string task_id;
    SourcePos pos;
    int arm = -1;

    friend bool operator==(const BranchEvent&, const BranchEvent&) = default;
};

struct RuntimeFault {
    Code code = Code::E301;
    std::string task_id;
    std::string file;
    SourcePos pos;
    int cycle = 0;
    std::string message;
};

struct CycleRecord {
    int cycle = 0;
    Valuation inputs;
    Valuation post;
    std::vector<FiredTransition> fired;
    std::vector<BranchEvent> branches;
};

struct Trace {
    std::vector<CycleRecord> cycles;
    std::optional<RuntimeFault> halted;
};

struct StepResult {
    Valuation post; // valuation at the fault when `fault` is set
    std::vector<FiredTransition> fired;
    std::vector<BranchEvent> branches;
    std::optional<RuntimeFault> fault;
};

class Simulator {
public:
    // Runs the whole schedule.
    explicit Simulator(const Model& model);
    // Runs only the selected tasks in their mutual dependency order; throws
    // PremaError(E201) when the selection is cyclic. Only inputs read by the
    // selected tasks are required, the rest keep their initial values.
    Simulator(const Model& model, const std::vector<std::string>& selection);

    [[nodiscard]] Valuation init_state() const;

    // Inputs must bind every required input and nothing but inputs; throws
    // PremaError(E003) otherwise.
    [[nodiscard]] StepResult step(const Valuation& pre, const Valuation& inputs, int cycle = 1) const;

    [[nodiscard]] Trace run(const std::vector<Valuation>& rows) const;
    [[nodiscard]] Trace run_from(Valuation pre, const std::vector<Valuation>& rows) const;

    [[nodiscard]] const Model& model() const { return model_; }
    [[nodiscard]] const std::vector<const TaskAst*>& schedule() const { return schedule_; }
    [[nodiscard]] const std::set<std::string>& required_inputs() const { return required_; }

    void check_inputs(const Valuation& inputs) const;

private:
    const Model& model_;
    std::vector<const TaskAst*> schedule_;
    std::map<std::string, const StateMachine*> machines_;
    std::set<std::string> required_;
};

Valuation init_state(const Model& model);

// "cycle,<input>,..." with one row per cycle. Every input is a required
// column unless `required` narrows the set. Throws PremaError(E003) naming
// the line and column of the first problem.
std::vector<Valuation> parse_input_csv(const std::string& text, const Model& model,
                                       const std::set<std::string>* required = nullptr);

nlohmann::ordered_json value_to_json(const Value& v);
// Accepts JSON booleans, integers, and strings in the CSV spelling.
std::optional<Value> value_from_json(const nlohmann::ordered_json& j, const Type& type, const IntBounds& bounds);
nlohmann::ordered_json valuation_to_json(const Valuation& v, const Model& model);
nlohmann::ordered_json fault_to_json(const RuntimeFault& f);
nlohmann::ordered_json fired_to_json(const FiredTransition& f);
nlohmann::ordered_json cycle_to_json(const CycleRecord& c, const Model& model);

// "prema-trace/1".
nlohmann::ordered_json trace_to_json(const Trace& trace, const Model& model);

// Parses a JSON object of input values; throws PremaError(E003) naming the
// offending field.
Valuation inputs_from_json(const nlohmann::ordered_json& j, const Model& model);

// Interactive stepping sessions over a shared model. Each session is
// serialized by its own mutex; distinct sessions run independently.
class SessionManager {
public:
    struct Snapshot {
        std::string id;
        int cycle = 0;
        Valuation valuation;
        std::vector<FiredTransition> fired; // cumulative
        std::optional<RuntimeFault> halted;
        Trace trace;
    };

    std::string create(std::shared_ptr<const Model> model);
    // Throws PremaError(E003) for an unknown id, a halted session or bad inputs.
    CycleRecord step(const std::string& id, const Valuation& inputs, std::optional<RuntimeFault>* fault = nullptr);
    Snapshot state(const std::string& id) const;
    [[nodiscard]] bool exists(const std::string& id) const;
    [[nodiscard]] std::shared_ptr<const Model> model_of(const std::string& id) const;

private:
    struct Session {
        std::shared_ptr<const Model> model;
        std::unique_ptr<Simulator> sim;
        mutable std::mutex mu;
        Snapshot snap;
    };

    std::shared_ptr<Session> find(const std::string& id) const;

    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int next_ = 1;
};

} // namespace prema
