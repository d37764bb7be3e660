#include "prema/service.hpp"

#include "prema/analysis.hpp"
#include "prema/testgen.hpp"
#include "prema/verifier.hpp"

#include <set>

namespace prema {

using nlohmann::ordered_json;

Diagnostic fault_diagnostic(const RuntimeFault& fault) {
    Diagnostic d;
    d.code = fault.code;
    d.task_id = fault.task_id;
    d.file = fault.file;
    d.pos = fault.pos;
    d.message = fault.message + " (cycle " + std::to_string(fault.cycle) + ")";
    return d;
}

SimulationRun simulate_project(const CompiledProject& project, const std::string& csv_text,
                               const std::optional<std::vector<std::string>>& selection) {
    SimulationRun run;
    const Model& model = *project.model;
    std::optional<Simulator> sim;
    std::set<std::string> ids;
    if (selection) {
        std::vector<std::string> resolved = resolve_selection(model, *selection);
        try {
            sim.emplace(model, resolved);
        } catch (const PremaError& e) {
            if (e.code() != Code::E201) {
                throw;
            }
            Diagnostic d;
            d.code = Code::E201;
            d.message = e.what();
            run.blocking.push_back(d);
            return run;
        }
        ids.insert(resolved.begin(), resolved.end());
    } else {
        for (const auto& t : model.tasks) {
            ids.insert(t.task_id);
        }
        ids.insert(project.rejected_tasks.begin(), project.rejected_tasks.end());
        ids.insert(""); // project-level diagnostics
        if (model.schedulable) {
            sim.emplace(model);
        }
    }
    for (const auto& d : project.errors_in(ids)) {
        if (d.code != Code::E102) {
            run.blocking.push_back(d);
        }
    }
    if (!model.schedulable && !selection) {
        bool reported = false;
        for (const auto& d : run.blocking) {
            reported = reported || d.code == Code::E201;
        }
        if (!reported) {
            Diagnostic d;
            d.code = Code::E201;
            d.message = "the task schedule has a circular same-cycle dependency";
            run.blocking.push_back(d);
        }
    }
    if (!run.blocking.empty() || !sim) {
        return run;
    }
    for (const TaskAst* t : sim->schedule()) {
        run.schedule.push_back(t->task_id);
    }
    std::vector<Valuation> rows = parse_input_csv(csv_text, model, &sim->required_inputs());
    run.trace = sim->run(rows);
    return run;
}

namespace {

ordered_json diagram_manifest(const Model& model) {
    ordered_json out = ordered_json::array();
    for (const auto& m : model.machines) {
        out.push_back(ordered_json{{"kind", "state"},
                                   {"variable", m.variable},
                                   {"file", m.variable + ".state.dot"},
                                   {"nodes", m.states.size()},
                                   {"edges", m.transitions.size()}});
    }
    for (const auto& e : model.dictionary.entries) {
        Slice s = key_variable_slice(model, e.name, 1);
        std::set<std::string> nodes{e.name};
        nodes.insert(s.uses_key.nodes.begin(), s.uses_key.nodes.end());
        nodes.insert(s.used_by_key.nodes.begin(), s.used_by_key.nodes.end());
        out.push_back(ordered_json{{"kind", "deps"},
                                   {"variable", e.name},
                                   {"file", e.name + ".deps.dot"},
                                   {"nodes", nodes.size()},
                                   {"edges", s.uses_key.edges.size() + s.used_by_key.edges.size()}});
    }
    return out;
}

ordered_json error_entry(const PremaError& e) {
    return ordered_json{{"code", std::string(code_name(e.code()))}, {"message", e.what()}};
}

} // namespace

ordered_json build_report(const CompiledProject& project, const ReportOptions& options) {
    const Model& model = *project.model;
    ordered_json out;
    out["schema"] = "prema-report/1";
    out["tool_version"] = kToolVersion;
    out["project"] = options.project_path;
    ordered_json docs = ordered_json::array();
    for (const auto& d : project.documents) {
        docs.push_back(d.document.path);
    }
    out["documents"] = std::move(docs);

    Diagnostics diags = project.diagnostics;

    ordered_json simulation = nullptr;
    if (options.inputs_csv) {
        SimulationRun run = simulate_project(project, *options.inputs_csv, options.selection);
        std::size_t fired = 0;
        for (const auto& c : run.trace.cycles) {
            fired += c.fired.size();
        }
        simulation = ordered_json{{"schedule", run.schedule},
                                  {"blocked", !run.blocking.empty()},
                                  {"cycles", run.trace.cycles.size()},
                                  {"fired_transitions", fired},
                                  {"halted", run.trace.halted ? fault_to_json(*run.trace.halted) : ordered_json()},
                                  {"final_state", run.trace.cycles.empty()
                                                      ? ordered_json()
                                                      : valuation_to_json(run.trace.cycles.back().post, model)}};
        if (run.trace.halted) {
            diags.push_back(fault_diagnostic(*run.trace.halted));
        }
    }

    ordered_json diagrams = diagram_manifest(model);

    ordered_json cov = nullptr;
    std::size_t cases = 0;
    if (options.testgen) {
        CoverageReport report = coverage(model);
        cases = report.case_count();
        cov = coverage_to_json(report, model);
    }

    ordered_json verification = ordered_json::array();
    auto run_one = [&](VerifyRequest req) {
        req.selection = options.selection;
        req.depth = options.depth;
        try {
            verification.push_back(run_verify(model, req));
        } catch (const PremaError& e) {
            ordered_json entry{{"schema", "prema-verify/1"},
                               {"verdict", "ERROR"},
                               {"property", req.runtime_safety ? "no division or modulo by zero" : req.property},
                               {"error", error_entry(e)}};
            verification.push_back(std::move(entry));
        }
    };
    for (const auto& p : options.properties) {
        VerifyRequest req;
        req.property = p;
        req.assumption = options.assumption;
        run_one(req);
    }
    if (options.runtime_safety) {
        VerifyRequest req;
        req.runtime_safety = true;
        run_one(req);
    }

    std::map<std::string, int> verdicts;
    for (const auto& v : verification) {
        ++verdicts[v["verdict"].get<std::string>()];
    }
    ordered_json verdict_counts = ordered_json::object();
    for (const auto& [k, n] : verdicts) {
        verdict_counts[k] = n;
    }
    int errors = 0;
    for (const auto& d : diags) {
        errors += d.is_error() ? 1 : 0;
    }

    out["diagnostics"] = diagnostics_to_json(diags);
    out["diagrams"] = std::move(diagrams);
    out["simulation"] = std::move(simulation);
    out["coverage"] = std::move(cov);
    out["verification"] = std::move(verification);
    out["summary"] = ordered_json{{"diagnostics", diags.size()},
                                  {"errors", errors},
                                  {"warnings", diags.size() - static_cast<std::size_t>(errors)},
                                  {"by_code", code_counts(diags)},
                                  {"diagrams", out["diagrams"].size()},
                                  {"test_cases", cases},
                                  {"verification", out["verification"].size()},
                                  {"verdicts", std::move(verdict_counts)}};
    return out;
}

} // namespace prema
