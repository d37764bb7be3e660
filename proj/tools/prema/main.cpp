#include "prema/service.hpp"
#include "prema/testgen.hpp"
#include "prema/verifier.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace prema;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kFailure = 2;

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw PremaError(Code::E002, "cannot write '" + path + "'");
    }
    out << text;
}

void print_diagnostics(const Diagnostics& diags) {
    for (const auto& d : diags) {
        std::cerr << to_string(d) << "\n";
    }
}

std::optional<std::vector<std::string>> selection_of(const std::vector<std::string>& tasks) {
    if (tasks.empty()) {
        return std::nullopt;
    }
    return tasks;
}

struct Options {
    std::string project = "prema.json";
    std::string json_out;
    std::string out;
    std::string out_dir;
    std::string var;
    bool all = false;
    int depth = 1;
    std::string inputs;
    std::string trace;
    std::vector<std::string> tasks;
    std::string task;
    std::string csv_out;
    std::string coverage_out;
    std::vector<std::string> properties;
    std::string assume;
    bool runtime_safety = false;
    std::string smtlib_out;
    std::string host = "127.0.0.1";
    std::optional<int> port;
    bool no_testgen = false;
};

int cmd_check(const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    print_diagnostics(p.diagnostics);
    ordered_json j = check_to_json(p);
    if (!o.json_out.empty()) {
        write_text(o.json_out, payload_text(j));
    }
    std::cerr << p.model->tasks.size() << " task(s), " << j["errors"].get<int>() << " error(s), "
              << j["warnings"].get<int>() << " warning(s)\n";
    return p.has_errors() ? kFindings : kOk;
}

int cmd_graph(const std::string& kind, const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    const Model& m = *p.model;
    auto render = [&](const std::string& var) {
        return kind == "state" ? state_diagram_text(m, var) : dependency_diagram_text(m, var, o.depth);
    };
    if (o.all) {
        std::string dir = o.out_dir.empty() ? "." : o.out_dir;
        fs::create_directories(dir);
        int n = 0;
        if (kind == "state") {
            for (const auto& sm : m.machines) {
                write_text((fs::path(dir) / (sm.variable + ".state.dot")).string(), render(sm.variable));
                ++n;
            }
        } else {
            for (const auto& e : m.dictionary.entries) {
                write_text((fs::path(dir) / (e.name + ".deps.dot")).string(), render(e.name));
                ++n;
            }
        }
        std::cerr << n << " diagram(s) written to " << dir << "\n";
        return kOk;
    }
    if (o.var.empty()) {
        throw CLI::ValidationError("--var or --all is required");
    }
    write_text(o.out.empty() ? "-" : o.out, render(o.var));
    return kOk;
}

int cmd_simulate(const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    std::string csv = read_file(o.inputs);
    SimulationRun run = simulate_project(p, csv, selection_of(o.tasks));
    if (!run.blocking.empty()) {
        print_diagnostics(run.blocking);
        std::cerr << "simulation not started\n";
        return kFindings;
    }
    std::string text = payload_text(trace_to_json(run.trace, *p.model));
    if (!o.trace.empty()) {
        write_text(o.trace, text);
    }
    std::cerr << run.trace.cycles.size() << " cycle(s) completed\n";
    if (run.trace.halted) {
        print_diagnostics({fault_diagnostic(*run.trace.halted)});
        return kFindings;
    }
    return kOk;
}

int cmd_testgen(const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    std::optional<std::string> task;
    if (!o.task.empty()) {
        task = o.task;
    }
    CoverageReport report = coverage(*p.model, task);
    std::string csv = test_cases_csv(report, *p.model);
    write_text(o.csv_out.empty() ? "-" : o.csv_out, csv);
    if (!o.coverage_out.empty()) {
        write_text(o.coverage_out, payload_text(coverage_to_json(report, *p.model)));
    }
    std::cerr << report.case_count() << " test case(s); " << report.tasks_at_100 << " of "
              << report.tasks_with_decisions << " task(s) with decisions at 100% coverage\n";
    return report.tasks_with_gaps > 0 ? kFindings : kOk;
}

int cmd_verify(const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    if (o.properties.size() > 1) {
        throw CLI::ValidationError("verify takes one --property");
    }
    VerifyRequest req;
    req.property = o.properties.empty() ? "" : o.properties.front();
    req.assumption = o.assume;
    req.selection = selection_of(o.tasks);
    req.depth = o.depth;
    req.runtime_safety = o.runtime_safety;
    if (req.property.empty() && !req.runtime_safety) {
        throw CLI::ValidationError("--property or --runtime-safety is required");
    }
    ordered_json j = run_verify(*p.model, req);
    std::string verdict = j["verdict"].get<std::string>();
    if (verdict == "UNKNOWN") {
        std::string path = o.smtlib_out;
        if (path.empty() && !o.json_out.empty()) {
            path = fs::path(o.json_out).replace_extension(".smt2").string();
        }
        if (!path.empty()) {
            write_text(path, j["smtlib"].get<std::string>());
            j["smtlib_path"] = path;
        }
    }
    write_text(o.json_out.empty() ? "-" : o.json_out, payload_text(j));
    std::cerr << verdict << "\n";
    return verdict == "VALID" ? kOk : kFindings;
}

int cmd_report(const Options& o) {
    CompiledProject p = compile_project(fs::path(o.project));
    ReportOptions ro;
    ro.project_path = o.project;
    if (!o.inputs.empty()) {
        ro.inputs_csv = read_file(o.inputs);
    }
    ro.selection = selection_of(o.tasks);
    ro.properties = o.properties;
    ro.assumption = o.assume;
    ro.depth = o.depth;
    ro.testgen = !o.no_testgen;
    ordered_json j = build_report(p, ro);
    if (!o.out_dir.empty()) {
        const Model& m = *p.model;
        fs::create_directories(o.out_dir);
        for (const auto& sm : m.machines) {
            write_text((fs::path(o.out_dir) / (sm.variable + ".state.dot")).string(),
                       state_diagram_text(m, sm.variable));
        }
        for (const auto& e : m.dictionary.entries) {
            write_text((fs::path(o.out_dir) / (e.name + ".deps.dot")).string(),
                       dependency_diagram_text(m, e.name, 1));
        }
    }
    write_text(o.out.empty() ? "-" : o.out, payload_text(j));
    return j["summary"]["errors"].get<int>() > 0 ? kFindings : kOk;
}

int cmd_serve(const Options& o, bool project_given) {
    Service service;
    if (project_given || fs::exists(o.project)) {
        CompiledProject p = compile_project(fs::path(o.project));
        print_diagnostics(p.diagnostics);
        service.load(std::move(p));
    }
    serve_http(service, o.host, resolve_port(o.port));
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prema: requirements model compiler and analyzer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options o;

    auto add_project = [&](CLI::App* sub) {
        return sub->add_option("project", o.project, "project config (.json) or single document (.md)");
    };

    auto* check = app.add_subcommand("check", "syntax, model, type, dimension and circularity checks");
    add_project(check);
    check->add_option("--json", o.json_out, "write the check result as JSON");

    auto* graph = app.add_subcommand("graph", "emit DOT diagrams");
    graph->require_subcommand(1);
    auto* gstate = graph->add_subcommand("state", "state machine diagram");
    auto* gdeps = graph->add_subcommand("deps", "key-variable dependency diagram");
    for (auto* g : {gstate, gdeps}) {
        add_project(g);
        g->add_option("--var", o.var, "variable");
        g->add_flag("--all", o.all, "one diagram per variable into --out-dir");
        g->add_option("-o,--output", o.out, "output file (default stdout)");
        g->add_option("--out-dir", o.out_dir, "directory for --all");
    }
    gdeps->add_option("--depth", o.depth, "1 = direct, n = indirect up to n, 0 = unlimited");

    auto* sim = app.add_subcommand("simulate", "batch cyclic simulation");
    add_project(sim);
    sim->add_option("--inputs", o.inputs, "input CSV")->required();
    sim->add_option("--trace", o.trace, "write the trace JSON");
    sim->add_option("--tasks", o.tasks, "task ids or '<document>/' prefixes to run");

    auto* tg = app.add_subcommand("testgen", "MC/DC test generation");
    add_project(tg);
    tg->add_option("--task", o.task, "restrict to one task");
    tg->add_option("--csv", o.csv_out, "test-case CSV (default stdout)");
    tg->add_option("--coverage", o.coverage_out, "coverage JSON");

    auto* ver = app.add_subcommand("verify", "property verification");
    add_project(ver);
    ver->add_option("--property", o.properties, "boolean property; primed names are post-state");
    ver->add_option("--assume", o.assume, "assumption over the pre-state");
    ver->add_option("--tasks", o.tasks, "task ids or '<document>/' prefixes to encode");
    ver->add_option("--depth", o.depth, "cycles to unroll")->check(CLI::PositiveNumber);
    ver->add_flag("--runtime-safety", o.runtime_safety, "check every divisor for zero instead");
    ver->add_option("--json", o.json_out, "verification JSON (default stdout)");
    ver->add_option("--smtlib", o.smtlib_out, "SMT-LIB file for UNKNOWN verdicts");

    auto* rep = app.add_subcommand("report", "run every analysis into one report");
    add_project(rep);
    rep->add_option("-o,--output", o.out, "report JSON (default stdout)");
    rep->add_option("--inputs", o.inputs, "input CSV to simulate");
    rep->add_option("--tasks", o.tasks, "selection for simulation and verification");
    rep->add_option("--property", o.properties, "property to verify (repeatable)");
    rep->add_option("--assume", o.assume, "assumption for every property");
    rep->add_option("--depth", o.depth, "cycles to unroll")->check(CLI::PositiveNumber);
    rep->add_option("--diagrams", o.out_dir, "write every diagram into this directory");
    rep->add_flag("--no-testgen", o.no_testgen, "skip test generation");

    auto* srv = app.add_subcommand("serve", "HTTP JSON service");
    auto* srv_project = add_project(srv);
    srv->add_option("--host", o.host, "bind address");
    srv->add_option("--port", o.port, "port (PREMA_PORT overrides)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kFailure;
    }

    try {
        if (check->parsed()) {
            return cmd_check(o);
        }
        if (gstate->parsed()) {
            return cmd_graph("state", o);
        }
        if (gdeps->parsed()) {
            return cmd_graph("deps", o);
        }
        if (sim->parsed()) {
            return cmd_simulate(o);
        }
        if (tg->parsed()) {
            return cmd_testgen(o);
        }
        if (ver->parsed()) {
            return cmd_verify(o);
        }
        if (rep->parsed()) {
            return cmd_report(o);
        }
        if (srv->parsed()) {
            return cmd_serve(o, srv_project->count() > 0);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const PremaError& e) {
        std::cerr << "error " << code_name(e.code()) << ": " << e.what() << "\n";
        // Analysis findings raised as exceptions still count as findings.
        switch (e.code()) {
        case Code::E002:
        case Code::E003:
            return kFailure;
        default:
            return kFindings;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
