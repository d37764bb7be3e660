#include "prema/workspace.hpp"

#include "prema/analysis.hpp"
#include "prema/format.hpp"
#include "prema/parser.hpp"

#include <map>

namespace prema {

using nlohmann::ordered_json;

bool CompiledProject::has_errors() const {
    return prema::has_errors(diagnostics);
}

Diagnostics CompiledProject::errors_in(const std::set<std::string>& task_ids) const {
    Diagnostics out;
    for (const auto& d : diagnostics) {
        if (d.is_error() && task_ids.count(d.task_id) != 0) {
            out.push_back(d);
        }
    }
    return out;
}

CompiledProject compile_project(const LoadedProject& loaded) {
    CompiledProject out;
    out.config = loaded.config;
    out.documents = loaded.documents;
    out.diagnostics = loaded.diagnostics;

    std::vector<TaskAst> tasks;
    for (const auto& doc : loaded.documents) {
        std::map<std::string, int> per_section;
        for (const FormalBlock* block : formal_blocks(doc.document)) {
            int n = ++per_section[block->section_id];
            std::string id = n == 1 ? block->section_id : block->section_id + "#" + std::to_string(n);
            ParseResult parsed = compile_block(*block, id, doc.document.path);
            bool bad = prema::has_errors(parsed.diagnostics);
            out.diagnostics.insert(out.diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
            if (bad) {
                out.rejected_tasks.push_back(id);
                continue;
            }
            parsed.ast.file = doc.document.path;
            tasks.push_back(std::move(parsed.ast));
        }
    }

    BuildOptions opts;
    opts.int_bounds = loaded.config.int_bounds;
    auto model = std::make_shared<Model>(build_model(std::move(tasks), opts));
    out.diagnostics.insert(out.diagnostics.end(), model->diagnostics.begin(), model->diagnostics.end());
    Diagnostics types = type_check(*model);
    out.diagnostics.insert(out.diagnostics.end(), types.begin(), types.end());
    Diagnostics dims = dimension_check(*model, loaded.config.base_units);
    out.diagnostics.insert(out.diagnostics.end(), dims.begin(), dims.end());
    out.model = std::move(model);
    return out;
}

CompiledProject compile_project(const ProjectConfig& config) {
    return compile_project(project_load(config));
}

CompiledProject compile_project(const std::filesystem::path& config_path) {
    return compile_project(project_load(config_path));
}

CompiledProject compile_markdown(const std::string& markdown, const std::string& name, const IntBounds& bounds) {
    ProjectConfig cfg;
    cfg.documents.push_back(DocumentSource{name + ".md", markdown});
    cfg.int_bounds = bounds;
    return compile_project(cfg);
}

ordered_json diagnostic_to_json(const Diagnostic& d) {
    ordered_json j;
    j["code"] = std::string(code_name(d.code));
    j["severity"] = d.is_error() ? "error" : "warning";
    j["task_id"] = d.task_id;
    j["file"] = d.file;
    j["line"] = d.pos.line;
    j["col"] = d.pos.col;
    j["message"] = d.message;
    if (!d.related.empty()) {
        ordered_json rel = ordered_json::array();
        for (const auto& r : d.related) {
            rel.push_back(ordered_json{{"task_id", r.task_id}, {"line", r.pos.line}, {"col", r.pos.col}, {"note", r.note}});
        }
        j["related"] = std::move(rel);
    }
    return j;
}

ordered_json diagnostics_to_json(const Diagnostics& diags) {
    ordered_json out = ordered_json::array();
    for (const auto& d : diags) {
        out.push_back(diagnostic_to_json(d));
    }
    return out;
}

ordered_json code_counts(const Diagnostics& diags) {
    ordered_json out = ordered_json::object();
    for (const auto& [code, n] : count_by_code(diags)) {
        out[code] = n;
    }
    return out;
}

namespace {

ordered_json type_json(const Type& t) {
    ordered_json j;
    switch (t.base) {
    case BaseType::Bool: j["kind"] = "bool"; break;
    case BaseType::Int: j["kind"] = "int"; break;
    case BaseType::Real: j["kind"] = "real"; break;
    case BaseType::Enum:
        j["kind"] = "enum";
        j["literals"] = t.literals;
        break;
    }
    return j;
}

ordered_json sites_json(const std::vector<Site>& sites) {
    ordered_json out = ordered_json::array();
    for (const auto& s : sites) {
        out.push_back(ordered_json{{"task_id", s.task_id}, {"line", s.pos.line}, {"col", s.pos.col}});
    }
    return out;
}

} // namespace

ordered_json model_to_json(const Model& model) {
    ordered_json out;
    out["schema"] = "prema-model/1";
    out["int_bounds"] = ordered_json{{"min", model.int_bounds.min}, {"max", model.int_bounds.max}};

    ordered_json dict = ordered_json::array();
    for (const auto& e : model.dictionary.entries) {
        dict.push_back(ordered_json{{"name", e.name},
                                    {"type", type_json(e.type)},
                                    {"unit", e.unit.terms.empty() ? std::string() : format_unit(e.unit)},
                                    {"role", std::string(role_name(e.role))},
                                    {"mode", e.mode_flag},
                                    {"declaring_task", e.declaring_task},
                                    {"line", e.decl_pos.line},
                                    {"def_sites", sites_json(e.def_sites)},
                                    {"use_sites", sites_json(e.use_sites)}});
    }
    out["dictionary"] = std::move(dict);

    ordered_json tasks = ordered_json::array();
    for (const auto& t : model.tasks) {
        ordered_json deps = ordered_json::array();
        auto it = model.task_deps.find(t.task_id);
        if (it != model.task_deps.end()) {
            for (const auto& d : it->second) {
                deps.push_back(d);
            }
        }
        tasks.push_back(ordered_json{{"task_id", t.task_id},
                                     {"file", t.file},
                                     {"declarations", t.decls.size()},
                                     {"statements", t.stmts.size()},
                                     {"depends_on", std::move(deps)},
                                     {"source", format_ast(t)}});
    }
    out["schedulable"] = model.schedulable;
    out["tasks"] = std::move(tasks);

    ordered_json edges = ordered_json::array();
    for (const auto& e : model.graph.edges) {
        edges.push_back(ordered_json{{"from", e.from},
                                     {"to", e.to},
                                     {"kind", std::string(edge_kind_name(e.kind))},
                                     {"tag", std::string(edge_tag_name(e.tag))},
                                     {"task_id", e.task_id},
                                     {"line", e.pos.line},
                                     {"cross_task", e.cross_task}});
    }
    out["graph"] = ordered_json{{"nodes", model.graph.nodes}, {"edges", std::move(edges)}};

    ordered_json machines = ordered_json::array();
    for (const auto& m : model.machines) {
        ordered_json trans = ordered_json::array();
        for (const auto& t : m.transitions) {
            trans.push_back(ordered_json{{"from", t.from},
                                         {"to", t.to},
                                         {"guard", format_expr(t.guard)},
                                         {"task_id", t.task_id},
                                         {"line", t.pos.line}});
        }
        machines.push_back(ordered_json{{"variable", m.variable},
                                        {"mode", m.mode},
                                        {"states", m.states},
                                        {"initial", m.states.empty() ? "" : m.states.front()},
                                        {"transitions", std::move(trans)}});
    }
    out["machines"] = std::move(machines);
    return out;
}

ordered_json check_to_json(const CompiledProject& project) {
    ordered_json out;
    out["schema"] = "prema-check/1";
    out["tool_version"] = kToolVersion;
    ordered_json docs = ordered_json::array();
    for (const auto& d : project.documents) {
        docs.push_back(d.document.path);
    }
    out["documents"] = std::move(docs);
    out["tasks"] = project.model ? project.model->tasks.size() : 0;
    out["rejected_tasks"] = project.rejected_tasks;
    int errors = 0;
    int warnings = 0;
    for (const auto& d : project.diagnostics) {
        (d.is_error() ? errors : warnings) += 1;
    }
    out["counts"] = code_counts(project.diagnostics);
    out["errors"] = errors;
    out["warnings"] = warnings;
    out["diagnostics"] = diagnostics_to_json(project.diagnostics);
    return out;
}

} // namespace prema
