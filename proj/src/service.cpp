#include "prema/service.hpp"

#include "prema/analysis.hpp"
#include "prema/testgen.hpp"
#include "prema/verifier.hpp"

#include <cstdlib>
#include <sstream>

namespace prema {

using nlohmann::ordered_json;

std::string state_diagram_text(const Model& model, const std::string& var) {
    const StateMachine* m = model.find_machine(var);
    if (m == nullptr) {
        throw PremaError(Code::E104, "no state machine for variable '" + var + "'");
    }
    return emit_state_diagram(*m);
}

std::string dependency_diagram_text(const Model& model, const std::string& var, int depth) {
    return emit_dependency_diagram(key_variable_slice(model, var, depth));
}

namespace {

std::vector<std::string> string_list(const ordered_json& j, const char* field) {
    if (!j.is_array()) {
        throw PremaError(Code::E003, std::string("'") + field + "' must be a list of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) {
            throw PremaError(Code::E003, std::string("'") + field + "' must be a list of strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

VerifyRequest verify_request_from_json(const ordered_json& j) {
    if (!j.is_object()) {
        throw PremaError(Code::E003, "verify request must be a JSON object");
    }
    VerifyRequest req;
    for (const auto& [key, value] : j.items()) {
        if (key == "property" || key == "assume") {
            if (!value.is_string()) {
                throw PremaError(Code::E003, "'" + key + "' must be a string");
            }
            (key == "property" ? req.property : req.assumption) = value.get<std::string>();
        } else if (key == "selection") {
            if (!value.is_null()) {
                req.selection = string_list(value, "selection");
            }
        } else if (key == "depth") {
            if (!value.is_number_integer() || value.get<int>() < 1) {
                throw PremaError(Code::E003, "'depth' must be a positive integer");
            }
            req.depth = value.get<int>();
        } else if (key == "runtime_safety") {
            if (!value.is_boolean()) {
                throw PremaError(Code::E003, "'runtime_safety' must be a boolean");
            }
            req.runtime_safety = value.get<bool>();
        } else {
            throw PremaError(Code::E003, "unknown field '" + key + "'");
        }
    }
    if (req.property.empty() && !req.runtime_safety) {
        throw PremaError(Code::E003, "missing field 'property'");
    }
    return req;
}

ordered_json run_verify(const Model& model, const VerifyRequest& req) {
    VerifyOptions opts;
    opts.depth = req.depth;
    if (req.selection) {
        opts.selection = resolve_selection(model, *req.selection);
    }
    VerifyResult r = req.runtime_safety ? check_runtime_safety(model, opts)
                                        : verify(model, req.property, req.assumption, opts);
    return verify_to_json(r, model);
}

ordered_json run_testgen(const Model& model, const std::optional<std::string>& task_id) {
    CoverageReport report = coverage(model, task_id);
    ordered_json out = coverage_to_json(report, model);
    out["csv"] = test_cases_csv(report, model);
    return out;
}

ordered_json project_summary(const CompiledProject& project) {
    const Model& m = *project.model;
    ordered_json machines = ordered_json::array();
    for (const auto& sm : m.machines) {
        machines.push_back(ordered_json{{"variable", sm.variable},
                                        {"states", sm.states.size()},
                                        {"transitions", sm.transitions.size()}});
    }
    ordered_json docs = ordered_json::array();
    for (const auto& d : project.documents) {
        docs.push_back(d.document.path);
    }
    return ordered_json{{"schema", "prema-project/1"},
                        {"tool_version", kToolVersion},
                        {"documents", std::move(docs)},
                        {"tasks", m.tasks.size()},
                        {"variables", m.dictionary.entries.size()},
                        {"inputs", m.dictionary.inputs().size()},
                        {"schedulable", m.schedulable},
                        {"machines", std::move(machines)},
                        {"rejected_tasks", project.rejected_tasks},
                        {"counts", code_counts(project.diagnostics)}};
}

std::string payload_text(const ordered_json& j) {
    return j.dump(2) + "\n";
}

// -- service ------------------------------------------------------------------

namespace {

struct HttpError {
    int status;
    std::string code;
    std::string message;
};

HttpResponse json_response(const ordered_json& j, int status = 200) {
    return HttpResponse{status, "application/json", payload_text(j)};
}

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
    return json_response(ordered_json{{"code", code}, {"message", message}}, status);
}

ordered_json parse_body(const std::string& body) {
    if (body.empty()) {
        return ordered_json::object();
    }
    try {
        return ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw HttpError{400, "E003", std::string("malformed JSON body: ") + e.what()};
    }
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : path) {
        if (ch == '/') {
            if (!cur.empty()) {
                parts.push_back(cur);
            }
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) {
        parts.push_back(cur);
    }
    return parts;
}

ordered_json snapshot_json(const SessionManager::Snapshot& s, const Model& model) {
    ordered_json fired = ordered_json::array();
    for (const auto& f : s.fired) {
        fired.push_back(fired_to_json(f));
    }
    return ordered_json{{"session_id", s.id},
                        {"cycle", s.cycle},
                        {"valuation", valuation_to_json(s.valuation, model)},
                        {"fired", std::move(fired)},
                        {"halted", s.halted ? fault_to_json(*s.halted) : ordered_json()},
                        {"trace", trace_to_json(s.trace, model)}};
}

} // namespace

Service::Service(CompiledProject project) {
    load(std::move(project));
}

void Service::load(CompiledProject project) {
    auto p = std::make_shared<const CompiledProject>(std::move(project));
    std::lock_guard lock(mu_);
    project_ = std::move(p);
}

std::shared_ptr<const CompiledProject> Service::project() const {
    std::lock_guard lock(mu_);
    return project_;
}

std::shared_ptr<const CompiledProject> Service::require_project() const {
    auto p = project();
    if (!p) {
        throw HttpError{404, "E003", "no project loaded"};
    }
    return p;
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body,
                             const std::map<std::string, std::string>& query) {
    try {
        return route(method, split_path(path), body, query);
    } catch (const HttpError& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const PremaError& e) {
        return error_response(400, std::string(code_name(e.code())), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "E003", std::string("internal error: ") + e.what());
    }
}

HttpResponse Service::route(const std::string& method, const std::vector<std::string>& parts,
                            const std::string& body, const std::map<std::string, std::string>& query) {
    auto is = [&](std::initializer_list<const char*> want) {
        if (parts.size() != want.size()) {
            return false;
        }
        std::size_t i = 0;
        for (const char* w : want) {
            if (std::string(w) != "*" && parts[i] != w) {
                return false;
            }
            ++i;
        }
        return true;
    };
    auto expect = [&](const char* m) {
        if (method != m) {
            throw HttpError{404, "E003", "no route for " + method + " on this path"};
        }
    };

    if (is({"api", "health"})) {
        expect("GET");
        return json_response(ordered_json{{"status", "ok"}, {"tool_version", kToolVersion}});
    }
    if (is({"api", "project"})) {
        expect("POST");
        ordered_json j = parse_body(body);
        if (j.contains("config")) {
            j = j["config"];
        }
        ProjectConfig cfg = parse_project_config(nlohmann::json::parse(j.dump()));
        load(compile_project(cfg));
        return json_response(project_summary(*project()));
    }
    if (is({"api", "model"})) {
        expect("GET");
        auto p = require_project();
        ordered_json out = model_to_json(*p->model);
        out["diagnostics"] = diagnostics_to_json(p->diagnostics);
        return json_response(out);
    }
    if (is({"api", "graph", "state", "*"})) {
        expect("GET");
        auto p = require_project();
        try {
            return HttpResponse{200, "text/vnd.graphviz", state_diagram_text(*p->model, parts[3])};
        } catch (const PremaError& e) {
            throw HttpError{404, std::string(code_name(e.code())), e.what()};
        }
    }
    if (is({"api", "graph", "deps", "*"})) {
        expect("GET");
        auto p = require_project();
        int depth = 1;
        auto it = query.find("depth");
        if (it != query.end()) {
            try {
                std::size_t used = 0;
                depth = std::stoi(it->second, &used);
                if (used != it->second.size()) {
                    throw std::invalid_argument("depth");
                }
            } catch (const std::exception&) {
                throw HttpError{400, "E003", "depth must be an integer"};
            }
        }
        try {
            return HttpResponse{200, "text/vnd.graphviz", dependency_diagram_text(*p->model, parts[3], depth)};
        } catch (const PremaError& e) {
            throw HttpError{404, std::string(code_name(e.code())), e.what()};
        }
    }
    if (is({"api", "sim", "sessions"})) {
        expect("POST");
        auto p = require_project();
        if (!p->model->schedulable) {
            throw HttpError{400, "E201", "the model has a circular definition and cannot be simulated"};
        }
        std::shared_ptr<const Model> model(p, p->model.get());
        std::string id = sessions_.create(model);
        return json_response(ordered_json{{"session_id", id}});
    }
    if (is({"api", "sim", "sessions", "*"}) || is({"api", "sim", "sessions", "*", "step"})) {
        const std::string& id = parts[3];
        if (!sessions_.exists(id)) {
            throw HttpError{404, "E003", "unknown session '" + id + "'"};
        }
        auto model = sessions_.model_of(id);
        if (parts.size() == 4) {
            expect("GET");
            return json_response(snapshot_json(sessions_.state(id), *model));
        }
        expect("POST");
        ordered_json j = parse_body(body);
        if (!j.is_object() || !j.contains("inputs")) {
            throw HttpError{400, "E003", "missing field 'inputs'"};
        }
        Valuation inputs = inputs_from_json(j["inputs"], *model);
        std::optional<RuntimeFault> fault;
        CycleRecord rec = sessions_.step(id, inputs, &fault);
        if (fault) {
            return json_response(ordered_json{{"cycle", rec.cycle}, {"fault", fault_to_json(*fault)}});
        }
        ordered_json fired = ordered_json::array();
        for (const auto& f : rec.fired) {
            fired.push_back(fired_to_json(f));
        }
        return json_response(ordered_json{
            {"cycle", rec.cycle}, {"post", valuation_to_json(rec.post, *model)}, {"fired", std::move(fired)}});
    }
    if (is({"api", "verify"})) {
        expect("POST");
        auto p = require_project();
        return json_response(run_verify(*p->model, verify_request_from_json(parse_body(body))));
    }
    if (is({"api", "testgen"})) {
        expect("POST");
        auto p = require_project();
        ordered_json j = parse_body(body);
        std::optional<std::string> task;
        if (j.contains("task_id") && !j["task_id"].is_null()) {
            if (!j["task_id"].is_string()) {
                throw HttpError{400, "E003", "'task_id' must be a string"};
            }
            task = j["task_id"].get<std::string>();
            if (p->model->find_task(*task) == nullptr) {
                throw HttpError{404, "E003", "unknown task '" + *task + "'"};
            }
        }
        return json_response(run_testgen(*p->model, task));
    }
    std::ostringstream path;
    for (const auto& s : parts) {
        path << "/" << s;
    }
    throw HttpError{404, "E003", "no route for " + method + " " + path.str()};
}

int resolve_port(std::optional<int> flag) {
    if (const char* env = std::getenv("PREMA_PORT"); env != nullptr && *env != '\0') {
        try {
            std::size_t used = 0;
            int port = std::stoi(env, &used);
            if (used == std::string(env).size() && port > 0 && port < 65536) {
                return port;
            }
        } catch (const std::exception&) {
        }
        throw PremaError(Code::E003, std::string("PREMA_PORT is not a valid port: ") + env);
    }
    return flag.value_or(kDefaultPort);
}

} // namespace prema
