#include "prema/service.hpp"
#include "prema/verifier.hpp"
#include "prema/workspace.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

namespace py = pybind11;
using namespace prema;
using nlohmann::ordered_json;

namespace {

// Compiled projects are immutable; Python shares one through this handle.
struct Handle {
    std::shared_ptr<const CompiledProject> project;
    const CompiledProject* operator->() const { return project.get(); }
    const CompiledProject& operator*() const { return *project; }
};

Handle wrap(CompiledProject p) {
    return Handle{std::make_shared<const CompiledProject>(std::move(p))};
}

std::string dump(const ordered_json& j) {
    return j.dump();
}

std::string simulate(const Handle& p, const std::string& csv, const std::optional<std::vector<std::string>>& tasks) {
    SimulationRun run = simulate_project(*p, csv, tasks);
    ordered_json out;
    out["schedule"] = run.schedule;
    out["blocking"] = diagnostics_to_json(run.blocking);
    out["trace"] = run.blocking.empty() ? trace_to_json(run.trace, *p->model) : ordered_json(nullptr);
    return dump(out);
}

std::string verify_json(const Handle& p, const std::string& property, const std::string& assume,
                   const std::optional<std::vector<std::string>>& tasks, int depth, bool runtime_safety) {
    VerifyRequest req;
    req.property = property;
    req.assumption = assume;
    req.selection = tasks;
    req.depth = depth;
    req.runtime_safety = runtime_safety;
    return dump(run_verify(*p->model, req));
}

std::string smtlib_text(const Handle& p, const std::string& property, const std::string& assume,
                   const std::optional<std::vector<std::string>>& tasks, int depth) {
    VerifyOptions options;
    options.selection = tasks;
    options.depth = depth;
    return property_smtlib(*p->model, property, assume, options);
}

} // namespace

PYBIND11_MODULE(_prema, m) {
    m.doc() = "Native core of the prema requirements toolchain";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result(
        [&]() { return py::object(py::exception<PremaError>(m, "PremaError", PyExc_RuntimeError)); });
    // Raised with args (code, message).
    py::register_exception_translator([](std::exception_ptr ep) {
        try {
            if (ep) {
                std::rethrow_exception(ep);
            }
        } catch (const PremaError& e) {
            py::tuple args = py::make_tuple(std::string(code_name(e.code())), e.what());
            PyErr_SetObject(error_type.get_stored().ptr(), args.ptr());
        }
    });

    py::class_<Handle>(m, "Project")
        .def_property_readonly("schedulable", [](const Handle& p) { return p->model->schedulable; })
        .def_property_readonly("task_ids", [](const Handle& p) {
            std::vector<std::string> ids;
            for (const auto& t : p->model->tasks) {
                ids.push_back(t.task_id);
            }
            return ids;
        });

    m.def(
        "load",
        [](const std::filesystem::path& config) { return wrap(compile_project(config)); },
        py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "compile_markdown",
        [](const std::string& text, const std::string& name, std::int64_t int_min, std::int64_t int_max) {
            return wrap(compile_markdown(text, name, IntBounds{int_min, int_max}));
        },
        py::arg("text"), py::arg("name") = "doc", py::arg("int_min") = IntBounds{}.min,
        py::arg("int_max") = IntBounds{}.max);

    m.def("summary", [](const Handle& p) { return dump(project_summary(*p)); });
    m.def("check", [](const Handle& p) { return dump(check_to_json(*p)); });
    m.def("model", [](const Handle& p) { return dump(model_to_json(*p->model)); });
    m.def("state_diagram", [](const Handle& p, const std::string& var) { return state_diagram_text(*p->model, var); },
          py::arg("project"), py::arg("var"));
    m.def(
        "dependency_diagram",
        [](const Handle& p, const std::string& var, int depth) { return dependency_diagram_text(*p->model, var, depth); },
        py::arg("project"), py::arg("var"), py::arg("depth") = 0);
    m.def("simulate", &simulate, py::arg("project"), py::arg("csv"), py::arg("tasks") = std::nullopt,
          py::call_guard<py::gil_scoped_release>());
    m.def(
        "testgen",
        [](const Handle& p, const std::optional<std::string>& task) { return dump(run_testgen(*p->model, task)); },
        py::arg("project"), py::arg("task") = std::nullopt, py::call_guard<py::gil_scoped_release>());
    m.def("verify", &verify_json, py::arg("project"), py::arg("property") = "", py::arg("assume") = "",
          py::arg("tasks") = std::nullopt, py::arg("depth") = 1, py::arg("runtime_safety") = false,
          py::call_guard<py::gil_scoped_release>());
    m.def("smtlib", &smtlib_text, py::arg("project"), py::arg("property"), py::arg("assume") = "",
          py::arg("tasks") = std::nullopt, py::arg("depth") = 1);
}
