#pragma once

#include "prema/model.hpp"
#include "prema/project.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace prema {

inline constexpr const char* kToolVersion = "0.1.0";

// Ingested documents compiled into one checked model.
struct CompiledProject {
    ProjectConfig config;
    std::vector<LoadedDocument> documents;
    std::shared_ptr<const Model> model;
    // Ingest, syntax, model, type and dimension diagnostics in that order.
    Diagnostics diagnostics;
    // Tasks left out of the model because their block has syntax errors.
    std::vector<std::string> rejected_tasks;

    [[nodiscard]] bool has_errors() const;
    // Error diagnostics attributed to any of `task_ids`.
    [[nodiscard]] Diagnostics errors_in(const std::set<std::string>& task_ids) const;
};

// One task per formal block; a section's second block is "<id>#2" and so on.
CompiledProject compile_project(const LoadedProject& loaded);
CompiledProject compile_project(const ProjectConfig& config);
CompiledProject compile_project(const std::filesystem::path& config_path);

// Single in-memory document, mostly for tests and bindings.
CompiledProject compile_markdown(const std::string& markdown, const std::string& name = "doc",
                                 const IntBounds& bounds = {});

nlohmann::ordered_json diagnostic_to_json(const Diagnostic& d);
nlohmann::ordered_json diagnostics_to_json(const Diagnostics& diags);
// {"E001": 5, ...} over errors and warnings, sorted by code.
nlohmann::ordered_json code_counts(const Diagnostics& diags);

// "prema-model/1"
nlohmann::ordered_json model_to_json(const Model& model);

// "prema-check/1": diagnostics plus counts.
nlohmann::ordered_json check_to_json(const CompiledProject& project);

} // namespace prema
