#pragma once

#include "prema/diagnostic.hpp"
#include "prema/document.hpp"
#include "prema/value.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prema {

struct DocumentSource {
    std::string path;                // as listed in the config
    std::optional<std::string> text; // inline content (service uploads)
};

struct ProjectConfig {
    std::vector<DocumentSource> documents;
    IntBounds int_bounds;
    std::vector<std::string> base_units{"m", "s", "kg"};
    std::filesystem::path base_dir; // relative document paths resolve here
};

// {"documents": [string | {"path", "text"}], "int_min", "int_max", "base_units"}
// Throws PremaError(E003) on schema violations.
ProjectConfig parse_project_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

// A .json path loads a config file; a .md path is a one-document project.
// Throws PremaError(E002) when unreadable, E003 when malformed.
ProjectConfig load_project_config(const std::filesystem::path& path);

struct LoadedDocument {
    RequirementDocument document;
    std::string stem; // section-id namespace
};

struct LoadedProject {
    ProjectConfig config;
    std::vector<LoadedDocument> documents;
    Diagnostics diagnostics; // ingest diagnostics plus W002 for an empty list
};

// Ingests every listed document in order; section ids become "<stem>/<slug>".
// Throws PremaError(E002) naming the first missing file.
LoadedProject project_load(const ProjectConfig& config);
LoadedProject project_load(const std::filesystem::path& config_path);

std::string read_file(const std::filesystem::path& path);

} // namespace prema
