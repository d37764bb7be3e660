#include "prema/project.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace prema {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PremaError(Code::E002, "cannot read file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProjectConfig parse_project_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) {
        throw PremaError(Code::E003, "project config must be a JSON object");
    }
    ProjectConfig cfg;
    cfg.base_dir = base_dir;
    if (!j.contains("documents") || !j.at("documents").is_array()) {
        throw PremaError(Code::E003, "project config requires a \"documents\" array");
    }
    for (const auto& entry : j.at("documents")) {
        if (entry.is_string()) {
            cfg.documents.push_back(DocumentSource{entry.get<std::string>(), std::nullopt});
        } else if (entry.is_object() && entry.contains("path") && entry.at("path").is_string()) {
            DocumentSource src{entry.at("path").get<std::string>(), std::nullopt};
            if (entry.contains("text")) {
                if (!entry.at("text").is_string()) {
                    throw PremaError(Code::E003, "document \"text\" must be a string");
                }
                src.text = entry.at("text").get<std::string>();
            }
            cfg.documents.push_back(std::move(src));
        } else {
            throw PremaError(Code::E003, "each document entry must be a path string or {\"path\", \"text\"}");
        }
    }
    auto read_int = [&](const char* key, std::int64_t& out) {
        if (j.contains(key)) {
            if (!j.at(key).is_number_integer()) {
                throw PremaError(Code::E003, std::string("\"") + key + "\" must be an integer");
            }
            out = j.at(key).get<std::int64_t>();
        }
    };
    read_int("int_min", cfg.int_bounds.min);
    read_int("int_max", cfg.int_bounds.max);
    if (cfg.int_bounds.min > cfg.int_bounds.max) {
        throw PremaError(Code::E003, "int_min must not exceed int_max");
    }
    if (j.contains("base_units")) {
        const auto& units = j.at("base_units");
        if (!units.is_array()) {
            throw PremaError(Code::E003, "\"base_units\" must be an array of strings");
        }
        cfg.base_units.clear();
        for (const auto& u : units) {
            if (!u.is_string()) {
                throw PremaError(Code::E003, "\"base_units\" must be an array of strings");
            }
            cfg.base_units.push_back(u.get<std::string>());
        }
    }
    return cfg;
}

ProjectConfig load_project_config(const std::filesystem::path& path) {
    if (path.extension() == ".md") {
        if (!std::filesystem::exists(path)) {
            throw PremaError(Code::E002, "cannot read file '" + path.string() + "'");
        }
        ProjectConfig cfg;
        cfg.documents.push_back(DocumentSource{path.filename().string(), std::nullopt});
        cfg.base_dir = path.parent_path();
        return cfg;
    }
    std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PremaError(Code::E003, "malformed project config '" + path.string() + "': " + e.what());
    }
    return parse_project_config(j, path.parent_path());
}

LoadedProject project_load(const ProjectConfig& config) {
    LoadedProject project;
    project.config = config;
    if (config.documents.empty()) {
        project.diagnostics.push_back(
            Diagnostic{Code::W002, "", "", {}, "project lists no documents", {}});
    }
    std::map<std::string, int> stems;
    for (const auto& src : config.documents) {
        std::filesystem::path full = config.base_dir / src.path;
        std::string text = src.text ? *src.text : read_file(full);
        IngestResult ingested = ingest_document(text, src.path);
        std::string stem = std::filesystem::path(src.path).stem().string();
        int n = ++stems[stem];
        if (n > 1) {
            stem += "-" + std::to_string(n);
        }
        namespace_sections(ingested.document, stem);
        project.diagnostics.insert(project.diagnostics.end(), ingested.diagnostics.begin(),
                                   ingested.diagnostics.end());
        project.documents.push_back(LoadedDocument{std::move(ingested.document), stem});
    }
    return project;
}

LoadedProject project_load(const std::filesystem::path& config_path) {
    return project_load(load_project_config(config_path));
}

} // namespace prema
