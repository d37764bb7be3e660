#pragma once

#include "prema/diagnostic.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prema {

// A run of TAB-marked lines. `text` has exactly one leading TAB removed from
// every line; deeper TABs remain and carry indentation.
struct FormalBlock {
    std::string section_id;
    int start_line = 0;
    int end_line = 0;
    std::string text;
};

struct ProseSpan {
    int start_line = 0;
    int end_line = 0;
    std::string text;
};

using BodyItem = std::variant<ProseSpan, FormalBlock>;

struct Section {
    std::string id;
    std::string title;
    int level = 1;
    int heading_line = 0; // 0 for the implicit preamble section
    std::vector<BodyItem> body;
    std::vector<Section> children;
};

struct RequirementDocument {
    std::string path;
    int total_lines = 0;
    std::vector<Section> sections;
};

struct IngestResult {
    RequirementDocument document;
    Diagnostics diagnostics;
};

IngestResult ingest_document(std::string_view source, std::string_view path);

// Markdown text that ingests back to the same section tree.
std::string serialize_document(const RequirementDocument& doc);

// Formal blocks in document order.
std::vector<const FormalBlock*> formal_blocks(const RequirementDocument& doc);

// Depth-first list of every section.
std::vector<const Section*> all_sections(const RequirementDocument& doc);

// Lowercase, alphanumerics plus '.', '_' kept, runs of anything else become '-'.
std::string slugify(std::string_view title);

// Prefixes every section id (and block section_id) with "<prefix>/".
void namespace_sections(RequirementDocument& doc, std::string_view prefix);

} // namespace prema
