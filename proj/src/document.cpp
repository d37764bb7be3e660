#include "prema/document.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>

namespace prema {

namespace {

std::vector<std::string> split_lines(std::string_view source) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < source.size()) {
        auto nl = source.find('\n', start);
        std::string_view line = source.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.emplace_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        start = nl + 1;
    }
    return lines;
}

bool is_blank(std::string_view line) {
    for (char c : line) {
        if (c != ' ' && c != '\t') {
            return false;
        }
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

struct Heading {
    int level = 0;
    std::string title;
};

// ATX heading per CommonMark: up to three spaces, 1-6 '#', then space or EOL.
std::optional<Heading> match_heading(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && i < 3 && line[i] == ' ') {
        ++i;
    }
    std::size_t hashes = 0;
    while (i + hashes < line.size() && line[i + hashes] == '#') {
        ++hashes;
    }
    if (hashes == 0 || hashes > 6) {
        return std::nullopt;
    }
    std::size_t rest = i + hashes;
    if (rest < line.size() && line[rest] != ' ' && line[rest] != '\t') {
        return std::nullopt;
    }
    std::string_view title = trim(line.substr(rest));
    // Optional closing sequence: a run of '#' preceded by a space.
    auto last = title.find_last_not_of('#');
    if (last == std::string_view::npos) {
        title = {};
    } else if (last + 1 < title.size() && (title[last] == ' ' || title[last] == '\t')) {
        title = trim(title.substr(0, last + 1));
    }
    return Heading{static_cast<int>(hashes), std::string(title)};
}

struct Fence {
    char marker = 0;
    std::size_t length = 0;
};

std::optional<Fence> match_fence(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && i < 3 && line[i] == ' ') {
        ++i;
    }
    if (i >= line.size() || (line[i] != '`' && line[i] != '~')) {
        return std::nullopt;
    }
    char marker = line[i];
    std::size_t n = 0;
    while (i + n < line.size() && line[i + n] == marker) {
        ++n;
    }
    if (n < 3) {
        return std::nullopt;
    }
    return Fence{marker, n};
}

bool starts_with_four_spaces(std::string_view line) {
    return line.size() >= 4 && line.substr(0, 4) == "    " && !is_blank(line);
}

class Builder {
public:
    Builder(std::string_view path) : path_(path) {}

    IngestResult build(const std::vector<std::string>& lines) {
        doc_.path = path_;
        doc_.total_lines = static_cast<int>(lines.size());

        std::optional<Fence> fence;
        bool prev_blank_or_heading = true;
        bool in_space_run = false;
        std::size_t i = 0;
        while (i < lines.size()) {
            const std::string& line = lines[i];
            int lineno = static_cast<int>(i) + 1;

            if (fence) {
                add_prose(lineno, line);
                auto close = match_fence(line);
                if (close && close->marker == fence->marker && close->length >= fence->length &&
                    is_blank(std::string_view(line).substr(line.find(fence->marker) + close->length))) {
                    fence.reset();
                }
                ++i;
                continue;
            }

            if (!line.empty() && line.front() == '\t') {
                i = take_formal_run(lines, i);
                prev_blank_or_heading = false;
                in_space_run = false;
                continue;
            }

            if (auto f = match_fence(line)) {
                fence = f;
                add_prose(lineno, line);
                prev_blank_or_heading = false;
                in_space_run = false;
                ++i;
                continue;
            }

            if (auto h = match_heading(line)) {
                if (h->title.empty()) {
                    diags_.push_back(Diagnostic{Code::E001, "", path_, SourcePos{lineno, 1},
                                                "malformed heading: empty title", {}});
                    add_prose(lineno, line);
                } else {
                    open_section(*h, lineno);
                }
                prev_blank_or_heading = true;
                in_space_run = false;
                ++i;
                continue;
            }

            if (starts_with_four_spaces(line)) {
                if (!in_space_run && prev_blank_or_heading) {
                    diags_.push_back(Diagnostic{Code::W001, "", path_, SourcePos{lineno, 1},
                                                "space-indented block is treated as prose; formal "
                                                "specifications must start with a TAB",
                                                {}});
                    in_space_run = true;
                }
            } else if (!is_blank(line)) {
                in_space_run = false;
            }
            prev_blank_or_heading = is_blank(line);
            add_prose(lineno, line);
            ++i;
        }
        close_to_level(0);
        return IngestResult{std::move(doc_), std::move(diags_)};
    }

private:
    std::size_t take_formal_run(const std::vector<std::string>& lines, std::size_t first) {
        std::size_t last = first; // last TAB-prefixed line of the run
        std::size_t j = first + 1;
        while (j < lines.size()) {
            const std::string& l = lines[j];
            if (!l.empty() && l.front() == '\t') {
                last = j;
                ++j;
            } else if (is_blank(l)) {
                ++j;
            } else {
                break;
            }
        }
        FormalBlock block;
        block.start_line = static_cast<int>(first) + 1;
        block.end_line = static_cast<int>(last) + 1;
        for (std::size_t k = first; k <= last; ++k) {
            const std::string& l = lines[k];
            if (k > first) {
                block.text += '\n';
            }
            if (!l.empty() && l.front() == '\t') {
                block.text += l.substr(1);
            }
        }
        Section& sec = current_section();
        block.section_id = sec.id;
        sec.body.emplace_back(std::move(block));
        return last + 1;
    }

    void add_prose(int lineno, const std::string& line) {
        Section& sec = current_section();
        if (!sec.body.empty()) {
            if (auto* p = std::get_if<ProseSpan>(&sec.body.back()); p != nullptr && p->end_line + 1 == lineno) {
                p->end_line = lineno;
                p->text += '\n';
                p->text += line;
                return;
            }
        }
        sec.body.emplace_back(ProseSpan{lineno, lineno, line});
    }

    Section& current_section() {
        if (stack_.empty()) {
            Section pre;
            pre.id = unique_id("preamble");
            pre.level = 1;
            stack_.push_back(std::move(pre));
        }
        return stack_.back();
    }

    void open_section(const Heading& h, int lineno) {
        if (!stack_.empty() && stack_.front().heading_line == 0) {
            close_to_level(0);
        }
        close_to_level(h.level);
        Section sec;
        sec.id = unique_id(slugify(h.title));
        sec.title = h.title;
        sec.level = h.level;
        sec.heading_line = lineno;
        stack_.push_back(std::move(sec));
    }

    // Pops every open section whose level is >= level, attaching it to its parent.
    void close_to_level(int level) {
        while (!stack_.empty() && stack_.back().level >= level) {
            Section done = std::move(stack_.back());
            stack_.pop_back();
            if (stack_.empty()) {
                doc_.sections.push_back(std::move(done));
            } else {
                stack_.back().children.push_back(std::move(done));
            }
        }
    }

    std::string unique_id(const std::string& base) {
        std::string root = base.empty() ? "section" : base;
        int& n = seen_[root];
        ++n;
        std::string id = n == 1 ? root : root + "-" + std::to_string(n);
        while (used_.count(id) != 0) {
            id = root + "-" + std::to_string(++n);
        }
        used_.insert(id);
        return id;
    }

    std::string path_;
    RequirementDocument doc_;
    Diagnostics diags_;
    std::vector<Section> stack_;
    std::map<std::string, int> seen_;
    std::set<std::string> used_;
};

void serialize_section(const Section& sec, std::string& out, bool& first) {
    auto emit = [&](const std::string& line) {
        if (!first) {
            out += '\n';
        }
        first = false;
        out += line;
    };
    if (sec.heading_line > 0) {
        emit(std::string(static_cast<std::size_t>(sec.level), '#') + " " + sec.title);
    }
    for (const auto& item : sec.body) {
        if (const auto* p = std::get_if<ProseSpan>(&item)) {
            emit(p->text);
        } else {
            const auto& b = std::get<FormalBlock>(item);
            std::size_t start = 0;
            while (true) {
                auto nl = b.text.find('\n', start);
                std::string line = b.text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
                emit(line.empty() ? std::string() : "\t" + line);
                if (nl == std::string::npos) {
                    break;
                }
                start = nl + 1;
            }
        }
    }
    for (const auto& child : sec.children) {
        serialize_section(child, out, first);
    }
}

void collect_blocks(const Section& sec, std::vector<const FormalBlock*>& out) {
    for (const auto& item : sec.body) {
        if (const auto* b = std::get_if<FormalBlock>(&item)) {
            out.push_back(b);
        }
    }
    for (const auto& child : sec.children) {
        collect_blocks(child, out);
    }
}

void collect_sections(const Section& sec, std::vector<const Section*>& out) {
    out.push_back(&sec);
    for (const auto& child : sec.children) {
        collect_sections(child, out);
    }
}

void prefix_section(Section& sec, const std::string& prefix) {
    sec.id = prefix + sec.id;
    for (auto& item : sec.body) {
        if (auto* b = std::get_if<FormalBlock>(&item)) {
            b->section_id = sec.id;
        }
    }
    for (auto& child : sec.children) {
        prefix_section(child, prefix);
    }
}

} // namespace

IngestResult ingest_document(std::string_view source, std::string_view path) {
    Builder builder(path);
    return builder.build(split_lines(source));
}

std::string serialize_document(const RequirementDocument& doc) {
    std::string out;
    bool first = true;
    for (const auto& sec : doc.sections) {
        serialize_section(sec, out, first);
    }
    return out;
}

std::vector<const FormalBlock*> formal_blocks(const RequirementDocument& doc) {
    std::vector<const FormalBlock*> out;
    for (const auto& sec : doc.sections) {
        collect_blocks(sec, out);
    }
    return out;
}

std::vector<const Section*> all_sections(const RequirementDocument& doc) {
    std::vector<const Section*> out;
    for (const auto& sec : doc.sections) {
        collect_sections(sec, out);
    }
    return out;
}

std::string slugify(std::string_view title) {
    std::string out;
    bool dash = false;
    for (char ch : title) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) != 0 || c == '.' || c == '_') {
            if (dash && !out.empty()) {
                out += '-';
            }
            dash = false;
            out += static_cast<char>(std::tolower(c));
        } else {
            dash = true;
        }
    }
    return out;
}

void namespace_sections(RequirementDocument& doc, std::string_view prefix) {
    std::string p = std::string(prefix) + "/";
    for (auto& sec : doc.sections) {
        prefix_section(sec, p);
    }
}

} // namespace prema
