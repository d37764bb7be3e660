#include "prema/diagnostic.hpp"

#include <array>
#include <sstream>

namespace prema {

namespace {

constexpr std::array<std::string_view, 15> kCodeNames = {
    "E001", "E002", "E003", "E101", "E102", "E103", "E104", "E105",
    "E106", "E107", "E201", "E301", "E302", "W001", "W002",
};

} // namespace

std::string_view code_name(Code code) {
    return kCodeNames.at(static_cast<std::size_t>(code));
}

std::optional<Code> parse_code(std::string_view text) {
    for (std::size_t i = 0; i < kCodeNames.size(); ++i) {
        if (kCodeNames[i] == text) {
            return static_cast<Code>(i);
        }
    }
    return std::nullopt;
}

Severity severity_of(Code code) {
    return code_name(code).front() == 'W' ? Severity::Warning : Severity::Error;
}

bool has_errors(const Diagnostics& diags) {
    for (const auto& d : diags) {
        if (d.is_error()) {
            return true;
        }
    }
    return false;
}

std::map<std::string, int> count_by_code(const Diagnostics& diags) {
    std::map<std::string, int> counts;
    for (const auto& d : diags) {
        ++counts[std::string(code_name(d.code))];
    }
    return counts;
}

std::string to_string(const Diagnostic& d) {
    std::ostringstream os;
    if (!d.file.empty()) {
        os << d.file << ':';
    }
    if (d.pos.line > 0) {
        os << d.pos.line << ':' << d.pos.col << ':';
    }
    if (os.tellp() > 0) {
        os << ' ';
    }
    os << (d.is_error() ? "error " : "warning ") << code_name(d.code) << ": " << d.message;
    if (!d.task_id.empty()) {
        os << " [" << d.task_id << ']';
    }
    return os.str();
}

} // namespace prema
