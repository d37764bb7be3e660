#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prema {

// Stable error taxonomy. E* codes are errors, W* codes are warnings.
enum class Code : std::uint8_t {
    E001, // syntax
    E002, // io
    E003, // config / api
    E101, // type
    E102, // dimension
    E103, // state variable must be enum
    E104, // undeclared variable
    E105, // duplicate declaration
    E106, // assignment to input
    E107, // state variable assigned a non-literal
    E201, // circular definition
    E301, // divide or modulo by zero
    E302, // int overflow
    W001, // space-indented text that looks like a formal block
    W002, // empty project
};

enum class Severity : std::uint8_t { Error, Warning };

std::string_view code_name(Code code);
std::optional<Code> parse_code(std::string_view text);
Severity severity_of(Code code);

struct SourcePos {
    int line = 0;
    int col = 0;

    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

struct RelatedLocation {
    std::string task_id;
    SourcePos pos;
    std::string note;
};

struct Diagnostic {
    Code code = Code::E001;
    std::string task_id;
    std::string file;
    SourcePos pos;
    std::string message;
    std::vector<RelatedLocation> related;

    [[nodiscard]] Severity severity() const { return severity_of(code); }
    [[nodiscard]] bool is_error() const { return severity() == Severity::Error; }
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& diags);
std::map<std::string, int> count_by_code(const Diagnostics& diags);

// "file:line:col: error E104: message"
std::string to_string(const Diagnostic& d);

// Thrown for failures that abort an operation (missing files, malformed
// configuration, bad API input). Carries the same code taxonomy.
class PremaError : public std::runtime_error {
public:
    PremaError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] Code code() const { return code_; }

private:
    Code code_;
};

} // namespace prema
