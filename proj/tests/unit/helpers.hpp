#pragma once

#include "oracles.hpp"

#include <initializer_list>
#include <string>

namespace prema::test {

// One section per entry; every line of a block gets the marker TAB.
inline std::string doc(std::initializer_list<std::pair<std::string, std::initializer_list<std::string>>> sections) {
    std::string out = "# Fixture\n";
    for (const auto& [title, lines] : sections) {
        out += "\n## " + title + "\n\n";
        for (const auto& l : lines) {
            out += "\t" + l + "\n";
        }
    }
    return out;
}

inline CompiledProject compile(std::initializer_list<std::pair<std::string, std::initializer_list<std::string>>> sections,
                               const IntBounds& bounds = {}) {
    return compile_markdown(doc(sections), "doc", bounds);
}

inline std::vector<std::string> codes(const Diagnostics& diags) {
    std::vector<std::string> out;
    for (const auto& d : diags) {
        out.emplace_back(code_name(d.code));
    }
    return out;
}

} // namespace prema::test
