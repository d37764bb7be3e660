#pragma once

#include "prema/ast.hpp"
#include "prema/lexer.hpp"

#include <set>
#include <string_view>
#include <vector>

namespace prema {

struct ParseResult {
    TaskAst ast; // best-effort: statements that failed to parse are dropped
    Diagnostics diagnostics;
};

// `quiet_lines` lists source lines that already carry a diagnostic (usually
// from the lexer); at most one E001 is reported per line.
ParseResult parse_block(const std::vector<Token>& tokens, std::string_view task_id,
                        std::string_view file = {}, const std::set<int>& quiet_lines = {});

// Lex + parse of one formal block, diagnostics merged and deduplicated.
ParseResult compile_block(const FormalBlock& block, std::string_view task_id, std::string_view file = {});

struct ExprParseResult {
    ExprPtr expr; // null when diagnostics contain an error
    Diagnostics diagnostics;
};

// Single expression; `allow_primes` admits post-state references (x').
ExprParseResult parse_expression(std::string_view text, bool allow_primes = true);

} // namespace prema
