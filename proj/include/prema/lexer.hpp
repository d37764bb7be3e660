#pragma once

#include "prema/diagnostic.hpp"
#include "prema/document.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prema {

enum class TokenKind : std::uint8_t {
    Ident,
    IntLit,
    RealLit,
    BoolLit,
    Keyword,
    Op,
    Colon,
    LParen,
    RParen,
    Newline,
    Indent,
    Dedent,
    Eof,
};

std::string_view token_kind_name(TokenKind k);

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string lexeme;
    SourcePos pos;
};

struct LexResult {
    std::vector<Token> tokens;
    Diagnostics diagnostics;
};

bool is_keyword(std::string_view word);

// Source coordinates are reported in document space: block line i maps to
// start_line + i and columns shift by the stripped marker TAB.
LexResult lex_block(const FormalBlock& block, std::string_view task_id = {}, std::string_view file = {});

// Lexes free-standing text (properties, assumptions) with 1-based positions.
LexResult lex_text(std::string_view text, int first_line = 1, int col_offset = 0);

} // namespace prema
