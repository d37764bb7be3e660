#include "prema/lexer.hpp"

#include <array>
#include <cctype>

namespace prema {

namespace {

constexpr std::array<std::string_view, 14> kKeywords = {
    "var", "bool", "int", "real", "enum", "input", "output",
    "mode", "if", "elif", "else", "and", "or", "not",
};

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

class Lexer {
public:
    Lexer(int first_line, int col_offset, std::string_view task_id, std::string_view file)
        : first_line_(first_line), col_offset_(col_offset), task_id_(task_id), file_(file) {}

    LexResult run(std::string_view text) {
        std::size_t start = 0;
        int index = 0;
        while (start <= text.size()) {
            auto nl = text.find('\n', start);
            std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            lex_line(line, first_line_ + index);
            ++index;
            if (nl == std::string_view::npos) {
                break;
            }
            start = nl + 1;
        }
        SourcePos end{first_line_ + index, 1};
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "", end);
        }
        push(TokenKind::Eof, "", end);
        return LexResult{std::move(tokens_), std::move(diags_)};
    }

private:
    void lex_line(std::string_view line, int lineno) {
        std::size_t i = 0;
        while (i < line.size() && line[i] == '\t') {
            ++i;
        }
        std::size_t tabs = i;
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t') {
                blank = false;
                break;
            }
        }
        if (blank) {
            return;
        }
        if (line[i] == ' ') {
            error(lineno, static_cast<int>(i) + 1,
                  tabs == 0 ? "indentation must use TAB characters, not spaces"
                            : "mixed space indentation after TAB");
            return;
        }
        SourcePos line_start{lineno, col(i)};
        adjust_indent(static_cast<int>(tabs), line_start);

        std::size_t emitted = tokens_.size();
        while (i < line.size()) {
            char c = line[i];
            if (c == ' ' || c == '\t') {
                ++i;
                continue;
            }
            SourcePos pos{lineno, col(i)};
            if (ident_start(c)) {
                std::size_t j = i;
                while (j < line.size() && ident_char(line[j])) {
                    ++j;
                }
                std::string word(line.substr(i, j - i));
                TokenKind kind = TokenKind::Ident;
                if (word == "True" || word == "False") {
                    kind = TokenKind::BoolLit;
                } else if (is_keyword(word)) {
                    kind = TokenKind::Keyword;
                }
                push(kind, std::move(word), pos);
                i = j;
                continue;
            }
            if (digit(c)) {
                std::size_t j = i;
                while (j < line.size() && digit(line[j])) {
                    ++j;
                }
                TokenKind kind = TokenKind::IntLit;
                if (j < line.size() && line[j] == '.') {
                    std::size_t k = j + 1;
                    while (k < line.size() && digit(line[k])) {
                        ++k;
                    }
                    if (k == j + 1) {
                        error(lineno, col(j), "unterminated real literal '" + std::string(line.substr(i, k - i)) + "'");
                        break;
                    }
                    j = k;
                    kind = TokenKind::RealLit;
                }
                if (j < line.size() && ident_start(line[j])) {
                    error(lineno, col(j), "malformed number '" + std::string(line.substr(i, j - i + 1)) + "'");
                    break;
                }
                push(kind, std::string(line.substr(i, j - i)), pos);
                i = j;
                continue;
            }
            if (c == ':') {
                push(TokenKind::Colon, ":", pos);
                ++i;
                continue;
            }
            if (c == '(') {
                push(TokenKind::LParen, "(", pos);
                ++i;
                continue;
            }
            if (c == ')') {
                push(TokenKind::RParen, ")", pos);
                ++i;
                continue;
            }
            if (i + 1 < line.size()) {
                std::string_view two = line.substr(i, 2);
                if (two == "==" || two == "!=" || two == "<=" || two == ">=") {
                    push(TokenKind::Op, std::string(two), pos);
                    i += 2;
                    continue;
                }
            }
            static constexpr std::string_view kSingle = "=<>+-*/%{}[],^'";
            if (kSingle.find(c) != std::string_view::npos) {
                push(TokenKind::Op, std::string(1, c), pos);
                ++i;
                continue;
            }
            std::string shown = static_cast<unsigned char>(c) < 0x80 ? std::string(1, c) : "non-ASCII byte";
            error(lineno, col(i), "illegal character '" + shown + "'");
            break;
        }
        if (tokens_.size() > emitted && tokens_.back().kind != TokenKind::Indent &&
            tokens_.back().kind != TokenKind::Dedent) {
            push(TokenKind::Newline, "", SourcePos{lineno, col(line.size())});
        }
    }

    void adjust_indent(int tabs, SourcePos pos) {
        if (tabs > indents_.back()) {
            indents_.push_back(tabs);
            push(TokenKind::Indent, "", pos);
            return;
        }
        while (tabs < indents_.back()) {
            indents_.pop_back();
            push(TokenKind::Dedent, "", pos);
        }
        if (tabs > indents_.back()) {
            error(pos.line, pos.col, "dedent does not match any outer indentation level");
            indents_.push_back(tabs);
            push(TokenKind::Indent, "", pos);
        }
    }

    int col(std::size_t index) const {
        return static_cast<int>(index) + 1 + col_offset_;
    }

    void push(TokenKind kind, std::string lexeme, SourcePos pos) {
        tokens_.push_back(Token{kind, std::move(lexeme), pos});
    }

    void error(int line, int column, std::string message) {
        diags_.push_back(Diagnostic{Code::E001, task_id_, file_, SourcePos{line, column}, std::move(message), {}});
    }

    int first_line_;
    int col_offset_;
    std::string task_id_;
    std::string file_;
    std::vector<int> indents_{0};
    std::vector<Token> tokens_;
    Diagnostics diags_;
};

} // namespace

std::string_view token_kind_name(TokenKind k) {
    switch (k) {
    case TokenKind::Ident: return "IDENT";
    case TokenKind::IntLit: return "INT_LIT";
    case TokenKind::RealLit: return "REAL_LIT";
    case TokenKind::BoolLit: return "BOOL_LIT";
    case TokenKind::Keyword: return "KEYWORD";
    case TokenKind::Op: return "OP";
    case TokenKind::Colon: return "COLON";
    case TokenKind::LParen: return "LPAREN";
    case TokenKind::RParen: return "RPAREN";
    case TokenKind::Newline: return "NEWLINE";
    case TokenKind::Indent: return "INDENT";
    case TokenKind::Dedent: return "DEDENT";
    case TokenKind::Eof: return "EOF";
    }
    return "?";
}

bool is_keyword(std::string_view word) {
    for (auto k : kKeywords) {
        if (k == word) {
            return true;
        }
    }
    return false;
}

LexResult lex_block(const FormalBlock& block, std::string_view task_id, std::string_view file) {
    Lexer lexer(block.start_line, 1, task_id, file);
    return lexer.run(block.text);
}

LexResult lex_text(std::string_view text, int first_line, int col_offset) {
    Lexer lexer(first_line, col_offset, {}, {});
    return lexer.run(text);
}

} // namespace prema
