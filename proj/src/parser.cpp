#include "prema/parser.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <optional>

namespace prema {

namespace {

struct SyntaxError {};

class Parser {
public:
    Parser(const std::vector<Token>& tokens, std::string_view task_id, std::string_view file,
           const std::set<int>& quiet_lines, bool allow_primes)
        : toks_(tokens), task_id_(task_id), file_(file), reported_(quiet_lines), allow_primes_(allow_primes) {}

    ParseResult parse_block() {
        ParseResult result;
        result.ast.task_id = task_id_;
        result.ast.file = file_;
        while (!at(TokenKind::Eof)) {
            if (at(TokenKind::Newline) || at(TokenKind::Dedent)) {
                ++pos_;
                continue;
            }
            if (at(TokenKind::Indent)) {
                report(peek(), "unexpected indent");
                skip_suite();
                continue;
            }
            std::size_t start = pos_;
            try {
                if (at_keyword("var")) {
                    result.ast.decls.push_back(parse_decl());
                } else {
                    result.ast.stmts.push_back(parse_stmt());
                }
            } catch (const SyntaxError&) {
                synchronize(start);
            }
        }
        result.diagnostics = std::move(diags_);
        return result;
    }

    ExprParseResult parse_single_expression() {
        ExprParseResult result;
        try {
            while (at(TokenKind::Newline)) {
                ++pos_;
            }
            ExprPtr e = parse_expr();
            while (at(TokenKind::Newline) || at(TokenKind::Dedent)) {
                ++pos_;
            }
            if (!at(TokenKind::Eof)) {
                fail(peek(), "unexpected " + describe(peek()) + " after expression");
            }
            result.expr = e;
        } catch (const SyntaxError&) {
        }
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    // Panic mode: drop tokens up to the NEWLINE that ends the statement at the
    // starting depth, then swallow a nested suite that would follow it.
    void synchronize(std::size_t start) {
        int depth = 0;
        if (pos_ < start) {
            pos_ = start;
        }
        while (!at(TokenKind::Eof)) {
            TokenKind k = peek().kind;
            if (k == TokenKind::Indent) {
                ++depth;
            } else if (k == TokenKind::Dedent) {
                if (depth == 0) {
                    return;
                }
                --depth;
            } else if (k == TokenKind::Newline && depth == 0) {
                ++pos_;
                if (at(TokenKind::Indent)) {
                    skip_suite();
                }
                // Clauses continuing a broken if-chain go down with it.
                if (at_keyword("elif") || at_keyword("else")) {
                    continue;
                }
                return;
            }
            ++pos_;
        }
    }

    void skip_suite() {
        int depth = 0;
        while (!at(TokenKind::Eof)) {
            if (at(TokenKind::Indent)) {
                ++depth;
            } else if (at(TokenKind::Dedent)) {
                --depth;
                if (depth == 0) {
                    ++pos_;
                    return;
                }
            }
            ++pos_;
        }
    }

    VarDecl parse_decl() {
        const Token& kw = expect_keyword("var");
        VarDecl decl;
        decl.pos = kw.pos;
        decl.name = expect(TokenKind::Ident, "variable name").lexeme;
        expect(TokenKind::Colon, "':'");
        decl.type = parse_type();
        if (at_op("[")) {
            decl.unit = parse_unit();
        }
        if (at_keyword("input")) {
            ++pos_;
            decl.role = Role::Input;
        } else if (at_keyword("output")) {
            ++pos_;
            decl.role = Role::Output;
        }
        if (at_keyword("mode")) {
            ++pos_;
            decl.mode_flag = true;
        }
        expect(TokenKind::Newline, "end of declaration");
        return decl;
    }

    Type parse_type() {
        const Token& t = peek();
        if (t.kind == TokenKind::Keyword) {
            if (t.lexeme == "bool") {
                ++pos_;
                return Type::boolean();
            }
            if (t.lexeme == "int") {
                ++pos_;
                return Type::integer();
            }
            if (t.lexeme == "real") {
                ++pos_;
                return Type::real();
            }
            if (t.lexeme == "enum") {
                ++pos_;
                expect_op("{");
                std::vector<std::string> lits;
                while (true) {
                    const Token& lit = expect(TokenKind::Ident, "enum literal");
                    if (std::find(lits.begin(), lits.end(), lit.lexeme) != lits.end()) {
                        fail(lit, "duplicate enum literal '" + lit.lexeme + "'");
                    }
                    lits.push_back(lit.lexeme);
                    if (at_op(",")) {
                        ++pos_;
                        continue;
                    }
                    break;
                }
                expect_op("}");
                return Type::enumeration(std::move(lits));
            }
        }
        fail(t, "expected type (bool, int, real, enum) but found " + describe(t));
    }

    UnitExpr parse_unit() {
        expect_op("[");
        UnitExpr unit;
        int sign = 1;
        while (true) {
            UnitTerm term;
            term.name = expect(TokenKind::Ident, "unit name").lexeme;
            term.exponent = 1;
            if (at_op("^")) {
                ++pos_;
                int exp_sign = 1;
                if (at_op("-")) {
                    ++pos_;
                    exp_sign = -1;
                }
                const Token& lit = expect(TokenKind::IntLit, "unit exponent");
                int value = 0;
                auto [p, ec] = std::from_chars(lit.lexeme.data(), lit.lexeme.data() + lit.lexeme.size(), value);
                if (ec != std::errc{}) {
                    fail(lit, "unit exponent out of range");
                }
                term.exponent = exp_sign * value;
            }
            term.exponent *= sign;
            unit.terms.push_back(std::move(term));
            if (at_op("*")) {
                ++pos_;
                sign = 1;
            } else if (at_op("/")) {
                ++pos_;
                sign = -1;
            } else {
                break;
            }
        }
        expect_op("]");
        return unit;
    }

    Stmt parse_stmt() {
        const Token& t = peek();
        if (t.kind == TokenKind::Keyword && t.lexeme == "if") {
            return parse_if();
        }
        if (t.kind == TokenKind::Ident) {
            ++pos_;
            if (at_op("'")) {
                fail(peek(), "primed names are only allowed in properties");
            }
            expect_op("=");
            ExprPtr value = parse_expr();
            expect(TokenKind::Newline, "end of statement");
            return Stmt{Assign{t.lexeme, value}, t.pos};
        }
        if (t.kind == TokenKind::Keyword && t.lexeme == "var") {
            fail(t, "declarations are only allowed at the top level");
        }
        fail(t, "expected statement but found " + describe(t));
    }

    Stmt parse_if() {
        const Token& kw = expect_keyword("if");
        IfChain chain;
        chain.arms.push_back(parse_arm(kw));
        while (at_keyword("elif")) {
            const Token& elif = peek();
            ++pos_;
            chain.arms.push_back(parse_arm(elif));
        }
        if (at_keyword("else")) {
            chain.else_pos = peek().pos;
            ++pos_;
            expect(TokenKind::Colon, "':'");
            chain.else_body = parse_suite();
        }
        return Stmt{std::move(chain), kw.pos};
    }

    IfArm parse_arm(const Token& kw) {
        IfArm arm;
        arm.pos = kw.pos;
        arm.cond = parse_expr();
        expect(TokenKind::Colon, "':'");
        arm.body = parse_suite();
        return arm;
    }

    // suite := NEWLINE INDENT stmt+ DEDENT
    std::vector<Stmt> parse_suite() {
        expect(TokenKind::Newline, "end of line after ':'");
        const Token& indent = expect(TokenKind::Indent, "indented block");
        std::vector<Stmt> body;
        while (!at(TokenKind::Dedent) && !at(TokenKind::Eof)) {
            if (at(TokenKind::Newline)) {
                ++pos_;
                continue;
            }
            std::size_t start = pos_;
            try {
                body.push_back(parse_stmt());
            } catch (const SyntaxError&) {
                synchronize(start);
            }
        }
        if (at(TokenKind::Dedent)) {
            ++pos_;
        }
        if (body.empty()) {
            report(indent, "expected at least one statement in block");
        }
        return body;
    }

    // Precedence, low to high: or, and, not, comparison, additive,
    // multiplicative, unary minus.
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr lhs = parse_and();
        while (at_keyword("or")) {
            SourcePos p = peek().pos;
            ++pos_;
            lhs = make_binary(BinaryOp::Or, lhs, parse_and(), p);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        ExprPtr lhs = parse_not();
        while (at_keyword("and")) {
            SourcePos p = peek().pos;
            ++pos_;
            lhs = make_binary(BinaryOp::And, lhs, parse_not(), p);
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (at_keyword("not")) {
            SourcePos p = peek().pos;
            ++pos_;
            return make_unary(UnaryOp::Not, parse_not(), p);
        }
        return parse_comparison();
    }

    std::optional<BinaryOp> comparison_op() const {
        const Token& t = peek();
        if (t.kind != TokenKind::Op) {
            return std::nullopt;
        }
        if (t.lexeme == "==") return BinaryOp::Eq;
        if (t.lexeme == "!=") return BinaryOp::Ne;
        if (t.lexeme == "<") return BinaryOp::Lt;
        if (t.lexeme == "<=") return BinaryOp::Le;
        if (t.lexeme == ">") return BinaryOp::Gt;
        if (t.lexeme == ">=") return BinaryOp::Ge;
        return std::nullopt;
    }

    ExprPtr parse_comparison() {
        ExprPtr lhs = parse_additive();
        if (auto op = comparison_op()) {
            SourcePos p = peek().pos;
            ++pos_;
            ExprPtr rhs = parse_additive();
            if (comparison_op()) {
                fail(peek(), "comparison operators are non-associative; use parentheses");
            }
            return make_binary(*op, lhs, rhs, p);
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        ExprPtr lhs = parse_multiplicative();
        while (at_op("+") || at_op("-")) {
            BinaryOp op = peek().lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
            SourcePos p = peek().pos;
            ++pos_;
            lhs = make_binary(op, lhs, parse_multiplicative(), p);
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr lhs = parse_unary();
        while (at_op("*") || at_op("/") || at_op("%")) {
            const std::string& s = peek().lexeme;
            BinaryOp op = s == "*" ? BinaryOp::Mul : (s == "/" ? BinaryOp::Div : BinaryOp::Mod);
            SourcePos p = peek().pos;
            ++pos_;
            lhs = make_binary(op, lhs, parse_unary(), p);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (at_op("-")) {
            SourcePos p = peek().pos;
            ++pos_;
            // A minus written directly before a number folds into the literal.
            if (at(TokenKind::IntLit) || at(TokenKind::RealLit)) {
                return parse_number(true, p);
            }
            return make_unary(UnaryOp::Neg, parse_unary(), p);
        }
        return parse_primary();
    }

    ExprPtr parse_number(bool negative, SourcePos p) {
        const Token& t = peek();
        ++pos_;
        if (t.kind == TokenKind::IntLit) {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
            if (ec != std::errc{}) {
                fail(t, "integer literal '" + t.lexeme + "' is too large");
            }
            return make_int(negative ? -v : v, p);
        }
        auto r = parse_rational(t.lexeme);
        if (!r) {
            fail(t, "malformed real literal '" + t.lexeme + "'");
        }
        return make_real(negative ? Rational(-*r) : *r, p);
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::IntLit:
        case TokenKind::RealLit:
            return parse_number(false, t.pos);
        case TokenKind::BoolLit:
            ++pos_;
            return make_bool(t.lexeme == "True", t.pos);
        case TokenKind::Ident: {
            ++pos_;
            bool primed = false;
            if (at_op("'")) {
                if (!allow_primes_) {
                    fail(peek(), "primed names are only allowed in properties");
                }
                ++pos_;
                primed = true;
            }
            return make_name(t.lexeme, t.pos, primed);
        }
        case TokenKind::LParen: {
            ++pos_;
            ExprPtr inner = parse_expr();
            expect(TokenKind::RParen, "')'");
            return inner;
        }
        default:
            fail(t, "expected expression but found " + describe(t));
        }
    }

    const Token& peek() const { return toks_[std::min(pos_, toks_.size() - 1)]; }
    bool at(TokenKind k) const { return peek().kind == k; }
    bool at_keyword(std::string_view kw) const { return at(TokenKind::Keyword) && peek().lexeme == kw; }
    bool at_op(std::string_view op) const { return at(TokenKind::Op) && peek().lexeme == op; }

    const Token& expect(TokenKind k, std::string_view what) {
        if (!at(k)) {
            fail(peek(), "expected " + std::string(what) + " but found " + describe(peek()));
        }
        return toks_[pos_++];
    }

    const Token& expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) {
            fail(peek(), "expected '" + std::string(kw) + "' but found " + describe(peek()));
        }
        return toks_[pos_++];
    }

    void expect_op(std::string_view op) {
        if (!at_op(op)) {
            fail(peek(), "expected '" + std::string(op) + "' but found " + describe(peek()));
        }
        ++pos_;
    }

    static std::string describe(const Token& t) {
        switch (t.kind) {
        case TokenKind::Newline: return "end of line";
        case TokenKind::Indent: return "indent";
        case TokenKind::Dedent: return "dedent";
        case TokenKind::Eof: return "end of block";
        default: return "'" + t.lexeme + "'";
        }
    }

    // Position of a structural token is the line it terminates or opens; for
    // NEWLINE/EOF fall back to the previous real token so the diagnostic
    // lands inside the offending statement.
    SourcePos location(const Token& t) const {
        if ((t.kind == TokenKind::Newline || t.kind == TokenKind::Eof || t.kind == TokenKind::Dedent) && pos_ > 0) {
            std::size_t i = std::min(pos_, toks_.size() - 1);
            while (i > 0) {
                --i;
                TokenKind k = toks_[i].kind;
                if (k != TokenKind::Newline && k != TokenKind::Indent && k != TokenKind::Dedent) {
                    SourcePos p = toks_[i].pos;
                    p.col += static_cast<int>(toks_[i].lexeme.size());
                    return p;
                }
            }
        }
        return t.pos;
    }

    void report(const Token& t, const std::string& message) {
        SourcePos p = location(t);
        if (reported_.count(p.line) != 0) {
            return;
        }
        reported_.insert(p.line);
        diags_.push_back(Diagnostic{Code::E001, task_id_, file_, p, message, {}});
    }

    [[noreturn]] void fail(const Token& t, const std::string& message) {
        report(t, message);
        throw SyntaxError{};
    }

    const std::vector<Token>& toks_;
    std::string task_id_;
    std::string file_;
    std::set<int> reported_;
    bool allow_primes_;
    std::size_t pos_ = 0;
    Diagnostics diags_;
};

} // namespace

ParseResult parse_block(const std::vector<Token>& tokens, std::string_view task_id, std::string_view file,
                        const std::set<int>& quiet_lines) {
    Parser parser(tokens, task_id, file, quiet_lines, false);
    return parser.parse_block();
}

ParseResult compile_block(const FormalBlock& block, std::string_view task_id, std::string_view file) {
    LexResult lexed = lex_block(block, task_id, file);
    std::set<int> quiet;
    for (const auto& d : lexed.diagnostics) {
        quiet.insert(d.pos.line);
    }
    ParseResult parsed = parse_block(lexed.tokens, task_id, file, quiet);
    Diagnostics merged = std::move(lexed.diagnostics);
    merged.insert(merged.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
    std::stable_sort(merged.begin(), merged.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return a.pos.line < b.pos.line || (a.pos.line == b.pos.line && a.pos.col < b.pos.col);
    });
    parsed.diagnostics = std::move(merged);
    return parsed;
}

ExprParseResult parse_expression(std::string_view text, bool allow_primes) {
    LexResult lexed = lex_text(text);
    if (has_errors(lexed.diagnostics)) {
        return ExprParseResult{nullptr, std::move(lexed.diagnostics)};
    }
    Parser parser(lexed.tokens, "", "", {}, allow_primes);
    return parser.parse_single_expression();
}

} // namespace prema
