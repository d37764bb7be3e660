#include "helpers.hpp"

#include "prema/document.hpp"
#include "prema/format.hpp"
#include "prema/lexer.hpp"
#include "prema/parser.hpp"
#include "prema/project.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace prema;

namespace {

std::vector<TokenKind> kinds(const LexResult& r) {
    std::vector<TokenKind> out;
    for (const auto& t : r.tokens) {
        out.push_back(t.kind);
    }
    return out;
}

FormalBlock block_of(const std::string& text, int start_line = 1) {
    FormalBlock b;
    b.section_id = "t";
    b.start_line = start_line;
    b.text = text;
    int lines = 0;
    for (char c : text) {
        lines += c == '\n' ? 1 : 0;
    }
    b.end_line = start_line + lines - 1;
    return b;
}

std::vector<const Section*> headed(const RequirementDocument& d) {
    std::vector<const Section*> out;
    for (const Section* s : all_sections(d)) {
        if (s->heading_line > 0) {
            out.push_back(s);
        }
    }
    return out;
}

const std::string kVm1 = "var vmState : enum {Pay, Select, Beverage}\n"
                         "var coin_inserted : bool input\n"
                         "var beverage_selected : bool input\n"
                         "if vmState == Pay and coin_inserted:\n"
                         "\tvmState = Select\n"
                         "elif vmState == Select and beverage_selected:\n"
                         "\tvmState = Beverage\n"
                         "elif vmState == Beverage:\n"
                         "\tvmState = Pay\n";

} // namespace

TEST_SUITE("ingest") {
    TEST_CASE("headings nest and the TAB block attaches to its section") {
        IngestResult r = ingest_document("# VM\n\n## Payment\n\n\tx = 1\n", "vm.md");
        auto secs = headed(r.document);
        REQUIRE(secs.size() == 2);
        CHECK(secs[0]->id == "vm");
        CHECK(secs[1]->id == "payment");
        auto blocks = formal_blocks(r.document);
        REQUIRE(blocks.size() == 1);
        CHECK(blocks[0]->section_id == "payment");
        CHECK(blocks[0]->text == "x = 1");
        CHECK(r.diagnostics.empty());
    }

    TEST_CASE("vending requirement: prose plus one block naming the three states") {
        std::string md = prema::read_file(prema::oracle::fixture_dir() / "vm1" / "vm1.md");
        IngestResult r = ingest_document(md, "vm1.md");
        auto blocks = formal_blocks(r.document);
        REQUIRE(blocks.size() == 1);
        for (const char* s : {"Pay", "Select", "Beverage"}) {
            CHECK(blocks[0]->text.find(s) != std::string::npos);
        }
    }

    TEST_CASE("space-indented block is prose with W001") {
        std::string tabbed = "# A\n\n\tx = 1\n\ty = 2\n";
        std::string spaced = "# A\n\n    x = 1\n    y = 2\n";
        IngestResult t = ingest_document(tabbed, "a.md");
        IngestResult s = ingest_document(spaced, "a.md");
        CHECK(formal_blocks(t.document).size() == 1);
        CHECK(formal_blocks(s.document).empty());
        CHECK(prema::test::codes(t.diagnostics).empty());
        CHECK(prema::test::codes(s.diagnostics) == std::vector<std::string>{"W001"});
    }

    TEST_CASE("serialize then ingest gives the same section tree") {
        std::string md = "Intro line.\n\n# Top\n\nProse.\n\n\tvar a : int\n\ta = 1\n\n## Child One\n\n\tif a > 0:\n\t\ta = 2\n";
        IngestResult a = ingest_document(md, "x.md");
        IngestResult b = ingest_document(serialize_document(a.document), "x.md");
        auto sa = all_sections(a.document);
        auto sb = all_sections(b.document);
        REQUIRE(sa.size() == sb.size());
        for (std::size_t i = 0; i < sa.size(); ++i) {
            CHECK(sa[i]->id == sb[i]->id);
            CHECK(sa[i]->title == sb[i]->title);
        }
        auto ba = formal_blocks(a.document);
        auto bb = formal_blocks(b.document);
        REQUIRE(ba.size() == bb.size());
        for (std::size_t i = 0; i < ba.size(); ++i) {
            CHECK(ba[i]->text == bb[i]->text);
        }
    }

    TEST_CASE("slugify") {
        CHECK(slugify("Door State Machine") == "door-state-machine");
        CHECK(slugify("  Speed (v1.2)!  ") == "speed-v1.2");
    }
}

TEST_SUITE("project") {
    namespace fs = std::filesystem;

    struct TempDir {
        fs::path path;
        TempDir() {
            path = fs::temp_directory_path() / ("prema-test-" + std::to_string(::getpid()) + "-" +
                                                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
            fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
        void write(const std::string& name, const std::string& text) const { std::ofstream(path / name) << text; }
    };

    TEST_CASE("documents load in listed order") {
        TempDir d;
        d.write("b.md", "# B\n\n\tvar y : int\n");
        d.write("a.md", "# A\n\n\tvar x : int\n");
        d.write("prema.json", R"({"documents": ["b.md", "a.md"]})");
        LoadedProject p = project_load(d.path / "prema.json");
        REQUIRE(p.documents.size() == 2);
        CHECK(p.documents[0].stem == "b");
        CHECK(p.documents[1].stem == "a");
    }

    TEST_CASE("empty document list warns W002") {
        TempDir d;
        d.write("prema.json", R"({"documents": []})");
        LoadedProject p = project_load(d.path / "prema.json");
        CHECK(p.documents.empty());
        CHECK(prema::test::codes(p.diagnostics) == std::vector<std::string>{"W002"});
    }

    TEST_CASE("missing document raises E002 naming the path") {
        TempDir d;
        d.write("prema.json", R"({"documents": ["nope.md"]})");
        try {
            (void)project_load(d.path / "prema.json");
            FAIL("expected E002");
        } catch (const PremaError& e) {
            CHECK(e.code() == Code::E002);
            CHECK(std::string(e.what()).find("nope.md") != std::string::npos);
        }
    }

    TEST_CASE("malformed config raises E003") {
        CHECK_THROWS_AS(parse_project_config(nlohmann::json::parse(R"({"documents": 3})")), PremaError);
        CHECK_THROWS_AS(parse_project_config(nlohmann::json::parse(R"({"docs": []})")), PremaError);
    }
}

TEST_SUITE("lexer") {
    TEST_CASE("assignment tokens") {
        LexResult r = lex_text("x = 1\n");
        CHECK(kinds(r) == std::vector<TokenKind>{TokenKind::Ident, TokenKind::Op, TokenKind::IntLit, TokenKind::Newline,
                                                 TokenKind::Eof});
        CHECK(r.diagnostics.empty());
    }

    TEST_CASE("indentation produces one balanced INDENT/DEDENT pair") {
        LexResult r = lex_text("if a:\n\tb = 2\n");
        CHECK(kinds(r) == std::vector<TokenKind>{TokenKind::Keyword, TokenKind::Ident, TokenKind::Colon,
                                                 TokenKind::Newline, TokenKind::Indent, TokenKind::Ident, TokenKind::Op,
                                                 TokenKind::IntLit, TokenKind::Newline, TokenKind::Dedent,
                                                 TokenKind::Eof});
    }

    TEST_CASE("illegal character reports once and lexing continues") {
        LexResult r = lex_block(block_of("a = 1\ny = 3 @ 4\nz = 5\n", 10), "t", "f.md");
        REQUIRE(r.diagnostics.size() == 1);
        CHECK(r.diagnostics[0].code == Code::E001);
        CHECK(r.diagnostics[0].pos.line == 11);
        // Block column 7 plus the stripped marker TAB.
        CHECK(r.diagnostics[0].pos.col == 8);
        bool saw_z = false;
        for (const auto& t : r.tokens) {
            saw_z = saw_z || (t.kind == TokenKind::Ident && t.lexeme == "z");
        }
        CHECK(saw_z);
    }
}

TEST_SUITE("parser") {
    TEST_CASE("vending block") {
        ParseResult r = compile_block(block_of(kVm1), "vm");
        CHECK(r.diagnostics.empty());
        CHECK(r.ast.decls.size() == 3);
        REQUIRE(r.ast.stmts.size() == 1);
        const auto* chain = std::get_if<IfChain>(&r.ast.stmts[0].node);
        REQUIRE(chain != nullptr);
        CHECK(chain->arms.size() == 3);
        CHECK_FALSE(chain->else_body.has_value());
    }

    TEST_CASE("duplicate enum literal is E001") {
        ParseResult r = compile_block(block_of("var v : enum {A, A}\n"), "t");
        REQUIRE(r.diagnostics.size() == 1);
        CHECK(r.diagnostics[0].code == Code::E001);
    }

    TEST_CASE("errors on lines 2 and 7 of a 10-line block give exactly two diagnostics") {
        std::string text = "var a : int\n"
                           "a = (1 +\n"
                           "var b : bool\n"
                           "if b:\n"
                           "\ta = 2\n"
                           "a = a + 1\n"
                           "if a > 2\n"
                           "a = 3\n"
                           "b = not b\n"
                           "a = a * 2\n";
        ParseResult r = compile_block(block_of(text, 20), "t");
        REQUIRE(r.diagnostics.size() == 2);
        CHECK(r.diagnostics[0].pos.line == 21);
        CHECK(r.diagnostics[1].pos.line == 26);
    }

    TEST_CASE("parse of format is a fixed point") {
        ParseResult first = compile_block(block_of(kVm1), "vm");
        std::string text = format_ast(first.ast);
        ParseResult second = compile_block(block_of(text), "vm");
        CHECK(second.diagnostics.empty());
        CHECK(format_ast(second.ast) == text);
        ParseResult third = compile_block(block_of(format_ast(second.ast)), "vm");
        CHECK(format_ast(third.ast) == text);
    }

    TEST_CASE("precedence is preserved without extra parentheses") {
        ParseResult r = compile_block(block_of("var x : int\nx=1+2*3\n"), "t");
        CHECK(format_ast(r.ast).find("x = 1 + 2 * 3") != std::string::npos);
    }

    TEST_CASE("needed parentheses are kept and reparse to an equal tree") {
        auto e = parse_expression("(1+2)*3");
        REQUIRE(e.expr);
        std::string text = format_expr(e.expr);
        CHECK(text == "(1 + 2) * 3");
        auto again = parse_expression(text);
        REQUIRE(again.expr);
        CHECK(expr_equal(e.expr, again.expr));
        CHECK(format_expr(parse_expression("a - (b - c)").expr) == "a - (b - c)");
        CHECK(format_expr(parse_expression("not (a and b) or c").expr) == "not (a and b) or c");
    }

    TEST_CASE("primes only where allowed") {
        CHECK(parse_expression("x' == 1", true).expr);
        CHECK_FALSE(parse_expression("x' == 1", false).expr);
    }
}
