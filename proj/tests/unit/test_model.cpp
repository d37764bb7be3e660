#include "helpers.hpp"

#include "prema/analysis.hpp"
#include "prema/service.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <regex>

using namespace prema;
using prema::test::codes;
using prema::test::compile;

namespace {

int count_matches(const std::string& text, const std::regex& re) {
    return static_cast<int>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

int dot_edges(const std::string& dot) {
    return count_matches(dot, std::regex(R"(" -> ")"));
}

int dot_nodes(const std::string& dot) {
    return count_matches(dot, std::regex(R"(^  "[^"]+"( \[[^\]]*\])?;$)", std::regex::multiline));
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

// Variables reachable from `key` over graph edges within `depth` hops;
// forward follows from -> to (what the key reads), backward the reverse.
std::set<std::string> bfs(const DependencyGraph& g, const std::string& key, int depth, bool forward) {
    std::set<std::string> seen{key};
    std::deque<std::pair<std::string, int>> queue{{key, 0}};
    std::set<std::string> out;
    while (!queue.empty()) {
        auto [node, d] = queue.front();
        queue.pop_front();
        if (depth > 0 && d == depth) {
            continue;
        }
        for (const auto& e : g.edges) {
            const std::string& here = forward ? e.from : e.to;
            const std::string& there = forward ? e.to : e.from;
            if (here == node && seen.insert(there).second) {
                out.insert(there);
                queue.emplace_back(there, d + 1);
            }
        }
    }
    return out;
}

} // namespace

TEST_SUITE("model") {
    TEST_CASE("VM-1 dictionary and machine") {
        CompiledProject p = prema::oracle::load_fixture("vm1");
        const Model& m = *p.model;
        CHECK(m.dictionary.entries.size() == 3);
        REQUIRE(m.machines.size() == 1);
        CHECK(m.machines[0].variable == "vmState");
        CHECK(m.dictionary.find("coin_inserted")->is_input());
        const DictEntry* vs = m.dictionary.find("vmState");
        CHECK(vs->def_sites.size() == 3);
        CHECK(vs->use_sites.size() == 3);
    }

    TEST_CASE("two-task circular definition is E201 naming the cycle") {
        CompiledProject p = compile({{"A", {"var a : int", "var b : int", "a = b + 1"}}, {"B", {"b = a * 2"}}});
        CHECK(codes(p.diagnostics) == std::vector<std::string>{"E201"});
        CHECK(p.diagnostics[0].message.find("a -> b -> a") != std::string::npos);
        CHECK_FALSE(p.model->schedulable);
    }

    TEST_CASE("reader is scheduled after the writer") {
        CompiledProject p = compile({{"B", {"var a : int", "var c : int", "c = a"}}, {"A", {"var b : int input", "a = b + 1"}}});
        CHECK(p.diagnostics.empty());
        REQUIRE(p.model->tasks.size() == 2);
        CHECK(p.model->tasks[0].task_id == "doc/a");
        CHECK(p.model->tasks[1].task_id == "doc/b");
    }

    TEST_CASE("schedule equals the first valid order by exhaustive permutation search") {
        std::mt19937 rng(7);
        for (int round = 0; round < 60; ++round) {
            int n = std::uniform_int_distribution<int>(2, 5)(rng);
            std::vector<int> rank(static_cast<std::size_t>(n));
            std::iota(rank.begin(), rank.end(), 0);
            std::shuffle(rank.begin(), rank.end(), rng);
            // Task i defines v<i> and reads only lower-ranked tasks' outputs: a DAG.
            std::string md = "# Random\n";
            std::set<std::pair<int, int>> before; // (writer, reader)
            for (int i = 0; i < n; ++i) {
                md += "\n## T" + std::to_string(i) + "\n\n\tvar v" + std::to_string(i) + " : int\n\tv" +
                      std::to_string(i) + " = 1";
                for (int j = 0; j < n; ++j) {
                    if (rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)] &&
                        std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
                        md += " + v" + std::to_string(j);
                        before.emplace(j, i);
                    }
                }
                md += "\n";
            }
            CompiledProject p = compile_markdown(md, "r");
            REQUIRE(p.diagnostics.empty());
            std::vector<int> perm(static_cast<std::size_t>(n));
            std::iota(perm.begin(), perm.end(), 0);
            std::vector<int> expected;
            do {
                std::vector<int> pos(static_cast<std::size_t>(n));
                for (int k = 0; k < n; ++k) {
                    pos[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k;
                }
                bool ok = std::all_of(before.begin(), before.end(), [&](const auto& e) {
                    return pos[static_cast<std::size_t>(e.first)] < pos[static_cast<std::size_t>(e.second)];
                });
                if (ok) {
                    expected = perm;
                    break;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            std::vector<int> got;
            for (const auto& t : p.model->tasks) {
                got.push_back(std::stoi(t.task_id.substr(t.task_id.find("/t") + 2)));
            }
            CHECK(got == expected);
        }
    }

    TEST_CASE("VM-1 transitions") {
        CompiledProject p = prema::oracle::load_fixture("vm1");
        const auto& ts = p.model->machines.at(0).transitions;
        REQUIRE(ts.size() == 3);
        CHECK(ts[0].from == "Pay");
        CHECK(ts[0].to == "Select");
        CHECK(format_expr(ts[0].guard) == "coin_inserted");
        CHECK(ts[1].from == "Select");
        CHECK(ts[1].to == "Beverage");
        CHECK(format_expr(ts[1].guard) == "beverage_selected");
        CHECK(ts[2].from == "Beverage");
        CHECK(ts[2].to == "Pay");
        CHECK(format_expr(ts[2].guard) == "True");
    }

    TEST_CASE("FOUR-1 has 4 states and 7 transitions") {
        CompiledProject p = prema::oracle::load_fixture("four1");
        const StateMachine* sm = p.model->find_machine("doorState");
        REQUIRE(sm != nullptr);
        CHECK(sm->states.size() == 4);
        CHECK(sm->transitions.size() == 7);
    }

    TEST_CASE("guard without a state conjunct fans out from every satisfiable source") {
        CompiledProject p = compile({{"M", {"var modeState : enum {A, B, C}", "var go : bool input", "if go:",
                                            "\tmodeState = C"}}});
        const StateMachine* sm = p.model->find_machine("modeState");
        REQUIRE(sm != nullptr);
        // Oracle: a source state s yields a transition iff "modeState == s and go"
        // is satisfiable, checked by enumeration over the tiny domain.
        std::set<std::string> sources;
        for (const std::string s : {"A", "B", "C"}) {
            for (bool go : {false, true}) {
                if (go) {
                    sources.insert(s);
                }
            }
        }
        std::set<std::string> got;
        for (const auto& t : sm->transitions) {
            got.insert(t.from);
            CHECK(t.to == "C");
            CHECK(format_expr(t.guard) == "go");
        }
        CHECK(sm->transitions.size() == 3);
        CHECK(got == sources);
    }

    TEST_CASE("slice of a three-node chain") {
        CompiledProject p = compile({{"Chain", {"var a : int", "var b : int", "var c : int input", "b = c + 1",
                                                "a = b + 1"}}});
        Slice s = key_variable_slice(*p.model, "b", 1);
        CHECK(as_set(s.uses_key.nodes) == std::set<std::string>{"a"});
        CHECK(as_set(s.used_by_key.nodes) == std::set<std::string>{"c"});
        std::string dot = emit_dependency_diagram(s);
        CHECK(dot_nodes(dot) == 3);
        CHECK(dot_edges(dot) == 2);
        CHECK(dot.find("dashed") == std::string::npos);
    }

    TEST_CASE("isolated key has empty sides") {
        CompiledProject p = compile({{"Lone", {"var z : int input", "var a : int", "a = 1"}}});
        Slice s = key_variable_slice(*p.model, "z", 0);
        CHECK(s.uses_key.nodes.empty());
        CHECK(s.used_by_key.nodes.empty());
        CHECK_THROWS_AS(key_variable_slice(*p.model, "nope", 1), PremaError);
    }

    TEST_CASE("delay edge is the only dashed edge") {
        CompiledProject p = compile({{"Acc", {"var acc : int", "var step : int input", "acc = acc + step"}}});
        std::string dot = emit_dependency_diagram(key_variable_slice(*p.model, "acc", 1));
        CHECK(count_matches(dot, std::regex("dashed")) == 1);
        CHECK(dot_edges(dot) == 2);
    }

    TEST_CASE("random six-node DAG slices match an independent BFS") {
        std::mt19937 rng(11);
        for (int round = 0; round < 40; ++round) {
            std::string lines;
            std::vector<std::string> block;
            for (int i = 0; i < 6; ++i) {
                block.push_back("var n" + std::to_string(i) + " : int");
            }
            for (int i = 1; i < 6; ++i) {
                std::string rhs = "1";
                for (int j = 0; j < i; ++j) {
                    if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
                        rhs += " + n" + std::to_string(j);
                    }
                }
                block.push_back("n" + std::to_string(i) + " = " + rhs);
            }
            std::string md = "# G\n\n## G\n\n";
            for (const auto& l : block) {
                md += "\t" + l + "\n";
            }
            CompiledProject p = compile_markdown(md, "g");
            const Model& m = *p.model;
            for (int k = 0; k < 6; ++k) {
                std::string key = "n" + std::to_string(k);
                for (int depth : {1, 2, 0}) {
                    Slice s = key_variable_slice(m, key, depth);
                    CHECK(as_set(s.used_by_key.nodes) == bfs(m.graph, key, depth, true));
                    CHECK(as_set(s.uses_key.nodes) == bfs(m.graph, key, depth, false));
                }
            }
        }
    }

    TEST_CASE("dependency diagram depth grows monotonically") {
        CompiledProject p = prema::oracle::load_fixture("dict12");
        const Model& m = *p.model;
        for (const auto& e : m.dictionary.entries) {
            Slice one = key_variable_slice(m, e.name, 1);
            Slice all = key_variable_slice(m, e.name, 0);
            CHECK(one.uses_key.nodes.size() <= all.uses_key.nodes.size());
            CHECK(one.used_by_key.nodes.size() <= all.used_by_key.nodes.size());
        }
    }
}

TEST_SUITE("types") {
    TEST_CASE("non-boolean guard is E101") {
        CompiledProject p = compile({{"T", {"var speed : real input", "var x : int", "if speed:", "\tx = 1"}}});
        CHECK(codes(p.diagnostics) == std::vector<std::string>{"E101"});
    }

    TEST_CASE("int to real promotion is silent") {
        CompiledProject p = compile({{"T", {"var x : real", "x = 1"}}});
        CHECK(p.diagnostics.empty());
    }

    TEST_CASE("state variable redeclared as int adds exactly E103") {
        std::string md = read_file(prema::oracle::fixture_dir() / "vm1" / "vm1.md");
        CompiledProject base = compile_markdown(md, "vm1");
        std::string mutated = std::regex_replace(md, std::regex("var vmState : enum \\{Pay, Select, Beverage\\}"),
                                                 "var vmState : int");
        REQUIRE(mutated != md);
        CompiledProject p = compile_markdown(mutated, "vm1");
        CHECK(base.diagnostics.empty());
        CHECK(codes(p.diagnostics) == std::vector<std::string>{"E103"});
    }

    TEST_CASE("undeclared name is E104 and assignment to an input is E106") {
        CompiledProject p = compile({{"T", {"var x : int", "var i : int input", "x = y + 1", "i = 2"}}});
        CHECK(codes(p.diagnostics) == std::vector<std::string>{"E104", "E106"});
    }
}

TEST_SUITE("dimensions") {
    TEST_CASE("speed is distance over time") {
        CompiledProject p = compile({{"D", {"var dist : real [m] input", "var time : real [s] input",
                                            "var speed : real [m/s]", "speed = dist / time"}}});
        CHECK(p.diagnostics.empty());
    }

    TEST_CASE("adding speed and time is E102") {
        CompiledProject p = compile({{"D", {"var speed : real [m/s] input", "var time : real [s] input",
                                            "var bad : real [m/s]", "bad = speed + time"}}});
        CHECK(codes(p.diagnostics) == std::vector<std::string>{"E102"});
    }

    TEST_CASE("area from squared distance") {
        CompiledProject p = compile({{"D", {"var d : real [m] input", "var x : real [m^2]", "x = d * d"}}});
        CHECK(p.diagnostics.empty());
        const DictEntry* x = p.model->dictionary.find("x");
        Dimension dim = dimension_of(x->unit, {"m", "s", "kg"});
        CHECK(dim.exponents() == std::map<std::string, int>{{"m", 2}});
    }

    TEST_CASE("dimension arithmetic matches exponent-vector sums") {
        const std::vector<std::string> base{"m", "s", "kg"};
        std::mt19937 rng(3);
        for (int round = 0; round < 500; ++round) {
            Dimension d;
            std::map<std::string, int> oracle;
            int factors = std::uniform_int_distribution<int>(1, 5)(rng);
            for (int f = 0; f < factors; ++f) {
                const std::string& u = base[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 2)(rng))];
                int e = std::uniform_int_distribution<int>(-3, 3)(rng);
                if (e == 0) {
                    continue;
                }
                bool divide = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
                d = divide ? d / Dimension::base(u, e) : d * Dimension::base(u, e);
                oracle[u] += divide ? -e : e;
            }
            for (auto it = oracle.begin(); it != oracle.end();) {
                it = it->second == 0 ? oracle.erase(it) : std::next(it);
            }
            CHECK(d.exponents() == oracle);
            CHECK(d.dimensionless() == oracle.empty());
        }
    }

    TEST_CASE("unit formatting") {
        const std::vector<std::string> base{"m", "s", "kg"};
        CHECK(format_dimension(Dimension::base("m") / Dimension::base("s"), base) == "[m/s]");
        CHECK(format_dimension(Dimension::base("m", 2), base) == "[m^2]");
        CHECK(format_dimension(Dimension::base("s").inverse(), base) == "[1/s]");
        CHECK(format_dimension(Dimension(), base) == "[1]");
    }
}

TEST_SUITE("diagrams") {
    TEST_CASE("VM-1 state diagram") {
        CompiledProject p = prema::oracle::load_fixture("vm1");
        std::string dot = state_diagram_text(*p.model, "vmState");
        CHECK(dot_nodes(dot) == 3);
        CHECK(dot_edges(dot) == 3);
        CHECK(dot.find("label=\"coin_inserted\"") != std::string::npos);
        CHECK_THROWS_AS(state_diagram_text(*p.model, "coin_inserted"), PremaError);
    }

    TEST_CASE("FOUR-1 state diagram") {
        CompiledProject p = prema::oracle::load_fixture("four1");
        std::string dot = state_diagram_text(*p.model, "doorState");
        CHECK(dot_nodes(dot) == 4);
        CHECK(dot_edges(dot) == 7);
    }

    TEST_CASE("single-state machine") {
        StateMachine sm;
        sm.variable = "loneState";
        sm.states = {"Only"};
        std::string dot = emit_state_diagram(sm);
        CHECK(dot_nodes(dot) == 1);
        CHECK(dot_edges(dot) == 0);
    }

    TEST_CASE("one dependency diagram per variable of the 12-variable corpus") {
        CompiledProject p = prema::oracle::load_fixture("dict12");
        CHECK(p.diagnostics.empty());
        const Model& m = *p.model;
        CHECK(m.dictionary.entries.size() == 12);
        std::set<std::string> emitted;
        for (const auto& e : m.dictionary.entries) {
            std::string dot = dependency_diagram_text(m, e.name, 1);
            CHECK(dot.find("digraph") == 0);
            emitted.insert(e.name);
        }
        CHECK(emitted.size() == 12);
    }
}
