#include "helpers.hpp"

#include <doctest.h>

#include <regex>

using namespace prema;
using prema::test::compile;
namespace or_ = prema::oracle;

namespace {

Valuation vm1_inputs(bool coin, bool sel) {
    return {{"coin_inserted", coin}, {"beverage_selected", sel}};
}

std::string state_of(const Valuation& v, const std::string& var = "vmState") {
    return std::get<EnumValue>(v.at(var)).literal;
}

// Hand truth table of the vending machine.
std::string vm1_next(const std::string& s, bool coin, bool sel) {
    if (s == "Pay") {
        return coin ? "Select" : "Pay";
    }
    if (s == "Select") {
        return sel ? "Beverage" : "Select";
    }
    return "Pay";
}

ExprPtr expr(const std::string& text) {
    return or_::parse(text);
}

Decision decision_of(const CompiledProject& p, int index = 0) {
    return enumerate_decisions(p.model->tasks.at(0)).at(static_cast<std::size_t>(index));
}

CompiledProject guard_task(const std::string& guard, std::initializer_list<std::string> decls) {
    std::string md = "# G\n\n## G\n\n";
    for (const auto& d : decls) {
        md += "\t" + d + "\n";
    }
    md += "\tvar out : bool output\n\tif " + guard + ":\n\t\tout = True\n\telse:\n\t\tout = False\n";
    return compile_markdown(md, "g");
}

} // namespace

TEST_SUITE("simulator") {
    TEST_CASE("initial valuation") {
        CompiledProject vm = or_::load_fixture("vm1");
        Valuation init = init_state(*vm.model);
        CHECK(state_of(init) == "Pay");
        CHECK(std::get<bool>(init.at("coin_inserted")) == false);
        CHECK(std::get<bool>(init.at("beverage_selected")) == false);

        CompiledProject e = compile({{"E", {"var e : enum {A, B, C}"}}});
        CHECK(std::get<EnumValue>(init_state(*e.model).at("e")).literal == "A");

        CompiledProject empty = compile_markdown("# Nothing here\n", "empty");
        CHECK(init_state(*empty.model).empty());
    }

    TEST_CASE("VM-1 steps") {
        CompiledProject p = or_::load_fixture("vm1");
        Simulator sim(*p.model);
        StepResult r = sim.step(sim.init_state(), vm1_inputs(true, false));
        CHECK(state_of(r.post) == "Select");
        REQUIRE(r.fired.size() == 1);
        CHECK(r.fired[0].from == "Pay");
        CHECK(r.fired[0].to == "Select");

        Valuation pre = sim.init_state();
        pre["vmState"] = EnumValue{"Beverage"};
        for (bool coin : {false, true}) {
            for (bool sel : {false, true}) {
                CHECK(state_of(sim.step(pre, vm1_inputs(coin, sel)).post) == "Pay");
            }
        }
    }

    TEST_CASE("VM-1 exhaustive against the hand truth table") {
        CompiledProject p = or_::load_fixture("vm1");
        Simulator sim(*p.model);
        int cases = 0;
        for (const std::string s : {"Pay", "Select", "Beverage"}) {
            for (bool coin : {false, true}) {
                for (bool sel : {false, true}) {
                    Valuation pre = sim.init_state();
                    pre["vmState"] = EnumValue{s};
                    CHECK(state_of(sim.step(pre, vm1_inputs(coin, sel)).post) == vm1_next(s, coin, sel));
                    ++cases;
                }
            }
        }
        CHECK(cases == 12);
    }

    TEST_CASE("division by zero halts with E301 at the line") {
        CompiledProject p = compile({{"Div", {"var x : real input", "var z : real input", "var y : real output",
                                              "y = x / z"}}});
        Simulator sim(*p.model);
        StepResult ok = sim.step(sim.init_state(), {{"x", Rational(3)}, {"z", Rational(2)}});
        CHECK_FALSE(ok.fault);
        CHECK(std::get<Rational>(ok.post.at("y")) == Rational(3, 2));
        StepResult bad = sim.step(sim.init_state(), {{"x", Rational(3)}, {"z", Rational(0)}});
        REQUIRE(bad.fault);
        CHECK(bad.fault->code == Code::E301);
        CHECK(bad.fault->pos.line == 8);
    }

    TEST_CASE("batch run and empty run") {
        CompiledProject p = or_::load_fixture("vm1");
        Simulator sim(*p.model);
        Trace t = sim.run({vm1_inputs(true, false), vm1_inputs(false, true), vm1_inputs(false, false)});
        REQUIRE(t.cycles.size() == 3);
        CHECK(state_of(t.cycles[0].post) == "Select");
        CHECK(state_of(t.cycles[1].post) == "Beverage");
        CHECK(state_of(t.cycles[2].post) == "Pay");
        CHECK_FALSE(t.halted);
        Trace empty = sim.run({});
        CHECK(empty.cycles.empty());
        CHECK_FALSE(empty.halted);
    }

    TEST_CASE("input CSV") {
        CompiledProject p = or_::load_fixture("vm1");
        auto rows = parse_input_csv("cycle,coin_inserted,beverage_selected\n1,True,False\n2,False,True\n", *p.model);
        REQUIRE(rows.size() == 2);
        CHECK(std::get<bool>(rows[1].at("beverage_selected")));
        try {
            (void)parse_input_csv("cycle,coin_inserted\n1,True\n", *p.model);
            FAIL("expected E003");
        } catch (const PremaError& e) {
            CHECK(e.code() == Code::E003);
            CHECK(std::string(e.what()).find("beverage_selected") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_input_csv("cycle,coin_inserted,beverage_selected\n1,maybe,False\n", *p.model),
                        PremaError);
    }

    TEST_CASE("int overflow is E302") {
        CompiledProject p = compile({{"O", {"var n : int", "n = n + 1"}}}, IntBounds{0, 3});
        Simulator sim(*p.model);
        Trace t = sim.run(std::vector<Valuation>(5));
        CHECK(t.cycles.size() == 3);
        REQUIRE(t.halted);
        CHECK(t.halted->code == Code::E302);
        CHECK(t.halted->cycle == 4);
    }
}

TEST_SUITE("sessions") {
    TEST_CASE("create, step, isolation, replay equals batch") {
        CompiledProject p = or_::load_fixture("vm1");
        std::shared_ptr<const Model> model(p.model);
        SessionManager mgr;
        std::string a = mgr.create(model);
        std::string b = mgr.create(model);
        CHECK(a != b);
        auto s0 = mgr.state(a);
        CHECK(s0.cycle == 0);
        CHECK(state_of(s0.valuation) == "Pay");

        std::vector<Valuation> rows{vm1_inputs(true, false), vm1_inputs(false, true), vm1_inputs(false, false)};
        for (const auto& r : rows) {
            (void)mgr.step(a, r);
        }
        (void)mgr.step(b, vm1_inputs(false, false));
        CHECK(state_of(mgr.state(a).valuation) == "Pay");
        CHECK(mgr.state(a).cycle == 3);
        CHECK(state_of(mgr.state(b).valuation) == "Pay");
        CHECK(mgr.state(b).cycle == 1);

        Trace batch = Simulator(*model).run(rows);
        CHECK(trace_to_json(mgr.state(a).trace, *model).dump() == trace_to_json(batch, *model).dump());
        CHECK_THROWS_AS(mgr.step("nope", rows[0]), PremaError);
        CHECK_THROWS_AS(mgr.step(a, {{"coin_inserted", true}}), PremaError);
    }
}

TEST_SUITE("solver") {
    SolverVar int_var(const std::string& n) {
        return SolverVar{n, Type::integer(), std::nullopt};
    }

    TEST_CASE("unique integer witness") {
        Constraint c;
        c.vars = {int_var("x")};
        c.conjuncts = {expr("x > 3"), expr("x < 5")};
        SolveResult r = solve(c);
        REQUIRE(r.status == SolveStatus::Sat);
        CHECK(std::get<std::int64_t>(r.model.at("x")) == 4);
    }

    TEST_CASE("empty integer interval") {
        Constraint c;
        c.vars = {int_var("x")};
        c.conjuncts = {expr("x > 5"), expr("x < 3")};
        CHECK(solve(c).status == SolveStatus::Unsat);
    }

    TEST_CASE("enum exclusion") {
        Constraint c;
        c.vars = {SolverVar{"e", Type::enumeration({"A", "B", "C"}), std::nullopt}};
        c.conjuncts = {expr("e != A"), expr("e != C")};
        SolveResult r = solve(c);
        REQUIRE(r.status == SolveStatus::Sat);
        CHECK(std::get<EnumValue>(r.model.at("e")).literal == "B");
    }

    TEST_CASE("every conjunction of up to four pool atoms matches enumeration") {
        const std::vector<std::string> pool{"x > y",     "x + y == 3", "y * 2 < x - 1", "b",
                                            "not b or x == -8", "x % 3 == 2", "y / x > 1", "x != y + 4"};
        int sat = 0;
        int total = 0;
        for (std::uint32_t mask = 1; mask < (1U << pool.size()); ++mask) {
            if (__builtin_popcount(mask) > 4) {
                continue;
            }
            Constraint c;
            c.int_bounds = IntBounds{-8, 7};
            c.vars = {int_var("x"), int_var("y"), SolverVar{"b", Type::boolean(), std::nullopt}};
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if ((mask >> i) & 1U) {
                    c.conjuncts.push_back(expr(pool[i]));
                }
            }
            SolveResult r = solve(c);
            bool expect = or_::brute_force_sat(c);
            CHECK((r.status == SolveStatus::Sat) == expect);
            CHECK(r.status != SolveStatus::Unknown);
            if (r.status == SolveStatus::Sat) {
                ++sat;
                CHECK(check_model(c, r.model));
            }
            ++total;
        }
        CHECK(total == 162);
        CHECK(sat > 0);
        CHECK(sat < total);
    }

    TEST_CASE("linear real arithmetic") {
        Constraint c;
        c.vars = {SolverVar{"r", Type::real(), std::nullopt}, SolverVar{"s", Type::real(), std::nullopt}};
        c.conjuncts = {expr("r > 1/2"), expr("r < 1"), expr("s == r * 2"), expr("s + r >= 2")};
        SolveResult r = solve(c);
        REQUIRE(r.status == SolveStatus::Sat);
        CHECK(check_model(c, r.model));
        c.conjuncts.push_back(expr("s < 1"));
        CHECK(solve(c).status == SolveStatus::Unsat);
    }

    TEST_CASE("SMT-LIB export") {
        Constraint c;
        c.vars = {int_var("x"), SolverVar{"e", Type::enumeration({"A", "B", "C"}), std::nullopt}};
        c.conjuncts = {expr("x > 3"), expr("x < 5")};
        std::string text = export_smtlib(c);
        CHECK(text.find("(declare-const x Int)") != std::string::npos);
        CHECK(text.find("(assert (> x 3))") != std::string::npos);
        CHECK(text.find("(assert (< x 5))") != std::string::npos);
        CHECK(text.find("(assert (and (<= 0 e) (<= e 2)))") != std::string::npos);
        CHECK(text.find("(check-sat)") != std::string::npos);
        std::ptrdiff_t opens = std::count(text.begin(), text.end(), '(');
        std::ptrdiff_t closes = std::count(text.begin(), text.end(), ')');
        CHECK(opens == closes);
    }
}

TEST_SUITE("verifier") {
    TEST_CASE("one-cycle VM-1 encoding agrees with the hand truth table") {
        CompiledProject p = or_::load_fixture("vm1");
        SsaEncoding enc = encode(*p.model, std::nullopt, 1);
        CHECK(enc.final.at("vmState") != enc.initial.at("vmState"));
        for (const std::string s : {"Pay", "Select", "Beverage"}) {
            for (bool coin : {false, true}) {
                for (bool sel : {false, true}) {
                    Valuation pre{{"vmState", EnumValue{s}}};
                    Valuation post = final_state(enc, evaluate_encoding(enc, pre, {vm1_inputs(coin, sel)}, p.model->int_bounds));
                    CHECK(state_of(post) == vm1_next(s, coin, sel));
                }
            }
        }
    }

    TEST_CASE("empty selection is the identity") {
        CompiledProject p = or_::load_fixture("four1");
        SsaEncoding enc = encode(*p.model, std::vector<std::string>{}, 1);
        std::mt19937 rng(5);
        for (int i = 0; i < 50; ++i) {
            Valuation pre = or_::random_pre_state(*p.model, rng);
            std::set<std::string> inputs;
            for (const auto* e : p.model->dictionary.inputs()) {
                inputs.insert(e->name);
            }
            Valuation in = or_::random_inputs(*p.model, rng, inputs);
            Valuation post = final_state(enc, evaluate_encoding(enc, pre, {in}, p.model->int_bounds));
            for (const auto& [k, v] : pre) {
                CHECK(post.at(k) == v);
            }
        }
    }

    TEST_CASE("two cycles chain two copies") {
        CompiledProject p = or_::load_fixture("vm1");
        SsaEncoding one = encode(*p.model, std::nullopt, 1);
        SsaEncoding two = encode(*p.model, std::nullopt, 2);
        CHECK(two.definitions.size() == 2 * one.definitions.size());
        CHECK(two.branches.size() == 2 * one.branches.size());
        std::size_t inputs_one = 0;
        std::size_t inputs_two = 0;
        for (const auto& v : one.vars) {
            inputs_one += v.name.find("@0") == std::string::npos ? 1 : 0;
        }
        for (const auto& v : two.vars) {
            inputs_two += v.name.find("@0") == std::string::npos ? 1 : 0;
        }
        CHECK(inputs_two == 2 * inputs_one);
    }

    TEST_CASE("property verdicts on VM-1") {
        CompiledProject p = or_::load_fixture("vm1");
        const Model& m = *p.model;
        CHECK(verify(m, "vmState' == Pay", "vmState == Pay and coin_inserted == False").verdict == Verdict::Valid);
        CHECK(or_::enumerate_runs(m, {"vm1/control"}, 1, "vmState' == Pay", "vmState == Pay and coin_inserted == False")
                  .violations == 0);
        CHECK(verify(m, "True").verdict == Verdict::Valid);

        VerifyResult r = verify(m, "vmState' != Beverage", "vmState == Select");
        REQUIRE(r.verdict == Verdict::Counterexample);
        const Counterexample& c = *r.counterexample;
        CHECK(state_of(c.pre_state) == "Select");
        REQUIRE(c.inputs.size() == 1);
        CHECK(std::get<bool>(c.inputs[0].at("beverage_selected")));
        REQUIRE(c.error_path.size() == 1);
        CHECK(c.error_path[0].arm == 1);
        CHECK(c.error_path[0].pos.line == 11);
    }

    TEST_CASE("property errors") {
        CompiledProject p = or_::load_fixture("vm1");
        auto code_of = [&](const std::string& prop) {
            try {
                (void)verify(*p.model, prop);
            } catch (const PremaError& e) {
                return std::string(code_name(e.code()));
            }
            return std::string("none");
        };
        CHECK(code_of("vmState ==") == "E001");
        CHECK(code_of("vmState") == "E101");
        CHECK(code_of("speed' > 3") == "E104");
    }

    TEST_CASE("runtime safety") {
        CompiledProject plain = compile({{"D", {"var x : int input", "var z : int input", "var y : real output",
                                                "y = x / z"}}});
        VerifyResult r = check_runtime_safety(*plain.model);
        REQUIRE(r.verdict == Verdict::Counterexample);
        CHECK(std::get<std::int64_t>(r.counterexample->inputs.at(0).at("z")) == 0);
        REQUIRE(r.counterexample->fault_site);
        CHECK(r.counterexample->fault_site->pos.line == 8);

        CompiledProject constant = compile({{"D", {"var x : int input", "var y : real output", "y = x / 2"}}});
        CHECK(check_runtime_safety(*constant.model).verdict == Verdict::Valid);

        CompiledProject guarded = compile({{"D", {"var x : int input", "var z : int input", "var y : real output",
                                                  "if z != 0:", "\ty = x / z"}}});
        CHECK(check_runtime_safety(*guarded.model).verdict == Verdict::Valid);
    }

    TEST_CASE("verify JSON carries the counterexample") {
        CompiledProject p = or_::load_fixture("vm1");
        auto j = verify_to_json(verify(*p.model, "vmState' != Beverage", "vmState == Select"), *p.model);
        CHECK(j["schema"] == "prema-verify/1");
        CHECK(j["verdict"] == "COUNTEREXAMPLE");
        CHECK(j["counterexample"]["inputs"][0]["beverage_selected"] == true);
        CHECK(j["counterexample"]["error_path"][0]["arm"] == 1);
    }
}

TEST_SUITE("testgen") {
    TEST_CASE("decision enumeration") {
        CompiledProject vm = or_::load_fixture("vm1");
        CHECK(enumerate_decisions(vm.model->tasks.at(0)).size() == 3);
        CompiledProject abc = guard_task("a and (b or c)", {"var a : bool input", "var b : bool input", "var c : bool input"});
        CHECK(decision_of(abc).conditions.size() == 3);
        CompiledProject aa = guard_task("a and a", {"var a : bool input"});
        CHECK(decision_of(aa).conditions.size() == 1);
    }

    TEST_CASE("A and (B or C) needs four vectors") {
        CompiledProject p = guard_task("a and (b or c)", {"var a : bool input", "var b : bool input", "var c : bool input"});
        Decision d = decision_of(p);
        PairResult r = mcdc_pairs(d);
        CHECK(r.gaps.empty());
        std::set<std::string> vectors;
        for (const auto& pr : r.pairs) {
            CHECK_FALSE(pr.masking);
            vectors.insert(vector_text(pr.vec_true));
            vectors.insert(vector_text(pr.vec_false));
        }
        CHECK(vectors == std::set<std::string>{"TTF", "FTF", "TFT", "TFF"});
        or_::TruthTable tt(d.expr, d.conditions);
        CHECK(tt.minimal_unique_cause_set() == 4);
        TaskCoverage cov = task_coverage(*p.model, p.model->tasks.at(0));
        CHECK(cov.cases.size() == 4);
        CHECK(cov.percent == 100.0);
    }

    TEST_CASE("single condition and tautology") {
        CompiledProject one = guard_task("a", {"var a : bool input"});
        PairResult r = mcdc_pairs(decision_of(one));
        REQUIRE(r.pairs.size() == 1);
        CHECK(vector_text(r.pairs[0].vec_true) == "T");
        CHECK(vector_text(r.pairs[0].vec_false) == "F");

        CompiledProject taut = guard_task("a or not a", {"var a : bool input"});
        PairResult g = mcdc_pairs(decision_of(taut));
        CHECK(g.pairs.empty());
        REQUIRE(g.gaps.size() == 1);
        CHECK(g.gaps[0].reason == "outcome independent");
    }

    TEST_CASE("pairs under random feasibility filters agree with the truth-table oracle") {
        std::mt19937 rng(99);
        const std::vector<std::string> guards{"a and (b or c)", "a or b and c", "(a or b) and (c or d)",
                                              "a and not b or c and d", "not (a and b) and c"};
        for (const auto& g : guards) {
            CompiledProject p = guard_task(g, {"var a : bool input", "var b : bool input", "var c : bool input",
                                               "var d : bool input"});
            Decision d = decision_of(p);
            or_::TruthTable tt(d.expr, d.conditions);
            std::size_t rows = std::size_t{1} << d.conditions.size();
            for (int round = 0; round < 60; ++round) {
                std::vector<bool> allowed(rows);
                for (auto&& a : allowed) {
                    a = std::uniform_int_distribution<int>(0, 3)(rng) != 0;
                }
                auto mask_of = [](const std::vector<bool>& v) {
                    std::uint32_t m = 0;
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        m |= v[i] ? (1U << i) : 0U;
                    }
                    return m;
                };
                auto ok = [&](std::uint32_t m) { return static_cast<bool>(allowed[m]); };
                PairResult r = mcdc_pairs(d, [&](const std::vector<bool>& v) { return ok(mask_of(v)); });
                std::set<int> seen;
                for (const auto& pr : r.pairs) {
                    auto i = static_cast<std::size_t>(pr.condition);
                    std::uint32_t a = mask_of(pr.vec_true);
                    std::uint32_t b = mask_of(pr.vec_false);
                    CHECK(ok(a));
                    CHECK(ok(b));
                    if (pr.masking) {
                        CHECK(tt.masking(i, a, b));
                        CHECK_FALSE(tt.has_unique_cause(i, ok));
                    } else {
                        CHECK(tt.unique_cause(i, a, b));
                    }
                    seen.insert(pr.condition);
                }
                for (const auto& gap : r.gaps) {
                    CHECK_FALSE(tt.has_any_pair(static_cast<std::size_t>(gap.condition), ok));
                    seen.insert(gap.condition);
                }
                CHECK(seen.size() == d.conditions.size());
            }
        }
    }

    TEST_CASE("concretization") {
        CompiledProject range = guard_task("x > 3 and x < 10", {"var x : int input"});
        auto tc = concretize(decision_of(range), {true, true}, *range.model);
        REQUIRE(tc);
        CHECK(std::get<std::int64_t>(tc->inputs.at("x")) == 4);
        CHECK(tc->expected_outcome);

        CompiledProject empty = guard_task("x > 5 and x < 3", {"var x : int input"});
        CHECK_FALSE(concretize(decision_of(empty), {true, true}, *empty.model));
        TaskCoverage cov = task_coverage(*empty.model, empty.model->tasks.at(0));
        CHECK(cov.percent < 100.0);
        for (const auto& g : cov.details.at(0).pairs.gaps) {
            CHECK(g.reason == "no feasible pair");
        }

        CompiledProject vm = or_::load_fixture("vm1");
        Decision d = enumerate_decisions(vm.model->tasks.at(0)).at(0);
        auto first = concretize(d, {true, true}, *vm.model);
        REQUIRE(first);
        CHECK(state_of(first->pre_state) == "Pay");
        CHECK(std::get<bool>(first->inputs.at("coin_inserted")));
        Simulator sim(*vm.model);
        Valuation pre = sim.init_state();
        pre["vmState"] = first->pre_state.at("vmState");
        StepResult r = sim.step(pre, vm1_inputs(true, false));
        REQUIRE(r.fired.size() == 1);
        CHECK(r.fired[0].to == "Select");
    }

    TEST_CASE("coverage aggregate excludes tasks without decisions") {
        CompiledProject p = compile({{"Full", {"var a : bool input", "var b : bool input", "var o : bool output",
                                               "if a and b:", "\to = True"}},
                                     {"Taut", {"var t : bool output", "if a or not a:", "\tt = True"}},
                                     {"Plain", {"var n : int", "n = 1"}}});
        CoverageReport r = coverage(*p.model);
        CHECK(r.tasks_with_decisions == 2);
        CHECK(r.tasks_at_100 == 1);
        CHECK(r.tasks_without_decisions == 1);
        CHECK(r.fraction_at_100() == 0.5);
        CHECK_THROWS_AS(coverage(*p.model, std::string("doc/none")), PremaError);
    }

    TEST_CASE("generation is deterministic") {
        CompiledProject p = or_::load_fixture("four1");
        std::string a = test_cases_csv(coverage(*p.model), *p.model);
        std::string b = test_cases_csv(coverage(*p.model), *p.model);
        CHECK(a == b);
        CHECK(a.rfind("task_id,decision_line,case_id,expected_outcome,assignments\n", 0) == 0);
    }

    TEST_CASE("every generated case is confirmed by the simulator") {
        for (const std::string name : {"vm1", "four1", "coverage", "mcdc"}) {
            CompiledProject p = or_::load_fixture(name);
            for (const auto& t : coverage(*p.model).tasks) {
                for (const auto& tc : t.cases) {
                    std::string why;
                    const Decision& d = t.details.at(static_cast<std::size_t>(tc.decision)).decision;
                    CHECK_MESSAGE(or_::simulator_confirms(*p.model, d, tc, &why), tc.task_id, " ", tc.case_id, " ", why);
                }
            }
        }
    }
}
