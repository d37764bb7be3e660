#include "helpers.hpp"

#include "prema/service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <regex>

using namespace prema;
namespace fs = std::filesystem;
using nlohmann::ordered_json;
namespace or_ = prema::oracle;

namespace {

ordered_json body_of(const HttpResponse& r) {
    return ordered_json::parse(r.body);
}

std::string project_body(const std::string& fixture) {
    ordered_json docs = ordered_json::array();
    ProjectConfig cfg = load_project_config(or_::fixture_dir() / fixture / "prema.json");
    for (const auto& d : cfg.documents) {
        docs.push_back((cfg.base_dir / d.path).string());
    }
    return ordered_json{{"documents", docs}}.dump();
}

void load(Service& s, const std::string& fixture) {
    HttpResponse r = s.handle("POST", "/api/project", project_body(fixture));
    REQUIRE(r.status == 200);
}

std::string read(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() /
              ("prema-cli-" + std::to_string(::getpid()) + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

std::string quoted(const fs::path& p) {
    return "'" + p.string() + "'";
}

#ifdef PREMA_CLI
// Exit status of the CLI with `args`; stdout and stderr are discarded.
int cli(const std::string& args) {
    std::string cmd = std::string("'") + PREMA_CLI + "' " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

std::string fixture_config(const std::string& name) {
    return quoted(or_::fixture_dir() / name / "prema.json");
}

} // namespace

TEST_SUITE("service") {
    TEST_CASE("health and missing project") {
        Service s;
        HttpResponse h = s.handle("GET", "/api/health", "");
        CHECK(h.status == 200);
        CHECK(body_of(h)["status"] == "ok");
        CHECK(s.handle("GET", "/api/model", "").status == 404);
        CHECK(s.handle("DELETE", "/api/health", "").status == 404);
        CHECK(s.handle("GET", "/api/nothing", "").status == 404);
    }

    TEST_CASE("project load and model") {
        Service s;
        load(s, "vm1");
        auto m = body_of(s.handle("GET", "/api/model", ""));
        CHECK(m["schema"] == "prema-model/1");
        CHECK(m["machines"].size() == 1);
        CHECK(m["diagnostics"].empty());
        HttpResponse bad = s.handle("POST", "/api/project", "{not json");
        CHECK(bad.status == 400);
        CHECK(body_of(bad)["code"] == "E003");
        HttpResponse missing = s.handle("POST", "/api/project", R"({"documents": ["/no/such/file.md"]})");
        CHECK(missing.status == 400);
        CHECK(body_of(missing)["code"] == "E002");
    }

    TEST_CASE("inline documents") {
        Service s;
        std::string md = read(or_::fixture_dir() / "vm1" / "vm1.md");
        ordered_json cfg{{"config", {{"documents", {{{"path", "vm.md"}, {"text", md}}}}}}};
        HttpResponse r = s.handle("POST", "/api/project", cfg.dump());
        REQUIRE(r.status == 200);
        CHECK(body_of(r)["tasks"] == 1);
    }

    TEST_CASE("graphs") {
        Service s;
        load(s, "vm1");
        HttpResponse st = s.handle("GET", "/api/graph/state/vmState", "");
        CHECK(st.status == 200);
        CHECK(st.content_type == "text/vnd.graphviz");
        CHECK(st.body.find("digraph") == 0);
        CHECK(s.handle("GET", "/api/graph/state/nope", "").status == 404);
        CHECK(s.handle("GET", "/api/graph/deps/vmState", "", {{"depth", "0"}}).status == 200);
        CHECK(s.handle("GET", "/api/graph/deps/nope", "").status == 404);
        CHECK(s.handle("GET", "/api/graph/deps/vmState", "", {{"depth", "deep"}}).status == 400);
    }

    TEST_CASE("session stepping walks Pay, Select, Beverage, Pay") {
        Service s;
        load(s, "vm1");
        HttpResponse created = s.handle("POST", "/api/sim/sessions", "");
        REQUIRE(created.status == 200);
        std::string id = body_of(created)["session_id"];
        auto snap = body_of(s.handle("GET", "/api/sim/sessions/" + id, ""));
        CHECK(snap["cycle"] == 0);
        CHECK(snap["valuation"]["vmState"] == "Pay");

        const char* steps[] = {R"({"inputs": {"coin_inserted": true, "beverage_selected": false}})",
                               R"({"inputs": {"coin_inserted": false, "beverage_selected": true}})",
                               R"({"inputs": {"coin_inserted": false, "beverage_selected": false}})"};
        const char* states[] = {"Select", "Beverage", "Pay"};
        for (int i = 0; i < 3; ++i) {
            HttpResponse r = s.handle("POST", "/api/sim/sessions/" + id + "/step", steps[i]);
            REQUIRE(r.status == 200);
            auto j = body_of(r);
            CHECK(j["cycle"] == i + 1);
            CHECK(j["post"]["vmState"] == states[i]);
        }
        auto after = body_of(s.handle("GET", "/api/sim/sessions/" + id, ""));
        CHECK(after["cycle"] == 3);
        CHECK(after["fired"].size() == 3);

        auto model = s.project()->model;
        std::vector<Valuation> rows;
        for (const char* step : steps) {
            rows.push_back(inputs_from_json(ordered_json::parse(step)["inputs"], *model));
        }
        CHECK(after["trace"].dump() == trace_to_json(Simulator(*model).run(rows), *model).dump());
    }

    TEST_CASE("step errors") {
        Service s;
        load(s, "vm1");
        std::string id = body_of(s.handle("POST", "/api/sim/sessions", ""))["session_id"];
        HttpResponse missing = s.handle("POST", "/api/sim/sessions/" + id + "/step", R"({"inputs": {"coin_inserted": true}})");
        CHECK(missing.status == 400);
        CHECK(body_of(missing)["message"].get<std::string>().find("beverage_selected") != std::string::npos);
        CHECK(s.handle("POST", "/api/sim/sessions/" + id + "/step", "{}").status == 400);
        CHECK(s.handle("POST", "/api/sim/sessions/s999/step", R"({"inputs": {}})").status == 404);
        CHECK(s.handle("GET", "/api/sim/sessions/s999", "").status == 404);
    }

    TEST_CASE("runtime fault in a session") {
        Service s;
        ordered_json cfg{{"documents",
                          {{{"path", "div.md"},
                            {"text", "# Div\n\n\tvar x : int input\n\tvar z : int input\n\tvar y : int output\n\ty = x % z\n"}}}}};
        REQUIRE(s.handle("POST", "/api/project", cfg.dump()).status == 200);
        std::string id = body_of(s.handle("POST", "/api/sim/sessions", ""))["session_id"];
        HttpResponse r = s.handle("POST", "/api/sim/sessions/" + id + "/step", R"({"inputs": {"x": 1, "z": 0}})");
        CHECK(r.status == 200);
        CHECK(body_of(r)["fault"]["code"] == "E301");
        CHECK(s.handle("POST", "/api/sim/sessions/" + id + "/step", R"({"inputs": {"x": 1, "z": 1}})").status == 400);
    }

    TEST_CASE("unschedulable model refuses sessions") {
        Service s;
        load(s, "seeded");
        HttpResponse r = s.handle("POST", "/api/sim/sessions", "");
        CHECK(r.status == 400);
        CHECK(body_of(r)["code"] == "E201");
    }

    TEST_CASE("verify and testgen") {
        Service s;
        load(s, "vm1");
        auto v = body_of(s.handle("POST", "/api/verify",
                                  R"({"property": "vmState' != Beverage", "assume": "vmState == Select"})"));
        CHECK(v["verdict"] == "COUNTEREXAMPLE");
        CHECK(body_of(s.handle("POST", "/api/verify", R"({"runtime_safety": true})"))["verdict"] == "VALID");
        CHECK(s.handle("POST", "/api/verify", R"({"property": "True", "bogus": 1})").status == 400);
        CHECK(s.handle("POST", "/api/verify", R"({"property": "vmState =="})").status == 400);

        auto t = body_of(s.handle("POST", "/api/testgen", "{}"));
        CHECK(t["schema"] == "prema-coverage/1");
        CHECK(t["aggregate"]["fraction_at_100"] == 1.0);
        CHECK(t["csv"].get<std::string>().rfind("task_id,", 0) == 0);
        CHECK(s.handle("POST", "/api/testgen", R"({"task_id": "vm1/control"})").status == 200);
        CHECK(s.handle("POST", "/api/testgen", R"({"task_id": "nope"})").status == 404);
    }

    TEST_CASE("port resolution") {
        ::unsetenv("PREMA_PORT");
        CHECK(resolve_port(std::nullopt) == kDefaultPort);
        CHECK(resolve_port(8123) == 8123);
        ::setenv("PREMA_PORT", "9001", 1);
        CHECK(resolve_port(8123) == 9001);
        ::setenv("PREMA_PORT", "http", 1);
        CHECK_THROWS_AS(resolve_port(8123), PremaError);
        ::unsetenv("PREMA_PORT");
    }

    TEST_CASE("HTTP round trip") {
        Service s;
        load(s, "vm1");
        HttpServer server(s);
        int port = server.start("127.0.0.1", 0);
        REQUIRE(port > 0);
        httplib::Client client("127.0.0.1", port);
        auto health = client.Get("/api/health");
        REQUIRE(health);
        CHECK(health->status == 200);
        auto created = client.Post("/api/sim/sessions", "", "application/json");
        REQUIRE(created);
        std::string id = ordered_json::parse(created->body)["session_id"];
        auto step = client.Post("/api/sim/sessions/" + id + "/step",
                                R"({"inputs": {"coin_inserted": true, "beverage_selected": false}})", "application/json");
        REQUIRE(step);
        CHECK(ordered_json::parse(step->body)["post"]["vmState"] == "Select");
        auto deps = client.Get("/api/graph/deps/vmState?depth=2");
        REQUIRE(deps);
        CHECK(deps->status == 200);
        auto unknown = client.Get("/api/graph/state/speed");
        REQUIRE(unknown);
        CHECK(unknown->status == 404);
        server.stop();
    }
}

#ifdef PREMA_CLI
TEST_SUITE("cli") {
    TEST_CASE("check exit codes and JSON counts") {
        Scratch s;
        CHECK(cli("check " + fixture_config("vm1")) == 0);
        CHECK(cli("check " + fixture_config("seeded") + " --json " + quoted(s.dir / "out.json")) == 1);
        auto j = ordered_json::parse(read(s.dir / "out.json"));
        CHECK(j["counts"] == ordered_json{{"E001", 5}, {"E102", 1}, {"E201", 1}});
        CHECK(cli("check " + quoted(s.dir / "missing.json")) == 2);
        CHECK(cli("frobnicate") == 2);
        CHECK(cli("simulate " + fixture_config("vm1")) == 2);
    }

    TEST_CASE("graph output") {
        Scratch s;
        CHECK(cli("graph state " + fixture_config("vm1") + " --var vmState -o " + quoted(s.dir / "vm.dot")) == 0);
        std::string dot = read(s.dir / "vm.dot");
        std::regex node(R"(^  "[^"]+"( \[[^\]]*\])?;$)", std::regex::multiline);
        CHECK(std::distance(std::sregex_iterator(dot.begin(), dot.end(), node), std::sregex_iterator()) == 3);
        CHECK(cli("graph state " + fixture_config("vm1") + " --var coin_inserted") == 1);
        CHECK(cli("graph deps " + fixture_config("dict12") + " --all --out-dir " + quoted(s.dir / "deps")) == 0);
        CHECK(std::distance(fs::directory_iterator(s.dir / "deps"), fs::directory_iterator()) == 12);
    }

    TEST_CASE("simulate halts on the planted division") {
        Scratch s;
        std::string csv = quoted(or_::fixture_dir() / "seeded" / "divide_inputs.csv");
        CHECK(cli("simulate " + fixture_config("seeded") + " --inputs " + csv + " --tasks averaging/ --trace " +
                  quoted(s.dir / "t.json")) == 1);
        auto t = ordered_json::parse(read(s.dir / "t.json"));
        CHECK(t["halted"]["code"] == "E301");
        CHECK(t["cycles"].size() == 2);
        // The whole corpus cannot run: it has errors and a cycle.
        CHECK(cli("simulate " + fixture_config("seeded") + " --inputs " + csv) == 1);

        std::ofstream(s.dir / "vm.csv") << "cycle,coin_inserted,beverage_selected\n1,True,False\n2,False,True\n";
        CHECK(cli("simulate " + fixture_config("vm1") + " --inputs " + quoted(s.dir / "vm.csv")) == 0);
    }

    TEST_CASE("verify, testgen and report") {
        Scratch s;
        std::string vm = fixture_config("vm1");
        CHECK(cli("verify " + vm + " --property \"vmState' != Beverage\" --assume \"vmState == Select\" --json " +
                  quoted(s.dir / "v.json")) == 1);
        CHECK(ordered_json::parse(read(s.dir / "v.json"))["verdict"] == "COUNTEREXAMPLE");
        CHECK(cli("verify " + vm + " --property \"vmState != Beverage or vmState' == Pay\"") == 0);
        CHECK(cli("verify " + vm + " --runtime-safety") == 0);
        CHECK(cli("verify " + vm + " --property \"vmState ==\"") == 1);

        CHECK(cli("testgen " + fixture_config("mcdc") + " --csv " + quoted(s.dir / "abc.csv")) == 0);
        std::string csv = read(s.dir / "abc.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
        CHECK(cli("testgen " + fixture_config("coverage") + " --coverage " + quoted(s.dir / "c.json")) == 1);
        CHECK(ordered_json::parse(read(s.dir / "c.json"))["aggregate"]["tasks_at_100"] == 2);

        CHECK(cli("report " + vm + " -o " + quoted(s.dir / "r.json") + " --property \"vmState' != Beverage\"") == 0);
        auto r = ordered_json::parse(read(s.dir / "r.json"));
        CHECK(r["schema"] == "prema-report/1");
        CHECK(r["summary"]["verification"] == 2);
    }
}
#endif
