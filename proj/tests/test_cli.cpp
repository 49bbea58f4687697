#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string data(const std::string& name) {
    return std::string(TROPBBS_TEST_DATA) + "/" + name;
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    std::string base = "cli_test_" + std::to_string(counter++);
    std::string out_path = base + ".out", err_path = base + ".err";
    std::string cmd = std::string(TROPBBS_CLI_PATH) + " " + args + " > " + out_path +
                      " 2> " + err_path;
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.status = WEXITSTATUS(rc);
    auto slurp = [](const std::string& p) {
        std::ifstream f(p);
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

} // namespace

TEST_CASE("simulate renders the fixture states") {
    RunResult r = run_cli("simulate " + data("example2.state") + " --steps 0");
    CHECK(r.status == 0);
    CHECK(r.out == "t=0\n.|..11\n.|.11.\n1|21.1\n");
}

TEST_CASE("simulate json is well formed") {
    RunResult r = run_cli("simulate " + data("example1.state") + " --steps 2 --format json");
    REQUIRE(r.status == 0);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["t"] == 0);
    CHECK(j[0]["W"].size() == 3);
    CHECK(j[0]["Q"][0].size() == 3);
}

TEST_CASE("period reports the fundamental cycle or NotFound") {
    RunResult r = run_cli("period " + data("example2.state") + " --t-max 20");
    CHECK(r.status == 0);
    CHECK(r.out == "F = 8\n");
    RunResult nf = run_cli("period " + data("example2.state") + " --t-max 2");
    CHECK(nf.status != 0);
    CHECK(nf.err.find("code=NotFound") != std::string::npos);
}

TEST_CASE("spectral prints the canonical support") {
    RunResult r = run_cli("spectral " + data("example1.state"));
    REQUIRE(r.status == 0);
    CHECK(r.out ==
          "0 0 3\n0 1 2\n0 2 1\n0 3 0\n1 0 2\n1 1 1\n1 2 0\n2 0 1\n2 1 0\n3 0 0\n");
    RunResult ex = run_cli("spectral " + data("example1.state") + " --exact");
    CHECK(ex.status == 0);
    CHECK(ex.out.find("x^1 y^1 q^1 : 21") != std::string::npos);
}

TEST_CASE("curve emits the documented JSON fields") {
    RunResult r = run_cli("curve " + data("example2.state"));
    REQUIRE(r.status == 0);
    auto j = nlohmann::json::parse(r.out);
    REQUIRE(j.contains("vertices"));
    REQUIRE(j.contains("edges"));
    REQUIRE(j.contains("rays"));
    REQUIRE(j.contains("genus"));
    REQUIRE(j.contains("special_points"));
    CHECK(j["genus"] == 3);
    CHECK(j["vertices"].size() == 3);
    CHECK(j["special_points"]["G"] == "2");
    CHECK(j["special_points"]["P1"]["x"] == "2");
    CHECK(j["special_points"]["P1"]["y"] == "1");
    CHECK(j["special_points"]["P3"].size() == 3);
}

TEST_CASE("fundamental-cycle and verify") {
    RunResult r = run_cli("fundamental-cycle " + data("example2.state"));
    REQUIRE(r.status == 0);
    CHECK(r.out.find("F'' = 8") != std::string::npos);
    CHECK(r.out.find("F' = 8") != std::string::npos);
    RunResult v = run_cli("verify " + data("example2.state"));
    CHECK(v.status == 0);
    CHECK(v.out.find("F = 8") != std::string::npos);
    CHECK(v.out.find("verdict: PASS") != std::string::npos);
    RunResult v1 = run_cli("verify " + data("example1.state"));
    CHECK(v1.status == 0);
    CHECK(v1.out.find("F' = 3") != std::string::npos);
    CHECK(v1.out.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("oracle reports identities and valuations") {
    RunResult r = run_cli("oracle " + data("example2.state") +
                          " --eps 0.05 --eps 0.02 --samples 20 --seed 7");
    REQUIRE(r.status == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_pass"] == true);
    CHECK(j["valuation_comparison"]["max_abs_error"].get<double>() < 0.05);
    for (const auto& item : j["determinant_identities"]) CHECK(item["pass"] == true);
}

TEST_CASE("identical runs produce byte-identical output") {
    for (std::string cmd : {"curve ", "fundamental-cycle ", "spectral "}) {
        RunResult a = run_cli(cmd + data("example2.state"));
        RunResult b = run_cli(cmd + data("example2.state"));
        CHECK(a.out == b.out);
        CHECK(a.status == b.status);
    }
}

TEST_CASE("errors carry stable codes") {
    RunResult bad = run_cli("simulate /nonexistent.state");
    CHECK(bad.status == 2);
    CHECK(bad.err.find("code=ParseError") != std::string::npos);

    std::string tmp = "cli_invalid.state";
    {
        std::ofstream f(tmp);
        f << "2 2\nA 9\n1 1\n1 1\n"; // A > B
    }
    RunResult lvl = run_cli("simulate " + tmp);
    CHECK(lvl.status == 2);
    CHECK(lvl.err.find("code=LevelTooHigh") != std::string::npos);
    std::remove(tmp.c_str());

    RunResult usage = run_cli("simulate");
    CHECK(usage.status != 0);
}
