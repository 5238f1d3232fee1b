#include "support.hpp"

#include "gridfreq/commands.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gridfreq;
using namespace support;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gridfreq_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes the artifacts and is byte-reproducible") {
    const fs::path dir = fresh_dir("simulate");
    Overrides ov;
    ov.out = dir / "a";
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_simulate(scenario_path("piac_two_node.json"), ov, true, out, err) == 0);
    CHECK(err.str().empty());
    CHECK(out.str().find("law piac") != std::string::npos);
    CHECK(fs::exists(dir / "a" / "trajectory.csv"));
    CHECK(fs::exists(dir / "a" / "summary.json"));
    CHECK(fs::exists(dir / "a" / "relative_frequency.csv"));

    ov.out = dir / "b";
    REQUIRE(cmd_simulate(scenario_path("piac_two_node.json"), ov, false, out, err) == 0);
    CHECK(slurp(dir / "a" / "trajectory.csv") == slurp(dir / "b" / "trajectory.csv"));
    CHECK(!fs::exists(dir / "b" / "relative_frequency.csv"));
    fs::remove_all(dir);
}

TEST_CASE("simulate without disturbances reports the nominal nadir and zero settling") {
    const fs::path dir = fresh_dir("quiet");
    const fs::path sc = dir / "quiet.json";
    std::ofstream(sc) << R"({"case": ")" << GRIDFREQ_DATA_DIR << R"(/ieee39.json", "controller": {"law": "piac"},
        "t_max": 1, "out": ")" << (dir / "out").generic_string() << "\"}";
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_simulate(sc, {}, false, out, err) == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
    const auto& m = summary.at("metrics");
    CHECK(std::abs(m.at("nadir_hz").get<double>() - 60.0) <= 1e-9);
    CHECK(m.at("settling_time").get<double>() == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("simulate fails cleanly") {
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cmd_simulate("/nonexistent.json", {}, false, out, err) == 1);
    CHECK(err.str().rfind("error: ", 0) == 0);

    Overrides ov;
    ov.controller = "pid";
    std::ostringstream err2;
    CHECK(cmd_simulate(scenario_path("piac_two_node.json"), ov, false, out, err2) == 1);
    CHECK(err2.str().find("unknown controller") != std::string::npos);
}

TEST_CASE("overrides take precedence over the scenario") {
    Scenario sc = load_scenario(scenario_path("piac_multi_ieee39.json"));
    Overrides ov;
    ov.dt = 5e-4;
    ov.t_max = 3.0;
    ov.seed = 9;
    ov.controller = "gb";
    apply_overrides(sc, ov);
    CHECK(sc.dt == 5e-4);
    CHECK(sc.t_max == 3.0);
    CHECK(sc.seed == 9u);
    CHECK(sc.controller.law == "gb");
    CHECK(!sc.controller.k.has_value());
    CHECK(sc.controller.k_areas.empty());

    Overrides gain;
    gain.k = 42.0;
    apply_overrides(sc, gain);
    CHECK(sc.controller.k == 42.0);

    Overrides bad;
    bad.dt = -1.0;
    CHECK_THROWS(apply_overrides(sc, bad));
}

TEST_CASE("compare: the same scenario twice gives identical rows") {
    Overrides ov;
    ov.t_max = 2.0;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_compare({scenario_path("piac_two_node.json"), scenario_path("piac_two_node.json")}, ov, out, err) ==
            0);
    const auto rows = lines_of(out.str());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "scenario,law,nadir_hz,max_overshoot_us,settling_time,marginal_spread,final_u_s,overshoots");
    CHECK(rows[1] == rows[2]);
}

TEST_CASE("compare: piac does not overshoot, gather-broadcast does") {
    const fs::path dir = fresh_dir("compare");
    Overrides ov;
    ov.t_max = 30.0;
    ov.out = dir;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_compare({scenario_path("piac_ieee39.json"), scenario_path("gb_ieee39.json")}, ov, out, err) == 0);
    const auto rows = lines_of(out.str());
    REQUIRE(rows.size() == 3);
    const auto piac = fields(rows[1]);
    const auto gb = fields(rows[2]);
    CHECK(piac[0] == "piac_ieee39");
    CHECK(piac[1] == "piac");
    CHECK(piac.back() == "no");
    CHECK(gb[1] == "gb");
    CHECK(gb.back() == "yes");
    CHECK(std::stod(piac[3]) < 1e-3);
    CHECK(std::stod(gb[3]) > 1e-2);
    CHECK(slurp(dir / "comparison.csv") == out.str());
    fs::remove_all(dir);
}

TEST_CASE("compare rejects scenarios on different cases or disturbances") {
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cmd_compare({scenario_path("piac_ieee39.json"), scenario_path("piac_two_node.json")}, {}, out, err) == 1);
    CHECK(err.str().find("different case") != std::string::npos);

    const fs::path dir = fresh_dir("mismatch");
    const fs::path quiet = dir / "quiet.json";
    std::ofstream(quiet) << R"({"case": ")" << GRIDFREQ_DATA_DIR << R"(/two_node.json", "controller": {"law": "dai"}})";
    std::ostringstream err2;
    CHECK(cmd_compare({scenario_path("piac_two_node.json"), quiet}, {}, out, err2) == 1);
    CHECK(err2.str().find("different disturbances") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("sweep: piac nadir depth decreases with the gain") {
    Overrides ov;
    ov.t_max = 10.0;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_sweep(scenario_path("piac_ieee39.json"), "k", {2.0, 10.0, 50.0}, ov, out, err) == 0);
    CHECK(out.str().find("trend: nadir depth strictly decreasing in k: yes") != std::string::npos);
    const auto rows = lines_of(out.str());
    REQUIRE(rows.size() >= 4);
    CHECK(std::stod(fields(rows[1])[1]) < std::stod(fields(rows[3])[1]));
}

TEST_CASE("sweep: gather-broadcast overshoot verdict matches the table") {
    Overrides ov;
    ov.t_max = 40.0;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_sweep(scenario_path("gb_ieee39.json"), "k_GB", {20.0, 60.0, 120.0}, ov, out, err) == 0);
    const auto rows = lines_of(out.str());
    REQUIRE(rows.size() == 5);
    std::vector<double> overshoot;
    for (std::size_t r = 1; r <= 3; ++r) overshoot.push_back(std::stod(fields(rows[r])[2]));
    for (double o : overshoot) CHECK(o > 1e-3);
    const bool nondecreasing = overshoot[0] <= overshoot[1] && overshoot[1] <= overshoot[2];
    CHECK(rows[4] == std::string("trend: overshoot nondecreasing in k_GB: ") + (nondecreasing ? "yes" : "no"));
}

TEST_CASE("sweep: step-size verdict matches the table and Euler converges") {
    Overrides ov;
    ov.t_max = 10.0;
    std::ostringstream out;
    std::ostringstream err;
    REQUIRE(cmd_sweep(scenario_path("piac_ieee39.json"), "dt", {1e-3, 5e-4, 2.5e-4}, ov, out, err) == 0);
    const auto rows = lines_of(out.str());
    REQUIRE(rows.size() == 5);
    std::vector<double> nadir;
    double spread = 0.0;
    for (std::size_t r = 1; r <= 3; ++r) {
        const auto f = fields(rows[r]);
        nadir.push_back(std::stod(f[1]));
        CHECK(std::stod(f[2]) < 1e-3);
        spread = std::max(spread, std::abs(nadir.back() - nadir.front()));
    }
    CHECK(rows[4].rfind(std::string("trend: metrics agree within 1e-3 across dt: ") + (spread <= 1e-3 ? "yes" : "no"),
                        0) == 0);
    // First-order convergence: each halving of dt roughly halves the change in the nadir.
    const double ratio = (nadir[1] - nadir[0]) / (nadir[2] - nadir[1]);
    CHECK(ratio > 1.5);
    CHECK(ratio < 3.0);
}

TEST_CASE("sweep rejects unknown parameters") {
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cmd_sweep(scenario_path("piac_two_node.json"), "mu", {1.0}, {}, out, err) == 1);
    CHECK(err.str().find("unknown sweep parameter") != std::string::npos);
    std::ostringstream err2;
    CHECK(cmd_sweep(scenario_path("piac_two_node.json"), "k_GB", {1.0}, {}, out, err2) == 1);
}

TEST_CASE("validate-case") {
    std::ostringstream out;
    std::ostringstream err;
    CHECK(cmd_validate_case(std::string(GRIDFREQ_DATA_DIR) + "/ieee39.json", out, err) == 0);
    CHECK(out.str().find("nodes 39 (machine 10, freq 29, passive 0)") != std::string::npos);
    CHECK(out.str().find("D_s 39") != std::string::npos);
    CHECK(out.str().find("area A1") != std::string::npos);
    CHECK(out.str().find("secure") != std::string::npos);
    std::ostringstream err2;
    CHECK(cmd_validate_case("/nonexistent.json", out, err2) == 1);
}

TEST_CASE("runner keeps input order") {
    std::vector<Scenario> list;
    for (double k : {1.0, 5.0, 20.0}) {
        Scenario sc = load_scenario(scenario_path("piac_two_node.json"));
        sc.t_max = 0.5;
        sc.controller.k = k;
        list.push_back(sc);
    }
    const auto runs = run_all(list, 2);
    REQUIRE(runs.size() == 3);
    CHECK(std::get<PiacSingle>(runs[0].spec.law).k == 1.0);
    CHECK(std::get<PiacSingle>(runs[2].spec.law).k == 20.0);
    CHECK(runs[0].metrics.final_u_s < runs[2].metrics.final_u_s);
}

}  // TEST_SUITE
