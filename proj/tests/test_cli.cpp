#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "jumpsyn/cli.hpp"

using namespace jumpsyn;
using jumpsyn::testing::data_path;
using nlohmann::json;

TEST_SUITE_BEGIN("cli");

namespace {

namespace fs = std::filesystem;

struct CliCapture {
    int exit_code = 0;
    std::string out;
};

CliCapture run(const std::vector<std::string>& args) {
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    CliCapture result;
    result.exit_code = run_cli(args);
    std::cout.rdbuf(old);
    result.out = captured.str();
    return result;
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("jumpsyn_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string write_stable_scenario(const fs::path& dir) {
    const Scenario s = jumpsyn::testing::stable_two_mode_scenario();
    const fs::path path = dir / "stable.json";
    std::ofstream out(path);
    out << scenario_to_json(s).dump(2) << "\n";
    return path.string();
}

} // namespace

TEST_CASE("augment prints the joint generator of the bundled example") {
    const CliCapture r = run({"augment", "--scenario", data_path("example_sec5.json")});
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    const json expected = json::parse(R"([[-5.0,0.0,5.0,0.0],
                                          [3.0,-8.0,0.0,5.0],
                                          [3.0,0.0,-6.0,3.0],
                                          [0.0,3.0,0.0,-3.0]])");
    CHECK(doc["kappa"] == expected);
    CHECK(doc["index_map"].size() == 4);
    CHECK(doc["index_map"][1]["true_mode"] == 1);
    CHECK(doc["index_map"][1]["observed_mode"] == 2);
}

TEST_CASE("synth exits 2 on the bundled example and reports the blocking corner") {
    const CliCapture r = run({"synth", "--scenario", data_path("example_sec5.json")});
    CHECK(r.exit_code == 2);
    const json doc = json::parse(r.out);
    CHECK(doc["status"] == "infeasible");
    CHECK(std::string(doc["message"]).find("disturbance") != std::string::npos);
}

TEST_CASE("synth exits 0 with gains on a feasible scenario") {
    const fs::path dir = temp_dir("synth_ok");
    const std::string scenario = write_stable_scenario(dir);
    const CliCapture r = run({"synth", "--scenario", scenario});
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["status"] == "feasible");
    CHECK(doc["K"].size() == 2);
    CHECK(doc.contains("lambda"));
}

TEST_CASE("synth exits 2 when the budget cannot be met") {
    const CliCapture r = run({"synth", "--scenario", data_path("infeasible_budget.json")});
    CHECK(r.exit_code == 2);
}

TEST_CASE("unknown flags are rejected") {
    const CliCapture r = run({"augment", "--scenario", data_path("example_sec5.json"), "--nope"});
    CHECK(r.exit_code != 0);
}

TEST_CASE("outputs are not overwritten without force") {
    const fs::path dir = temp_dir("overwrite");
    const fs::path out = dir / "aug.json";
    CHECK(run({"augment", "--scenario", data_path("example_sec5.json"), "--out", out.string()})
              .exit_code == 0);
    CHECK(run({"augment", "--scenario", data_path("example_sec5.json"), "--out", out.string()})
              .exit_code == 1);
    CHECK(run({"augment", "--scenario", data_path("example_sec5.json"), "--out", out.string(),
               "--force"})
              .exit_code == 0);
}

TEST_CASE("validate reports the declared dimensions") {
    const CliCapture r = run({"validate", "--scenario", data_path("example_sec5.json"), "--json"});
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["modes"] == 2);
    CHECK(doc["dims"]["n"] == 2);
    CHECK(doc["history_energy"] == doctest::Approx(1.0));
}

TEST_CASE("analyze accepts explicit gains files") {
    const fs::path dir = temp_dir("analyze");
    const std::string scenario = write_stable_scenario(dir);
    const fs::path gains = dir / "gains.json";
    {
        std::ofstream out(gains);
        out << R"({"K": [[[0.0, 0.0]], [[0.0, 0.0]]]})";
    }
    const CliCapture r =
        run({"analyze", "--scenario", scenario, "--gains", gains.string(), "--mode", "h2"});
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["h2"]["status"] == "feasible");
    CHECK(doc["h2"].contains("bound"));
}

TEST_CASE("simulate writes one csv per run plus a summary") {
    const fs::path dir = temp_dir("simulate");
    const std::string scenario = write_stable_scenario(dir);
    const fs::path gains = dir / "gains.json";
    {
        std::ofstream out(gains);
        out << R"({"K": [[[0.0, 0.0]], [[0.0, 0.0]]]})";
    }
    const CliCapture r = run({"simulate", "--scenario", scenario, "--gains", gains.string(),
                              "--runs", "2", "--dt", "0.01", "--out", (dir / "runs").string()});
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "runs" / "run_0000.csv"));
    CHECK(fs::exists(dir / "runs" / "run_0001.csv"));
    CHECK(fs::exists(dir / "runs" / "summary.json"));
    std::ifstream csv(dir / "runs" / "run_0000.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,x1,x2,u1,z1,z2,y1,y2,r,robs,tau,w1");
}

TEST_CASE("evaluate emits estimates and a stability verdict") {
    const fs::path dir = temp_dir("evaluate");
    const std::string scenario = write_stable_scenario(dir);
    const fs::path gains = dir / "gains.json";
    {
        std::ofstream out(gains);
        out << R"({"K": [[[0.0, 0.0]], [[0.0, 0.0]]]})";
    }
    const CliCapture r = run({"evaluate", "--scenario", scenario, "--gains", gains.string(),
                              "--runs", "2", "--horizons", "5,10,20"});
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["h2"]["runs"] == 2);
    CHECK(doc["h2"]["mean"].get<double>() > 0.0);
    CHECK(doc["hinf"].contains("std_error"));
    CHECK(doc["stability"]["verdict"] == "saturating");
    CHECK(doc["stability"]["state_energy"].size() == 3);
}

TEST_CASE("repro pipeline is bitwise reproducible") {
    const fs::path dir_a = temp_dir("repro_a");
    const fs::path dir_b = temp_dir("repro_b");
    const std::vector<std::string> base = {"repro-example", "--runs", "4", "--seed", "99"};
    std::vector<std::string> args_a = base;
    args_a.insert(args_a.end(), {"--out", dir_a.string()});
    std::vector<std::string> args_b = base;
    args_b.insert(args_b.end(), {"--out", dir_b.string()});
    REQUIRE(run(args_a).exit_code == 0);
    REQUIRE(run(args_b).exit_code == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
        const fs::path other = dir_b / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(read_file(entry.path()) == read_file(other));
        ++compared;
    }
    CHECK(compared >= 5); // scenario, augmented, synth, gains, trajectory, summary
}

TEST_SUITE_END();
