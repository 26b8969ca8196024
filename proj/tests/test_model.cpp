#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace jumpsyn;
using jumpsyn::testing::data_path;
using jumpsyn::testing::sec5_scenario;

TEST_SUITE_BEGIN("model");

TEST_CASE("bundled two-mode scenario validates with the published dimensions") {
    const Scenario s = sec5_scenario();
    CHECK(s.model.num_modes == 2);
    CHECK(s.model.n == 2);
    CHECK(s.model.m == 1);
    CHECK(s.model.l == 2);
    CHECK(s.model.q == 2);
    CHECK(s.perf.gamma == 1.0);
    CHECK(s.delay.tau_plus == 0.5);
    CHECK(s.perf.f2 == 15.0);
    CHECK(s.perf.f_inf == 17.0);
    CHECK(s.perf.X == 2.0);
    CHECK(s.perf.phi.at_zero()(0) == 0.0);
    CHECK(s.perf.phi.at_zero()(1) == 1.0);
    Matrix pi(2, 2);
    pi << -5, 5, 3, -3;
    CHECK((s.model.generator - pi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("generator with a bad row sum is rejected") {
    Scenario s = sec5_scenario();
    s.model.generator(0, 1) = 2.0; // row now sums to -3
    CHECK_THROWS_AS(validate_model(s.model), GeneratorInvalid);

    Matrix pi(2, 2);
    pi << -1, 2, 3, -3; // first row sums to 1
    CHECK_THROWS_AS(validate_generator(pi, "generator"), GeneratorInvalid);
}

TEST_CASE("generator sign violations are rejected") {
    Scenario s = sec5_scenario();
    SUBCASE("negative off-diagonal") {
        s.model.generator(0, 1) = -5.0;
        CHECK_THROWS_AS(validate_model(s.model), GeneratorInvalid);
    }
    SUBCASE("positive diagonal") {
        s.model.generator(0, 0) = 5.0;
        CHECK_THROWS_AS(validate_model(s.model), GeneratorInvalid);
    }
}

TEST_CASE("mismatched input widths across modes are rejected by name") {
    Scenario s = sec5_scenario();
    s.model.B[1] = Matrix::Zero(2, 2); // B_2 wider than B_1
    try {
        validate_model(s.model);
        FAIL("expected DimensionMismatch");
    } catch (const DimensionMismatch& ex) {
        CHECK(std::string(ex.what()).find("B_2") != std::string::npos);
    }
}

TEST_CASE("tau_plus outside (0,1] is a range error") {
    nlohmann::json doc = nlohmann::json::parse(std::ifstream(data_path("example_sec5.json")));
    doc["delay"]["tau_plus"] = 1.5;
    CHECK_THROWS_AS(scenario_from_json(doc), RangeError);
    doc["delay"]["tau_plus"] = 0.0;
    CHECK_THROWS_AS(scenario_from_json(doc), RangeError);
}

TEST_CASE("loading the bundled file round-trips through serialization") {
    nlohmann::json original = nlohmann::json::parse(std::ifstream(data_path("example_sec5.json")));
    const Scenario s = scenario_from_json(original);
    CHECK(scenario_to_json(s) == original);
}

TEST_CASE("bundled data file stays in sync with the embedded text") {
    std::ifstream in(data_path("example_sec5.json"), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(buffer.str() == std::string(example_scenario_text()));
}

TEST_CASE("validation is deterministic and rejection is total") {
    const Scenario a = sec5_scenario();
    const Scenario b = sec5_scenario();
    CHECK(scenario_to_json(a) == scenario_to_json(b));

    // single invariant violations never produce a repaired model
    Scenario bad = sec5_scenario();
    bad.obs.rates(0, 1) = 0.0;
    CHECK_THROWS_AS(validate_scenario(bad), RangeError);
    bad = sec5_scenario();
    bad.perf.L[2] = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(validate_scenario(bad), RangeError);
    bad = sec5_scenario();
    bad.sim.r0 = 2;
    CHECK_THROWS_AS(validate_scenario(bad), IndexOutOfRange);
}

TEST_CASE("parse error carries a location for malformed documents") {
    try {
        load_scenario(data_path("does_not_exist.json"));
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(std::string(ex.what()).find("does_not_exist") != std::string::npos);
    }
    nlohmann::json doc = nlohmann::json::parse(std::ifstream(data_path("example_sec5.json")));
    doc.erase("generator");
    try {
        scenario_from_json(doc);
        FAIL("expected ParseError");
    } catch (const ParseError& ex) {
        CHECK(std::string(ex.what()).find("generator") != std::string::npos);
    }
}

TEST_CASE("history energy quadrature matches the constant closed form") {
    Vector phi0(2);
    phi0 << 0.0, 1.0;
    const HistoryFunction phi = HistoryFunction::constant_history(phi0);
    CHECK(initial_history_energy(phi, 1.0) == doctest::Approx(1.0));
    CHECK(initial_history_energy(phi, 4.0) == doctest::Approx(2.0));
}

TEST_CASE("sampled history interpolates linearly and clamps at the ends") {
    HistoryFunction phi;
    phi.kind = HistoryFunction::Kind::Sampled;
    phi.times = {-1.0, 0.0};
    Vector a(1), b(1);
    a << 2.0;
    b << 4.0;
    phi.values = {a, b};
    CHECK(phi(-0.5)(0) == doctest::Approx(3.0));
    CHECK(phi(-2.0)(0) == doctest::Approx(2.0));
    CHECK(phi.at_zero()(0) == doctest::Approx(4.0));
}

TEST_SUITE_END();
