#include <cmath>
#include <numeric>

#include "doctest.h"
#include "spikeport/config.hpp"

using namespace spikeport;

TEST_CASE("minimal document fills defaults") {
    const ScenarioConfig cfg = parse_config("{}");
    CHECK(cfg.schema_version == 1);
    CHECK(cfg.experiment == "simulate");
    CHECK(std::holds_alternative<FhnSpec>(cfg.circuit));
    CHECK(std::holds_alternative<ConstantInput>(cfg.input));
    CHECK(cfg.seed == 0);
    CHECK(cfg.outputs.dir == "out");
}

TEST_CASE("unknown keys are rejected with the section named") {
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
    try {
        parse_config(R"({"solver": {"dt": 0.01, "dtt": 0.01}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.section == "solver");
        CHECK(std::string(e.what()).find("dtt") != std::string::npos);
    }
    CHECK_THROWS_AS(
        parse_config(R"({"circuit": {"builder": "fhn", "params": {"q": 1}}})"),
        ConfigError);
}

TEST_CASE("malformed json and bad enums raise config errors") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": "fly"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"circuit": {"builder": "opamp"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"input": {"kind": "square"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"solver": {"method": "euler"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 99})"), ConfigError);
}

TEST_CASE("round trip is a fixed point of serialization") {
    const std::string doc = R"({
      "experiment": "reliability",
      "circuit": {"builder": "fhn", "params": {"C": 1.0, "L": 30.0}},
      "input": {"kind": "step", "t0": 10.0, "baseline": -0.5, "level": 0.2},
      "solver": {"dt": 0.01, "horizon": 300.0, "method": "rk4"},
      "analysis": {"threshold": 0.5, "refractory": 5.0},
      "reliability": {"trials": 25, "window": 5.0,
        "frozen_input": {"kind": "ou", "mean": 0.1, "std": 0.3,
                         "tau": 3.0, "seed": 42}},
      "seed": 7
    })";
    const std::string once = serialize_config(parse_config(doc));
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);
    const ScenarioConfig cfg = parse_config(once);
    CHECK(cfg.experiment == "reliability");
    CHECK(cfg.sim.method == Method::ExplicitRK4);
    CHECK(std::get<FhnSpec>(cfg.circuit).L == doctest::Approx(30.0));
    CHECK(std::get<OuInput>(cfg.reliability.frozen_input).seed == 42);
    CHECK(cfg.reliability.window == doctest::Approx(5.0));
    CHECK(cfg.seed == 7);
}

TEST_CASE("constant, step, and triangle inputs render exactly") {
    const Signal c = render_input(ConstantInput{0.25}, 4, 0.5);
    for (double s : c.samples) CHECK(s == 0.25);

    const Signal st = render_input(StepInput{1.0, -0.5, 0.2}, 6, 0.5);
    // t = 0, .5, 1, 1.5, 2, 2.5 ; level from t >= t0
    CHECK(st.samples[0] == -0.5);
    CHECK(st.samples[1] == -0.5);
    CHECK(st.samples[2] == 0.2);
    CHECK(st.samples[5] == 0.2);

    const Signal tr = render_input(TriangleInput{0.0, 1.0}, 4, 1.0);
    CHECK(tr.samples[0] == doctest::Approx(0.0));
    CHECK(tr.samples[2] == doctest::Approx(1.0));  // peak at the midpoint
    CHECK(tr.samples[1] == doctest::Approx(tr.samples[3]));  // symmetric
}

TEST_CASE("ou input is stationary, seeded, and mean-reverting") {
    OuInput ou{0.1, 0.3, 3.0, 42};
    const Signal a = render_input(ou, 200000, 0.01);
    const Signal b = render_input(ou, 200000, 0.01);
    CHECK(a.samples == b.samples);  // frozen by seed
    ou.seed = 43;
    const Signal c2 = render_input(ou, 200000, 0.01);
    CHECK(a.samples != c2.samples);

    const double mean =
        std::accumulate(a.samples.begin(), a.samples.end(), 0.0) /
        double(a.size());
    double var = 0.0;
    for (double s : a.samples) var += (s - mean) * (s - mean);
    var /= double(a.size());
    CHECK(std::fabs(mean - 0.1) < 0.05);
    CHECK(std::fabs(std::sqrt(var) - 0.3) < 0.05);
}

TEST_CASE("circuit builder dispatch") {
    const NetworkCircuit fhn = build_circuit(FhnSpec{});
    CHECK(fhn.nodes.size() == 1);
    CHECK(fhn.nodes[0].find_branch("negative_resistance") != nullptr);

    const NetworkCircuit burster = build_circuit(BursterSpec{});
    CHECK(burster.nodes[0].find_branch("ultraslow_positive") != nullptr);

    const NetworkCircuit hco = build_circuit(HcoSpec{0.5, -2.0, 1.0});
    CHECK(hco.nodes.size() == 2);
    CHECK(hco.synapses.size() == 2);

    RcSpec rc;
    rc.n = 3;
    rc.capacitance = {1.0};  // broadcast
    rc.leak_g = {0.5};
    rc.leak_v = {0.0};
    rc.gaps = {{0, 1, 0.2}, {1, 2, 0.2}};
    const NetworkCircuit net = build_circuit(rc);
    CHECK(net.nodes.size() == 3);
    CHECK(net.nodes[2].capacitance == doctest::Approx(1.0));
    CHECK(net.gap_junctions.size() == 2);
}

TEST_CASE("burster parameter overrides reach the built circuit") {
    const ScenarioConfig cfg = parse_config(
        R"({"circuit": {"builder": "burster",
                        "params": {"slow_mixed_g": 0.4}}})");
    const NetworkCircuit net = build_circuit(cfg.circuit);
    const ControllerBranch* br = net.nodes[0].find_branch("slow_mixed");
    REQUIRE(br != nullptr);
    CHECK(std::get<ConductanceBranch>(br->op.node).g_max ==
          doctest::Approx(0.4));
}
