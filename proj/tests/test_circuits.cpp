#include <stdexcept>

#include "doctest.h"
#include "spikeport/circuits.hpp"

using namespace spikeport;

TEST_CASE("fhn builder wiring") {
    const OnePortCircuit c = build_fhn(1.0, 100.0, 1.0, 1.0);
    CHECK(c.capacitance == 1.0);
    CHECK(c.leak.g == 0.0);
    REQUIRE(c.branches.size() == 2);
    CHECK(c.find_branch("negative_resistance") != nullptr);
    CHECK(c.find_branch("L") != nullptr);
    CHECK(c.find_branch("negative_resistance")->role == BranchRole::Negative);
    CHECK(c.find_branch("L")->role == BranchRole::Positive);
    // steady state: I(V) = V^3/3 - k*V + R*V
    CHECK(c.static_current(2.0) ==
          doctest::Approx(8.0 / 3.0 - 2.0 + 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(build_fhn(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("fhn with k = 0 has no negative-tagged branch") {
    const OnePortCircuit c = build_fhn(1.0, 100.0, 1.0, 0.0);
    CHECK(c.find_branch("negative_resistance")->role == BranchRole::Positive);
}

TEST_CASE("negative-tagged branches must have a negative slope range") {
    OnePortCircuit c;
    c.capacitance = 1.0;
    c.leak = {1.0, 0.0};
    c.branches = {{"bogus", BranchRole::Negative, make_static(Linear{1.0})}};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.branches[0].op = make_static(Linear{-0.5});
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("burster taxonomy and timescale ordering") {
    const OnePortCircuit b = build_burster();
    REQUIRE(b.branches.size() == 4);
    CHECK(b.find_branch("fast_mixed")->role == BranchRole::Negative);
    CHECK(b.find_branch("slow_positive")->role == BranchRole::Positive);
    CHECK(b.find_branch("slow_mixed")->role == BranchRole::Negative);
    CHECK(b.find_branch("ultraslow_positive")->role == BranchRole::Positive);

    BursterParams bad;
    bad.ultraslow_positive.tau = bad.fast_mixed.tau;  // breaks the ordering
    CHECK_THROWS_AS(build_burster(bad), std::invalid_argument);
}

TEST_CASE("hco requires an inhibitory reversal below rest") {
    OnePortCircuit a = build_burster();
    OnePortCircuit b = build_burster();
    CHECK_THROWS_AS(build_hco(a, b, 1.0, 0.0, 1.0), std::invalid_argument);
    const NetworkCircuit net = build_hco(a, b, 1.0, -2.0, 1.0);
    REQUIRE(net.synapses.size() == 2);
    CHECK(net.synapses[0].pre == 0);
    CHECK(net.synapses[0].post == 1);
    CHECK(net.synapses[1].pre == 1);
    CHECK(net.synapses[1].post == 0);
}

TEST_CASE("default hco breaks symmetry through initial conditions only") {
    const HcoDefaults d = build_default_hco();
    REQUIRE(d.network.nodes.size() == 2);
    CHECK(d.network.nodes[0].v_init != d.network.nodes[1].v_init);
    CHECK(d.input_a == d.input_b);
    for (const auto& br : d.network.nodes[0].branches) {
        const auto* other = d.network.nodes[1].find_branch(br.name);
        REQUIRE(other != nullptr);
        CHECK(br.role == other->role);
    }
}

TEST_CASE("rc network builder validates shapes") {
    std::vector<double> C = {1.0, 2.0};
    std::vector<LeakBranch> leaks = {{1.0, 0.0}, {0.5, 0.0}};
    const NetworkCircuit net =
        build_rc_network(2, C, leaks, {{0, 1, 0.3}});
    CHECK(net.nodes.size() == 2);
    CHECK(net.gap_junctions.size() == 1);
    CHECK_THROWS_AS(build_rc_network(3, C, leaks, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_rc_network(2, C, leaks, {{0, 5, 0.3}}),
                    std::out_of_range);
}

TEST_CASE("state size counts voltage plus internal states") {
    const OnePortCircuit fhn = build_fhn(1.0, 100.0, 1.0, 1.0);
    CHECK(fhn.state_size() == 2);  // V and the inductor current
    const OnePortCircuit b = build_burster();
    CHECK(b.state_size() == 5);  // V and four gates
}
