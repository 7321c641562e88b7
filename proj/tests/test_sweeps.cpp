#include <cmath>

#include "doctest.h"
#include "spikeport/circuits.hpp"
#include "spikeport/sweeps.hpp"

using namespace spikeport;

namespace {

SweepSpec burster_spec() {
    SweepSpec spec;
    spec.circuit.nodes.push_back(build_burster());
    spec.inputs = {default_burster_input()};
    spec.sim.dt = 0.01;
    spec.sim.horizon = 60.0;
    spec.classifier.threshold = 0.0;
    spec.classifier.refractory = 0.3;
    return spec;
}

// pin the two slow adaptation branches at zero through singleton grids,
// leaving the fast spiking subsystem
void ablate_slow_branches(SweepSpec& spec) {
    spec.paths.push_back({0, "slow_mixed"});
    spec.grids.push_back({0.0});
    spec.paths.push_back({0, "ultraslow_positive"});
    spec.grids.push_back({0.0});
}

}  // namespace

TEST_CASE("grid enumeration is row-major and complete") {
    SweepSpec spec = burster_spec();
    spec.sim.horizon = 1.0;  // ordering test; classification content unused
    spec.paths = {{0, "fast_mixed"}, {0, "slow_positive"}};
    spec.grids = {{0.5, 1.0, 1.5}, {10.0, 20.0}};
    const BehaviorMap map = run_sweep(spec, 1);
    REQUIRE(map.cells.size() == 6);
    // first path is the slow index
    const double expect[6][2] = {{0.5, 10.0}, {0.5, 20.0}, {1.0, 10.0},
                                 {1.0, 20.0}, {1.5, 10.0}, {1.5, 20.0}};
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(map.cells[i].params[0] == doctest::Approx(expect[i][0]));
        CHECK(map.cells[i].params[1] == doctest::Approx(expect[i][1]));
    }
}

TEST_CASE("content hash is identical across thread counts") {
    SweepSpec spec = burster_spec();
    spec.paths = {{0, "fast_mixed"}};
    spec.grids = {{0.0, 2.0, 4.0, 6.0}};
    ablate_slow_branches(spec);
    const BehaviorMap one = run_sweep(spec, 1);
    const BehaviorMap four = run_sweep(spec, 4);
    CHECK(one.content_hash() == four.content_hash());
    CHECK(one.to_csv() == four.to_csv());
}

TEST_CASE("zeroed negative branch relaxes the role requirement") {
    // scaling a negative-range branch to 0 makes it passive; the sweep must
    // still classify the cell, not fail it
    SweepSpec spec = burster_spec();
    spec.paths = {{0, "fast_mixed"}};
    spec.grids = {{0.0, 4.0}};
    ablate_slow_branches(spec);
    const BehaviorMap map = run_sweep(spec, 1);
    REQUIRE(map.cells.size() == 2);
    CHECK_FALSE(map.cells[0].failed);
    CHECK(map.cells[0].node_class[0] == Behavior::Quiescent);
    CHECK(map.cells[1].node_class[0] == Behavior::Spiking);
}

TEST_CASE("apply_param rejects unknown paths") {
    NetworkCircuit net;
    net.nodes.push_back(build_burster());
    CHECK_THROWS(apply_param(net, {0, "no_such_branch"}, 1.0));
    CHECK_THROWS(apply_param(net, {3, "fast_mixed"}, 1.0));
    CHECK_THROWS(apply_param(net, {0, "synapses"}, 1.0));  // no synapses
}

TEST_CASE("apply_param reaches synapse conductances") {
    HcoDefaults hco = build_default_hco();
    apply_param(hco.network, {0, "synapses"}, 0.125);
    for (const Synapse& s : hco.network.synapses)
        CHECK(s.g_max == doctest::Approx(0.125));
}

TEST_CASE("spec validation") {
    SweepSpec spec = burster_spec();
    spec.paths = {{0, "fast_mixed"}};
    spec.grids = {};  // mismatch
    CHECK_THROWS(spec.validate());
    spec.grids = {{1.0}};
    spec.inputs = {};  // one per node required
    CHECK_THROWS(spec.validate());
}

TEST_CASE("csv has one row per cell with the network label last") {
    SweepSpec spec = burster_spec();
    spec.paths = {{0, "fast_mixed"}};
    spec.grids = {{0.0, 4.0}};
    ablate_slow_branches(spec);
    const BehaviorMap map = run_sweep(spec, 1);
    const std::string csv = map.to_csv();
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 3);  // header + 2 cells
    CHECK(csv.find("Quiescent") != std::string::npos);
    CHECK(csv.find("Spiking") != std::string::npos);
    CHECK(csv.rfind("cell,param_1,param_2,param_3,node_1,network_class,failed",
                    0) == 0);
}
