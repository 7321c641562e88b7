#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikeport/analysis.hpp"
#include "spikeport/circuits.hpp"
#include "spikeport/solvers.hpp"

namespace spikeport {

/// Path to a swept maximal conductance: node index + branch name, or the
/// synapse conductances when branch == "synapses".
struct ParamPath {
    std::size_t node = 0;
    std::string branch;
};

struct ClassifierSettings {
    double threshold = 0.0;
    double refractory = 0.0;
};

struct SweepSpec {
    NetworkCircuit circuit;
    std::vector<double> inputs;  // constant external current per node
    std::vector<ParamPath> paths;
    std::vector<std::vector<double>> grids;  // one grid per path
    SimConfig sim;
    ClassifierSettings classifier;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SweepCell {
    std::vector<double> params;
    std::vector<Behavior> node_class;
    std::string network_class;
    bool failed = false;
};

struct BehaviorMap {
    std::vector<SweepCell> cells;  // complete over the grid, row-major
    std::uint64_t seed = 0;

    /// One row per cell: parameter values, per-node class, network class,
    /// failure flag.
    std::string to_csv() const;
    /// FNV-1a over the CSV content; identical across reruns and thread
    /// counts.
    std::uint64_t content_hash() const;
    /// Optional heat map for 1- and 2-parameter sweeps.
    std::string to_svg() const;
};

/// Simulates every grid point independently (identical seeds), classifies
/// each node and the network. Per-point blow-ups are recorded as failed
/// cells, the sweep continues. Deterministic for fixed spec regardless of
/// thread count.
BehaviorMap run_sweep(const SweepSpec& spec, int threads = 1);

/// Sets the swept conductance at a path (used by run_sweep and the tests).
void apply_param(NetworkCircuit& circuit, const ParamPath& path, double value);

}  // namespace spikeport
