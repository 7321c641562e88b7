#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spikeport/circuits.hpp"
#include "spikeport/motor.hpp"
#include "spikeport/solvers.hpp"
#include "spikeport/sweeps.hpp"

namespace spikeport {

struct ConfigError : std::runtime_error {
    std::string section;
    ConfigError(const std::string& sec, const std::string& what)
        : std::runtime_error("config [" + sec + "]: " + what), section(sec) {}
};

// --- input generators -------------------------------------------------------

struct ConstantInput {
    double value = 0.0;
};
struct StepInput {
    double t0 = 0.0;
    double baseline = 0.0;
    double level = 0.0;
};
struct TriangleInput {
    double start = 0.0;  // start -> peak -> start over the horizon
    double peak = 1.0;
};
/// Seeded Ornstein-Uhlenbeck current. Frozen (same seed) across trials in
/// the reliability experiment.
struct OuInput {
    double mean = 0.0;
    double std = 1.0;
    double tau = 1.0;
    std::uint64_t seed = 1;
};

using InputSpec =
    std::variant<ConstantInput, StepInput, TriangleInput, OuInput>;

Signal render_input(const InputSpec& spec, std::size_t n, double dt);

// --- circuit builders --------------------------------------------------------

struct FhnSpec {
    double C = 1.0, L = 100.0, R = 1.0, k = 1.0;
};
struct BursterSpec {
    BursterParams params;
};
struct HcoSpec {
    double g_syn = 1.0, v_syn = -2.0, tau_syn = 1.0;
};
struct RcSpec {
    std::size_t n = 1;
    std::vector<double> capacitance;  // broadcast when size 1
    std::vector<double> leak_g;
    std::vector<double> leak_v;
    std::vector<GapJunction> gaps;
};

using CircuitSpec = std::variant<FhnSpec, BursterSpec, HcoSpec, RcSpec>;

NetworkCircuit build_circuit(const CircuitSpec& spec);

// --- per-experiment sections --------------------------------------------------

struct AnalysisSpec {
    double threshold = 0.0;
    double refractory = 0.0;
};

struct DcSpec {
    DCSolveConfig cfg;
    double k_target = -1.0;  // < 0: use the circuit's own k
    bool require_converged = true;
    bool continuation = true;
};

struct ReliabilitySpec {
    int trials = 25;
    double trial_noise_std = 0.005;
    double init_perturb = 0.05;
    double window = 1.0;
    InputSpec step_input = StepInput{};
    InputSpec frozen_input = OuInput{};
};

struct SweepSectionSpec {
    std::vector<ParamPath> paths;
    std::vector<std::vector<double>> grids;
};

struct EstimateSpec {
    std::vector<std::string> unknown_branches;
    std::vector<double> theta_truth;
    double forgetting = 1.0;
    double initial_covariance = 100.0;
    double observer_gain = -1.0;  // < 0: derive from the gain bound
};

struct AmplifierSpec {
    double g = 10.0;
    double k = 0.2;
    bool positive = true;
    double u_min = -0.2;
    double u_max = 0.1;
    std::size_t points = 2001;
};

struct MotorSpec {
    MotorPlant plant;
    MotorControllerParams controller;
    double reference = 1.0;
};

struct OutputSpec {
    std::string dir = "out";
    std::string prefix = "run";
    bool svg = false;
};

struct ScenarioConfig {
    int schema_version = 1;
    std::string experiment = "simulate";
    CircuitSpec circuit = FhnSpec{};
    InputSpec input = ConstantInput{};
    SimConfig sim;
    AnalysisSpec analysis;
    DcSpec dc;
    ReliabilitySpec reliability;
    SweepSectionSpec sweep;
    EstimateSpec estimate;
    AmplifierSpec amplifier;
    MotorSpec motor;
    OutputSpec outputs;
    std::uint64_t seed = 0;
    std::vector<double> node_inputs;  // sweep/network experiments
};

/// Parses and validates; unknown keys are rejected with the offending
/// section named. parse(serialize(parse(x))) yields an identical model.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

}  // namespace spikeport
