#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spikeport/operators.hpp"

namespace spikeport {

enum class BranchRole { Positive, Negative };

/// One controller branch of a one-port circuit, tagged by conductance role.
/// Negative-tagged branches must exhibit a nonempty negative conductance
/// range in their static reduction.
struct ControllerBranch {
    std::string name;
    BranchRole role = BranchRole::Positive;
    OperatorSpec op;  // StaticFunction | LTIFirstOrder | ConductanceBranch
};

struct LeakBranch {
    double g = 0.0;     // >= 0
    double v_rev = 0.0;
};

/// Port interconnection of a linear capacitor, a leak, and controller
/// branches. Kirchhoff with outward branch currents positive:
///   C dV/dt = I_ext - leak - sum of branch currents.
struct OnePortCircuit {
    double capacitance = 1.0;  // > 0
    LeakBranch leak;
    std::vector<ControllerBranch> branches;
    double v_init = 0.0;

    void validate() const;
    std::size_t state_size() const;  // V plus branch internal states
    /// Steady-state total static current of all branches + leak at voltage v.
    double static_current(double v) const;
    const ControllerBranch* find_branch(const std::string& name) const;
    ControllerBranch* find_branch(const std::string& name);
};

struct GapJunction {
    std::size_t i = 0, j = 0;
    double g = 0.0;  // symmetric resistive coupling
};

/// Graded synapse: tau_s * ds/dt = s_inf(V_pre) - s, current into post
/// node g_max * s * (V_post - v_rev) (outward positive).
struct Synapse {
    std::size_t pre = 0, post = 0;
    double g_max = 0.0;
    double v_rev = 0.0;
    SigmoidFn activation;
    double tau = 1.0;
};

struct NetworkCircuit {
    std::vector<OnePortCircuit> nodes;
    std::vector<GapJunction> gap_junctions;
    std::vector<Synapse> synapses;

    void validate() const;
    std::size_t state_size() const;
};

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

/// FitzHugh-Nagumo one-port:
///   C dV/dt = k V - V^3/3 - I_L + I_ext,   L dI_L/dt = -I_L + R V.
/// Controller = cubic-minus-linear static device plus an RL branch.
OnePortCircuit build_fhn(double C, double L, double R, double k);

struct BursterBranchParams {
    double g_max;
    double reversal;
    double gate_slope;
    double gate_center;
    double tau;
};

/// Four-branch controller taxonomy: fast mixed, slow positive, slow mixed,
/// ultra-slow positive, over a passive leak. Defaults are a calibrated
/// normalized parameter set under which the circuit bursts for constant
/// input inside the bursting window (see default_burster_input()).
struct BursterParams {
    double capacitance = 1.0;
    double leak_g = 1.0;
    double leak_v = -0.5;
    BursterBranchParams fast_mixed = {4.0, 2.0, 8.0, -0.3, 0.05};
    BursterBranchParams slow_positive = {10.0, -1.5, 8.0, -0.2, 0.5};
    BursterBranchParams slow_mixed = {0.8, 2.0, 8.0, -0.4, 2.0};
    BursterBranchParams ultraslow_positive = {1.8, -1.5, 8.0, -0.65, 20.0};
};

OnePortCircuit build_burster(const BursterParams& params = {});
double default_burster_input();

/// Two bursters coupled by mutual inhibitory synapses (no gap junctions).
/// v_syn must lie below both resting potentials.
NetworkCircuit build_hco(OnePortCircuit a, OnePortCircuit b, double g_syn,
                         double v_syn, double tau_syn);

struct HcoDefaults {
    NetworkCircuit network;
    double input_a;
    double input_b;
};
HcoDefaults build_default_hco();

/// Passive RC network: n capacitances with leaks, interconnected by
/// resistive wires. Monotone as an operator from injected currents to
/// node voltages.
NetworkCircuit build_rc_network(std::size_t n, const std::vector<double>& C,
                                const std::vector<LeakBranch>& leaks,
                                const std::vector<GapJunction>& gaps);

}  // namespace spikeport
