#pragma once

#include <string>
#include <vector>

#include "spikeport/circuits.hpp"
#include "spikeport/solvers.hpp"

namespace spikeport {

struct ObserverConfig {
    double injection_gain = 0.0;        // K
    double forgetting = 1.0;            // lambda in (0, 1]
    double initial_covariance = 100.0;  // P0 = scale * I
    std::vector<double> theta_init;     // one per unknown g_max, >= 0

    void validate() const;
};

struct EstimationReport {
    std::vector<Signal> theta;  // one trajectory per unknown parameter
    Signal v_hat;               // one-step voltage prediction
    Signal cov_trace;
    std::vector<double> theta_final;
    double final_relative_error = -1.0;  // -1 when truth unknown
    bool covariance_reset = false;

    /// CSV: `t,theta_1,...,theta_n,vhat,cov_trace`.
    std::string to_csv() const;
};

/// K_min = sum over negative-tagged branches of the worst negative slope of
/// the branch's static I-V reduction (0 for all-positive circuits). Output
/// feedback I = -K*V + I_aux with K >= K_min monotonifies the static
/// reduction.
double output_feedback_gain_bound(const OnePortCircuit& circuit);

/// Observer as a mere copy of the circuit driven by I + K*(V - V_hat).
/// Contracts to the measured trajectory for sufficient K; a warning
/// diagnostic is attached when K is below the gain bound.
SolveReport contracting_observer(const OnePortCircuit& circuit_copy,
                                 const Signal& i_measured,
                                 const Signal& v_measured, double gain,
                                 const SimConfig& cfg);

/// Exponentially weighted recursive least squares over the unknown maximal
/// conductances of the named branches. Gate states in the regressor are
/// reconstructed from the measured voltage (kinetics known, g_max unknown).
EstimationReport rls_estimate(const OnePortCircuit& model,
                              const std::vector<std::string>& unknown_branches,
                              const Signal& i_ext, const Signal& v_measured,
                              const ObserverConfig& cfg,
                              const std::vector<double>* theta_truth = nullptr);

/// Batch normal-equations solution of the same regression (test oracle for
/// the lambda = 1 equivalence).
std::vector<double> batch_least_squares(
    const OnePortCircuit& model, const std::vector<std::string>& unknown_branches,
    const Signal& i_ext, const Signal& v_measured);

}  // namespace spikeport
