#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikeport/circuits.hpp"

namespace spikeport {

enum class Method { ExplicitRK4, SemiImplicitEuler };

struct NoiseConfig {
    double std = 0.0;  // current noise intensity per unit time
    std::uint64_t seed = 0;
};

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    Method method = Method::SemiImplicitEuler;
    std::optional<NoiseConfig> noise;
    std::optional<std::vector<double>> initial_state;

    std::size_t steps() const;
    void validate() const;
};

struct DCSolveConfig {
    double outer_tol = 1e-8;  // L2 residual on V between outer iterates
    double inner_tol = 1e-10;
    int max_outer = 200;
    double damping = 0.5;  // rho in (0, 1]
    int continuation_steps = 10;

    void validate() const;
};

struct SolveReport {
    std::vector<std::string> names;
    std::vector<Signal> trajectory;
    std::vector<double> residual_history;
    bool converged = false;
    int outer_iterations = 0;
    std::vector<std::string> diagnostics;

    const Signal& state(const std::string& name) const;
    /// Structured line-delimited key=value summary.
    std::string summary() const;
};

struct BlowUpError : std::runtime_error {
    double time;
    explicit BlowUpError(double t)
        : std::runtime_error("state divergence (|V| > 1e6) at t=" +
                             std::to_string(t)),
          time(t) {}
};

// ---------------------------------------------------------------------------
// time-stepping simulator
// ---------------------------------------------------------------------------

SolveReport simulate(const OnePortCircuit& circuit, const Signal& i_ext,
                     const SimConfig& cfg);
SolveReport simulate(const NetworkCircuit& network,
                     const std::vector<Signal>& i_ext, const SimConfig& cfg);

/// Observer variant: simulates a copy of the circuit driven by
/// i_ext + K*(v_measured - V̂). Used by the estimation module.
SolveReport simulate_with_injection(const OnePortCircuit& circuit,
                                    const Signal& i_ext,
                                    const Signal& v_measured, double gain,
                                    const SimConfig& cfg);

// ---------------------------------------------------------------------------
// difference-of-monotone splitting engine
// ---------------------------------------------------------------------------

/// First-order passive plant, inverted on the grid by the same scheme as
/// the simulator: P^{-1}(V)[n] = C*(V[n+1]-V[n])/dt + g*(V[n] - v_leak).
struct PlantInverse {
    double capacitance = 1.0;
    double g_leak = 0.0;
    double v_leak = 0.0;
};

/// Splits a one-port circuit into plant + C1 - C2. Negative-tagged
/// cubic-minus-linear branches split into a cubic (C1) and a linear (C2)
/// part; other negative-tagged static branches contribute their monotone
/// envelope split via an added linear shear.
struct FeedbackSystem {
    PlantInverse plant;
    OperatorSpec c1;
    OperatorSpec c2;
};
FeedbackSystem decompose(const OnePortCircuit& circuit);

/// r(V)[n] = P^{-1}(V)[n] + C1(V)[n] - C2(V)[n] - I*[n], n = 0..N-2.
/// Zero exactly on discrete closed-loop trajectories of the simulator.
Signal feedback_residual(const PlantInverse& plant, const OperatorSpec& c1,
                         const OperatorSpec& c2, const Signal& i_star,
                         const Signal& v);

/// Outer loop of the splitting iteration
///   0 = P^{-1}(V_{i+1}) + C1(V_{i+1}) - I* - C2(V_i),
/// relaxed by damping, stopping on the iterate increment or on the
/// independent feedback residual. Nonconvergence is a report outcome.
SolveReport dc_solve(const PlantInverse& plant, const OperatorSpec& c1,
                     const OperatorSpec& c2, const Signal& i_star,
                     const Signal& v_init, const DCSolveConfig& cfg);

/// Solves at k=0 (globally monotone), then ramps k to k_target in equal
/// increments, warm-starting each dc_solve from the previous solution.
SolveReport continuation_solve(const PlantInverse& plant,
                               const OperatorSpec& c1,
                               const std::function<OperatorSpec(double)>& c2_at,
                               double k_target, const Signal& i_star,
                               const DCSolveConfig& cfg);

/// x with ||op(x) - target||_L2 <= inner_tol via the proximal-point
/// iteration x <- (id + alpha*op)^{-1}(x + alpha*target).
Signal monotone_solve(const OperatorSpec& op, const Signal& target,
                      double inner_tol, int max_iter);

}  // namespace spikeport
