#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spikeport/signal.hpp"

namespace spikeport {

// ---------------------------------------------------------------------------
// Static scalar functions
// ---------------------------------------------------------------------------

struct Linear {
    double slope = 1.0;  // I = a * V
};

struct Cubic {
    double coeff = 1.0;  // I = c * V^3
};

struct CubicMinusLinear {
    double cubic = 1.0;   // c
    double linear = 0.0;  // k;  I = c*V^3 - k*V
};

/// y = 0 for u <= 0, g*u for 0 <= u <= 1/g, 1 for u >= 1/g. Corner points
/// carry the value from both sides (closure).
struct Saturation {
    double gain = 1.0;  // g > 0
};

struct SigmoidFn {
    double slope = 1.0;   // may be negative (inactivation curves)
    double center = 0.0;  // y = 1 / (1 + exp(-slope*(v - center)))

    double operator()(double v) const;
    double deriv(double v) const;
};

struct PiecewiseLinear {
    std::vector<std::pair<double, double>> points;  // strictly increasing x
};

using StaticFunction = std::variant<Linear, Cubic, CubicMinusLinear,
                                    Saturation, SigmoidFn, PiecewiseLinear>;

double static_eval(const StaticFunction& f, double v);
double static_deriv(const StaticFunction& f, double v);
void static_validate(const StaticFunction& f);

// ---------------------------------------------------------------------------
// First-order dynamic blocks
// ---------------------------------------------------------------------------

/// tau * xdot = gain * u - x,  y = x + feedthrough * u.
/// Monotone as an operator iff gain >= 0 and feedthrough >= 0.
struct LTIFirstOrder {
    double gain = 1.0;
    double tau = 1.0;  // seconds, > 0
    double feedthrough = 0.0;
};

/// First-order gating kinetics tau * mdot = m_inf(V) - m, m in [0, 1].
struct Gate {
    enum class Kind { Activation, Inactivation };
    SigmoidFn steady_state;
    double tau = 1.0;  // constant per gate
    int exponent = 1;
    Kind kind = Kind::Activation;
};

/// Gated current source I = g_max * prod_i m_i^e_i * (V - reversal).
struct ConductanceBranch {
    double g_max = 0.0;   // siemens, >= 0
    double reversal = 0.0;  // battery (Nernst) potential
    std::vector<Gate> gates;
    std::string name;

    void validate() const;
    /// Steady-state static reduction I(V) with all gates at m_inf(V).
    double static_current(double v) const;
    double static_slope(double v) const;
};

// ---------------------------------------------------------------------------
// Composable operator descriptions
// ---------------------------------------------------------------------------

struct OperatorSpec;

struct SumOp {
    std::vector<OperatorSpec> terms;
};

struct ScaledOp {
    double factor = 1.0;  // >= 0, preserves monotonicity
    std::shared_ptr<const OperatorSpec> inner;
};

struct OperatorSpec {
    std::variant<StaticFunction, LTIFirstOrder, ConductanceBranch, SumOp,
                 ScaledOp>
        node;
};

OperatorSpec make_static(StaticFunction f);
OperatorSpec make_lti(LTIFirstOrder l);
OperatorSpec make_branch(ConductanceBranch b);
OperatorSpec make_sum(std::vector<OperatorSpec> terms);
OperatorSpec make_scaled(double factor, OperatorSpec inner);
OperatorSpec make_zero();

/// C = C1 - C2 with each part independently monotone.
struct MixedOperator {
    OperatorSpec positive_part;  // C1
    OperatorSpec negative_part;  // C2
};

// ---------------------------------------------------------------------------
// Causal step-wise evaluation
// ---------------------------------------------------------------------------

/// Stateful sample-by-sample evaluator of an OperatorSpec. peek() computes
/// the output the next input would produce without committing internal state;
/// commit() advances. Gates update by the exact exponential step, first-order
/// blocks by the implicit Euler step; both match the circuit simulator.
class OperatorRunner {
  public:
    OperatorRunner(const OperatorSpec& spec, double dt);

    double peek(double u) const;
    void commit(double u);
    double step(double u) {
        double y = peek(u);
        commit(u);
        return y;
    }

    /// Rest for zero input held forever: LTI states 0, gates at m_inf(0).
    void reset();
    /// States consistent with input v0 held forever.
    void init_from(double v0);

    bool stiffness_flag() const { return stiff_; }

  private:
    struct Node;
    std::shared_ptr<Node> root_;
    double dt_;
    bool stiff_ = false;
};

struct EvalOptions {
    std::optional<double> init_input;  // default: rest state
};

struct EvalReport {
    bool stiffness_warning = false;  // some tau < 2*dt
};

Signal evaluate(const OperatorSpec& op, const Signal& v,
                const EvalOptions& opts = {}, EvalReport* report = nullptr);
Signal evaluate(const MixedOperator& op, const Signal& v,
                const EvalOptions& opts = {}, EvalReport* report = nullptr);

// ---------------------------------------------------------------------------
// Monotonicity certification
// ---------------------------------------------------------------------------

struct ProbePair {
    Signal a;
    Signal b;
};

struct Certificate {
    bool pass = true;
    std::optional<std::size_t> witness_index;
    double inner_value = 0.0;  // violating pairing value when failed
    ProbePair witness;
};

/// Steps, ramps, sinusoids at three frequencies, and seeded smooth-random
/// pairs; 8 of each.
std::vector<ProbePair> default_probe_suite(double dt, std::size_t n,
                                           double amplitude = 2.0,
                                           std::uint64_t seed = 0x5eedULL);

/// Empirical falsification of <op(v1)-op(v2), v1-v2> >= -1e-9*||v1-v2||^2.
/// Necessary-condition test, not a proof.
Certificate monotonicity_certificate(const OperatorSpec& op,
                                     const std::vector<ProbePair>& probes);

// ---------------------------------------------------------------------------
// Negative conductance ranges
// ---------------------------------------------------------------------------

struct Interval {
    double lo;
    double hi;
};

/// Intervals of negative slope of f on [lo, hi], boundaries bisected to
/// 1e-9 abscissa accuracy. Empty for monotone f.
std::vector<Interval> negative_conductance_range(const StaticFunction& f,
                                                 double lo = -5.0,
                                                 double hi = 5.0);

/// Same search applied to an arbitrary scalar function (used for the static
/// reduction of gated branches).
template <class F>
std::vector<Interval> negative_range_of(F&& fn, double lo, double hi);

namespace detail {
/// Dense sampling + sign-change bisection on a slope function.
std::vector<Interval> negative_range_scan(double lo, double hi,
                                          double (*slope_at)(const void*,
                                                             double),
                                          const void* ctx);
}  // namespace detail

template <class F>
std::vector<Interval> negative_range_of(F&& fn, double lo, double hi) {
    auto thunk = +[](const void* ctx, double x) -> double {
        const auto& f = *static_cast<const std::decay_t<F>*>(ctx);
        const double h = 1e-6;
        return (f(x + h) - f(x - h)) / (2.0 * h);
    };
    return detail::negative_range_scan(lo, hi, thunk, &fn);
}

// ---------------------------------------------------------------------------
// Resolvent
// ---------------------------------------------------------------------------

struct NonconvergenceError : std::runtime_error {
    double residual;
    NonconvergenceError(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
};

/// x with x + alpha*op(x) = target, residual <= 1e-10 per sample. Causal:
/// solved sample by sample with a safeguarded Newton/bisection on the
/// committed-state step map.
Signal resolvent(const OperatorSpec& op, double alpha, const Signal& target,
                 const EvalOptions& opts = {});

}  // namespace spikeport
