#pragma once

#include <vector>

#include "spikeport/signal.hpp"

namespace spikeport {

enum class FeedbackSign { Positive, Negative };

/// All solutions y in [0,1] of y = sat_g(+/- k*y + u), found by exact
/// piecewise-linear branch algebra. Negative feedback is single-valued;
/// positive feedback with k > 1/g is three-valued strictly inside
/// (1/g - k, 0). degenerate marks the critical case k = 1/g where the
/// linear range has shrunk to a vertical segment.
struct AmplifierSolutions {
    std::vector<double> values;  // sorted ascending, deduplicated
    bool degenerate = false;
};

AmplifierSolutions mixed_amplifier_characteristic(double g, double k,
                                                  FeedbackSign sign, double u);

/// Closed-loop small-signal slope of the negative-feedback configuration
/// on its linear range: g / (1 + g*k).
double negative_feedback_slope(double g, double k);

/// Multivalued input range [1/g - k, 0] of the positive-feedback
/// configuration (requires k > 1/g).
struct Interval2 {
    double lo;
    double hi;
};
Interval2 bistable_range(double g, double k);

/// Single-valued trajectory of the positive-feedback relay: follows the
/// current branch until it disappears, then jumps. Up-jump at u = 0,
/// down-jump at u = 1/g - k. Requires positive feedback with k > 1/g.
Signal hysteresis_trace(double g, double k, FeedbackSign sign,
                        const Signal& u_sweep);

}  // namespace spikeport
