#include "spikeport/amplifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikeport {

namespace {

void push_unique(std::vector<double>& v, double y) {
    for (double e : v)
        if (std::fabs(e - y) <= 1e-14) return;
    v.push_back(y);
}

}  // namespace

double negative_feedback_slope(double g, double k) { return g / (1.0 + g * k); }

Interval2 bistable_range(double g, double k) {
    if (!(k > 1.0 / g))
        throw std::invalid_argument("bistable_range: requires k > 1/g");
    return {1.0 / g - k, 0.0};
}

AmplifierSolutions mixed_amplifier_characteristic(double g, double k,
                                                  FeedbackSign sign,
                                                  double u) {
    if (!(g > 0.0))
        throw std::invalid_argument("amplifier: g must be positive");
    if (k < 0.0)
        throw std::invalid_argument("amplifier: k must be nonnegative");

    AmplifierSolutions out;
    const double inv_g = 1.0 / g;

    if (sign == FeedbackSign::Negative) {
        // y = sat_g(u - k*y): the three branches partition the u axis
        // y = 0        valid iff u <= 0
        // y = gu/(1+gk) valid iff 0 <= u <= 1/g + k
        // y = 1        valid iff u >= 1/g + k
        if (u <= 0.0) push_unique(out.values, 0.0);
        const double ylin = g * u / (1.0 + g * k);
        if (u >= 0.0 && u <= inv_g + k) push_unique(out.values, ylin);
        if (u >= inv_g + k) push_unique(out.values, 1.0);
    } else {
        // y = sat_g(u + k*y)
        // y = 0 valid iff u <= 0;  y = 1 valid iff u >= 1/g - k
        if (u <= 0.0) push_unique(out.values, 0.0);
        if (u >= inv_g - k) push_unique(out.values, 1.0);
        const double denom = 1.0 - g * k;
        if (denom == 0.0) {
            // critical k = 1/g: linear segment is vertical at u = 0
            if (u == 0.0) out.degenerate = true;
        } else {
            const double ylin = g * u / denom;
            const double arg = k * ylin + u;
            if (ylin >= 0.0 && ylin <= 1.0 && arg >= 0.0 && arg <= inv_g)
                push_unique(out.values, ylin);
        }
    }
    std::sort(out.values.begin(), out.values.end());
    return out;
}

Signal hysteresis_trace(double g, double k, FeedbackSign sign,
                        const Signal& u_sweep) {
    if (sign != FeedbackSign::Positive || !(g > 0.0) || !(k > 1.0 / g))
        throw std::invalid_argument(
            "hysteresis_trace: requires positive feedback with k > 1/g");
    const double down_jump = 1.0 / g - k;  // high branch disappears below this
    const double up_jump = 0.0;            // low branch disappears above this

    Signal y = Signal::zeros(u_sweep.size(), u_sweep.dt, u_sweep.unit);
    if (u_sweep.size() == 0) return y;

    bool high = u_sweep.samples.front() > up_jump;
    for (std::size_t i = 0; i < u_sweep.size(); ++i) {
        const double u = u_sweep.samples[i];
        if (!high && u > up_jump) high = true;
        if (high && u < down_jump) high = false;
        y.samples[i] = high ? 1.0 : 0.0;
    }
    return y;
}

}  // namespace spikeport
