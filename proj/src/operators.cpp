#include "spikeport/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace spikeport {

// ---------------------------------------------------------------------------
// static functions
// ---------------------------------------------------------------------------

double SigmoidFn::operator()(double v) const {
    return 1.0 / (1.0 + std::exp(-slope * (v - center)));
}

double SigmoidFn::deriv(double v) const {
    const double s = (*this)(v);
    return slope * s * (1.0 - s);
}

namespace {

double pwl_eval(const PiecewiseLinear& f, double v) {
    const auto& p = f.points;
    if (p.size() == 1) return p.front().second;
    std::size_t hi = 1;
    while (hi + 1 < p.size() && v > p[hi].first) ++hi;
    const auto& [x0, y0] = p[hi - 1];
    const auto& [x1, y1] = p[hi];
    return y0 + (y1 - y0) * (v - x0) / (x1 - x0);
}

double pwl_deriv(const PiecewiseLinear& f, double v) {
    const auto& p = f.points;
    if (p.size() == 1) return 0.0;
    std::size_t hi = 1;
    while (hi + 1 < p.size() && v > p[hi].first) ++hi;
    return (p[hi].second - p[hi - 1].second) / (p[hi].first - p[hi - 1].first);
}

}  // namespace

double static_eval(const StaticFunction& f, double v) {
    return std::visit(
        [v](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return k.slope * v;
            } else if constexpr (std::is_same_v<T, Cubic>) {
                return k.coeff * v * v * v;
            } else if constexpr (std::is_same_v<T, CubicMinusLinear>) {
                return k.cubic * v * v * v - k.linear * v;
            } else if constexpr (std::is_same_v<T, Saturation>) {
                if (v <= 0.0) return 0.0;
                if (v >= 1.0 / k.gain) return 1.0;
                return k.gain * v;
            } else if constexpr (std::is_same_v<T, SigmoidFn>) {
                return k(v);
            } else {
                return pwl_eval(k, v);
            }
        },
        f);
}

double static_deriv(const StaticFunction& f, double v) {
    return std::visit(
        [v](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Linear>) {
                return k.slope;
            } else if constexpr (std::is_same_v<T, Cubic>) {
                return 3.0 * k.coeff * v * v;
            } else if constexpr (std::is_same_v<T, CubicMinusLinear>) {
                return 3.0 * k.cubic * v * v - k.linear;
            } else if constexpr (std::is_same_v<T, Saturation>) {
                return (v >= 0.0 && v <= 1.0 / k.gain) ? k.gain : 0.0;
            } else if constexpr (std::is_same_v<T, SigmoidFn>) {
                return k.deriv(v);
            } else {
                return pwl_deriv(k, v);
            }
        },
        f);
}

void static_validate(const StaticFunction& f) {
    if (const auto* s = std::get_if<Saturation>(&f)) {
        if (!(s->gain > 0.0))
            throw std::invalid_argument("Saturation: gain must be positive");
    }
    if (const auto* p = std::get_if<PiecewiseLinear>(&f)) {
        if (p->points.empty())
            throw std::invalid_argument("PiecewiseLinear: no breakpoints");
        for (std::size_t i = 1; i < p->points.size(); ++i)
            if (!(p->points[i].first > p->points[i - 1].first))
                throw std::invalid_argument(
                    "PiecewiseLinear: breakpoints must strictly increase");
    }
}

// ---------------------------------------------------------------------------
// conductance branches
// ---------------------------------------------------------------------------

void ConductanceBranch::validate() const {
    if (!(g_max >= 0.0))
        throw std::invalid_argument("ConductanceBranch: g_max must be >= 0");
    for (const Gate& g : gates) {
        if (!(g.tau > 0.0))
            throw std::invalid_argument("Gate: tau must be positive");
        if (g.exponent < 1)
            throw std::invalid_argument("Gate: exponent must be >= 1");
        if (g.kind == Gate::Kind::Activation && g.steady_state.slope < 0.0)
            throw std::invalid_argument(
                "Gate: activation steady state must be increasing");
        if (g.kind == Gate::Kind::Inactivation && g.steady_state.slope > 0.0)
            throw std::invalid_argument(
                "Gate: inactivation steady state must be decreasing");
    }
}

double ConductanceBranch::static_current(double v) const {
    double g = g_max;
    for (const Gate& gate : gates)
        g *= std::pow(gate.steady_state(v), gate.exponent);
    return g * (v - reversal);
}

double ConductanceBranch::static_slope(double v) const {
    double prod = 1.0;
    for (const Gate& gate : gates)
        prod *= std::pow(gate.steady_state(v), gate.exponent);
    double dprod = 0.0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
        double term = gates[i].exponent *
                      std::pow(gates[i].steady_state(v), gates[i].exponent - 1) *
                      gates[i].steady_state.deriv(v);
        for (std::size_t j = 0; j < gates.size(); ++j)
            if (j != i)
                term *= std::pow(gates[j].steady_state(v), gates[j].exponent);
        dprod += term;
    }
    return g_max * (prod + (v - reversal) * dprod);
}

// ---------------------------------------------------------------------------
// operator composition
// ---------------------------------------------------------------------------

OperatorSpec make_static(StaticFunction f) {
    static_validate(f);
    return OperatorSpec{std::move(f)};
}

OperatorSpec make_lti(LTIFirstOrder l) {
    if (!(l.tau > 0.0))
        throw std::invalid_argument("LTIFirstOrder: tau must be positive");
    return OperatorSpec{l};
}

OperatorSpec make_branch(ConductanceBranch b) {
    b.validate();
    return OperatorSpec{std::move(b)};
}

OperatorSpec make_sum(std::vector<OperatorSpec> terms) {
    return OperatorSpec{SumOp{std::move(terms)}};
}

OperatorSpec make_scaled(double factor, OperatorSpec inner) {
    if (!(factor >= 0.0))
        throw std::invalid_argument("Scaled: factor must be nonnegative");
    return OperatorSpec{
        ScaledOp{factor, std::make_shared<OperatorSpec>(std::move(inner))}};
}

OperatorSpec make_zero() { return make_static(Linear{0.0}); }

// ---------------------------------------------------------------------------
// runner
// ---------------------------------------------------------------------------

struct OperatorRunner::Node {
    struct StaticN {
        StaticFunction f;
    };
    struct LtiN {
        LTIFirstOrder p;
        double x = 0.0;
    };
    struct BranchN {
        ConductanceBranch b;
        std::vector<double> m;
    };
    struct SumN {
        std::vector<std::shared_ptr<Node>> kids;
    };
    struct ScaledN {
        double factor = 1.0;
        std::shared_ptr<Node> kid;
    };

    std::variant<StaticN, LtiN, BranchN, SumN, ScaledN> v;
    double dt = 1.0;

    static std::shared_ptr<Node> build(const OperatorSpec& spec, double dt) {
        auto node = std::make_shared<Node>();
        node->dt = dt;
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, StaticFunction>) {
                    node->v = StaticN{k};
                } else if constexpr (std::is_same_v<T, LTIFirstOrder>) {
                    node->v = LtiN{k, 0.0};
                } else if constexpr (std::is_same_v<T, ConductanceBranch>) {
                    BranchN bn{k, {}};
                    bn.m.resize(k.gates.size(), 0.0);
                    node->v = std::move(bn);
                } else if constexpr (std::is_same_v<T, SumOp>) {
                    SumN sn;
                    for (const auto& t : k.terms)
                        sn.kids.push_back(build(t, dt));
                    node->v = std::move(sn);
                } else {
                    node->v = ScaledN{k.factor, build(*k.inner, dt)};
                }
            },
            spec.node);
        return node;
    }

    static double gate_step(const Gate& g, double m, double u, double dt) {
        const double minf = g.steady_state(u);
        const double next = minf + (m - minf) * std::exp(-dt / g.tau);
        return std::clamp(next, 0.0, 1.0);
    }

    double peek(double u) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, StaticN>) {
                    return static_eval(k.f, u);
                } else if constexpr (std::is_same_v<T, LtiN>) {
                    const double a = dt / k.p.tau;
                    const double x1 = (k.x + a * k.p.gain * u) / (1.0 + a);
                    return x1 + k.p.feedthrough * u;
                } else if constexpr (std::is_same_v<T, BranchN>) {
                    double g = k.b.g_max;
                    for (std::size_t i = 0; i < k.b.gates.size(); ++i)
                        g *= std::pow(gate_step(k.b.gates[i], k.m[i], u, dt),
                                      k.b.gates[i].exponent);
                    return g * (u - k.b.reversal);
                } else if constexpr (std::is_same_v<T, SumN>) {
                    double acc = 0.0;
                    for (const auto& kid : k.kids) acc += kid->peek(u);
                    return acc;
                } else {
                    return k.factor * k.kid->peek(u);
                }
            },
            v);
    }

    void commit(double u) {
        std::visit(
            [&](auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, LtiN>) {
                    const double a = dt / k.p.tau;
                    k.x = (k.x + a * k.p.gain * u) / (1.0 + a);
                } else if constexpr (std::is_same_v<T, BranchN>) {
                    for (std::size_t i = 0; i < k.b.gates.size(); ++i)
                        k.m[i] = gate_step(k.b.gates[i], k.m[i], u, dt);
                } else if constexpr (std::is_same_v<T, SumN>) {
                    for (auto& kid : k.kids) kid->commit(u);
                } else if constexpr (std::is_same_v<T, ScaledN>) {
                    k.kid->commit(u);
                }
            },
            v);
    }

    void init_from(double v0) {
        std::visit(
            [&](auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, LtiN>) {
                    k.x = k.p.gain * v0;
                } else if constexpr (std::is_same_v<T, BranchN>) {
                    for (std::size_t i = 0; i < k.b.gates.size(); ++i)
                        k.m[i] = k.b.gates[i].steady_state(v0);
                } else if constexpr (std::is_same_v<T, SumN>) {
                    for (auto& kid : k.kids) kid->init_from(v0);
                } else if constexpr (std::is_same_v<T, ScaledN>) {
                    k.kid->init_from(v0);
                }
            },
            v);
    }

    bool stiff() const {
        return std::visit(
            [&](const auto& k) -> bool {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, LtiN>) {
                    return k.p.tau < 2.0 * dt;
                } else if constexpr (std::is_same_v<T, BranchN>) {
                    for (const Gate& g : k.b.gates)
                        if (g.tau < 2.0 * dt) return true;
                    return false;
                } else if constexpr (std::is_same_v<T, SumN>) {
                    for (const auto& kid : k.kids)
                        if (kid->stiff()) return true;
                    return false;
                } else if constexpr (std::is_same_v<T, ScaledN>) {
                    return k.kid->stiff();
                } else {
                    return false;
                }
            },
            v);
    }
};

OperatorRunner::OperatorRunner(const OperatorSpec& spec, double dt)
    : root_(Node::build(spec, dt)), dt_(dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("OperatorRunner: dt must be positive");
    stiff_ = root_->stiff();
    reset();
}

double OperatorRunner::peek(double u) const { return root_->peek(u); }
void OperatorRunner::commit(double u) { root_->commit(u); }
void OperatorRunner::reset() { root_->init_from(0.0); }
void OperatorRunner::init_from(double v0) { root_->init_from(v0); }

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

Signal evaluate(const OperatorSpec& op, const Signal& v,
                const EvalOptions& opts, EvalReport* report) {
    for (double s : v.samples)
        if (!std::isfinite(s))
            throw std::invalid_argument("evaluate: non-finite input sample");
    OperatorRunner runner(op, v.dt);
    if (opts.init_input)
        runner.init_from(*opts.init_input);
    if (report) report->stiffness_warning = runner.stiffness_flag();
    Signal out = Signal::zeros(v.size(), v.dt, Unit::Ampere);
    for (std::size_t i = 0; i < v.size(); ++i)
        out.samples[i] = runner.step(v.samples[i]);
    return out;
}

Signal evaluate(const MixedOperator& op, const Signal& v,
                const EvalOptions& opts, EvalReport* report) {
    EvalReport r1, r2;
    Signal pos = evaluate(op.positive_part, v, opts, &r1);
    Signal neg = evaluate(op.negative_part, v, opts, &r2);
    if (report)
        report->stiffness_warning = r1.stiffness_warning || r2.stiffness_warning;
    return subtract(pos, neg);
}

// ---------------------------------------------------------------------------
// probe suites and certification
// ---------------------------------------------------------------------------

std::vector<ProbePair> default_probe_suite(double dt, std::size_t n,
                                           double amplitude,
                                           std::uint64_t seed) {
    std::vector<ProbePair> probes;
    const double horizon = static_cast<double>(n) * dt;

    // 8 step (constant) pairs, levels spanning small to full amplitude so
    // that restricted-range negative conductance is caught
    const double levels[8] = {0.005, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
    for (double lv : levels) {
        probes.push_back({Signal::constant(amplitude * lv, n, dt),
                          Signal::constant(-amplitude * lv, n, dt)});
    }

    // 8 ramp pairs
    for (int i = 0; i < 8; ++i) {
        const double end = amplitude * (0.1 + 0.9 * i / 7.0);
        Signal up = Signal::zeros(n, dt);
        Signal down = Signal::zeros(n, dt);
        for (std::size_t j = 0; j < n; ++j) {
            const double frac = horizon > 0 ? up.time(j) / horizon : 0.0;
            up.samples[j] = end * frac;
            down.samples[j] = -end * frac;
        }
        probes.push_back({std::move(up), std::move(down)});
    }

    // 8 sinusoid pairs over three frequencies
    const double cycles[3] = {1.0, 3.0, 7.0};
    for (int i = 0; i < 8; ++i) {
        const double f = cycles[i % 3];
        const double amp_a = amplitude * (0.2 + 0.1 * i);
        const double amp_b = amplitude * (0.15 + 0.08 * i);
        const double phase = 0.6 * i;
        Signal a = Signal::zeros(n, dt);
        Signal b = Signal::zeros(n, dt);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = 2.0 * M_PI * f / horizon;
            a.samples[j] = amp_a * std::sin(w * a.time(j));
            b.samples[j] = amp_b * std::sin(w * b.time(j) + phase);
        }
        probes.push_back({std::move(a), std::move(b)});
    }

    // 8 seeded smooth-random pairs (sums of a few random sinusoids)
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uf(0.5, 9.5);
    std::uniform_real_distribution<double> up2(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    auto smooth = [&]() {
        Signal s = Signal::zeros(n, dt);
        for (int h = 0; h < 5; ++h) {
            const double f = uf(rng), ph = up2(rng),
                         am = 0.4 * amplitude * ua(rng);
            const double w = 2.0 * M_PI * f / horizon;
            for (std::size_t j = 0; j < n; ++j)
                s.samples[j] += am * std::sin(w * s.time(j) + ph);
        }
        return s;
    };
    for (int i = 0; i < 8; ++i) probes.push_back({smooth(), smooth()});

    return probes;
}

Certificate monotonicity_certificate(const OperatorSpec& op,
                                     const std::vector<ProbePair>& probes) {
    if (probes.empty())
        throw std::invalid_argument(
            "monotonicity_certificate: empty probe suite");
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Signal dv = increment_pair(probes[i].a, probes[i].b);
        const Signal dy = increment_pair(evaluate(op, probes[i].a),
                                         evaluate(op, probes[i].b));
        const double ip = inner_product(dy, dv);
        const double tol = 1e-9 * inner_product(dv, dv);
        if (ip < -tol) {
            Certificate c;
            c.pass = false;
            c.witness_index = i;
            c.inner_value = ip;
            c.witness = probes[i];
            return c;
        }
    }
    return Certificate{};
}

// ---------------------------------------------------------------------------
// negative conductance ranges
// ---------------------------------------------------------------------------

namespace detail {

std::vector<Interval> negative_range_scan(double lo, double hi,
                                          double (*slope_at)(const void*,
                                                             double),
                                          const void* ctx) {
    constexpr int kSamples = 8192;
    const double h = (hi - lo) / kSamples;

    auto refine = [&](double a, double b) {
        // slope changes sign on [a, b]; bisect to 1e-9 abscissa accuracy
        double fa = slope_at(ctx, a);
        for (int it = 0; it < 80 && b - a > 1e-9; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = slope_at(ctx, mid);
            if ((fa < 0.0) == (fm < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return 0.5 * (a + b);
    };

    std::vector<Interval> out;
    bool inside = false;
    double start = lo;
    double prev_x = lo;
    bool prev_neg = slope_at(ctx, lo) < 0.0;
    if (prev_neg) {
        inside = true;
        start = lo;
    }
    for (int i = 1; i <= kSamples; ++i) {
        const double x = lo + i * h;
        const bool neg = slope_at(ctx, x) < 0.0;
        if (neg != prev_neg) {
            const double boundary = refine(prev_x, x);
            if (neg) {
                inside = true;
                start = boundary;
            } else {
                out.push_back({start, boundary});
                inside = false;
            }
        }
        prev_neg = neg;
        prev_x = x;
    }
    if (inside) out.push_back({start, hi});
    return out;
}

}  // namespace detail

std::vector<Interval> negative_conductance_range(const StaticFunction& f,
                                                 double lo, double hi) {
    auto thunk = +[](const void* ctx, double x) -> double {
        return static_deriv(*static_cast<const StaticFunction*>(ctx), x);
    };
    return detail::negative_range_scan(lo, hi, thunk, &f);
}

// ---------------------------------------------------------------------------
// resolvent
// ---------------------------------------------------------------------------

Signal resolvent(const OperatorSpec& op, double alpha, const Signal& target,
                 const EvalOptions& opts) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("resolvent: alpha must be positive");
    OperatorRunner runner(op, target.dt);
    if (opts.init_input) runner.init_from(*opts.init_input);

    constexpr double kTol = 1e-10;
    constexpr int kMaxIter = 10000;

    Signal out = Signal::zeros(target.size(), target.dt, target.unit);
    double guess = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double t = target.samples[i];
        auto residual = [&](double x) { return x + alpha * runner.peek(x) - t; };

        // bracket the root; residual(x) is increasing in x for monotone op
        double lo = guess, hi = guess;
        double span = 1.0 + std::fabs(guess) + std::fabs(t);
        int iter = 0;
        while (residual(lo) > 0.0 && iter++ < kMaxIter) {
            lo -= span;
            span *= 2.0;
        }
        span = 1.0 + std::fabs(guess) + std::fabs(t);
        while (residual(hi) < 0.0 && iter++ < kMaxIter) {
            hi += span;
            span *= 2.0;
        }

        // bisection with secant acceleration
        double x = 0.5 * (lo + hi);
        double r = residual(x);
        while (std::fabs(r) > kTol && iter++ < kMaxIter) {
            if (r > 0.0)
                hi = x;
            else
                lo = x;
            const double rlo = residual(lo), rhi = residual(hi);
            double sec = (rhi != rlo) ? lo - rlo * (hi - lo) / (rhi - rlo)
                                      : 0.5 * (lo + hi);
            if (!(sec > lo && sec < hi)) sec = 0.5 * (lo + hi);
            x = sec;
            r = residual(x);
        }
        if (std::fabs(r) > kTol)
            throw NonconvergenceError("resolvent: per-sample iteration cap",
                                      std::fabs(r));
        out.samples[i] = x;
        guess = x;
        runner.commit(x);
    }
    return out;
}

}  // namespace spikeport
