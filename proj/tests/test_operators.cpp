#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "spikeport/operators.hpp"

using namespace spikeport;

TEST_CASE("static function evaluation") {
    CHECK(static_eval(Linear{2.5}, 3.0) == doctest::Approx(7.5));
    CHECK(static_eval(Cubic{2.0}, -2.0) == doctest::Approx(-16.0));
    // c*v^3 - k*v at v = 2, c = 1/3, k = 1: 8/3 - 2 = 2/3
    CHECK(static_eval(CubicMinusLinear{1.0 / 3.0, 1.0}, 2.0) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(static_eval(Saturation{10.0}, -1.0) == 0.0);
    CHECK(static_eval(Saturation{10.0}, 0.05) == doctest::Approx(0.5));
    CHECK(static_eval(Saturation{10.0}, 1.0) == 1.0);
    CHECK(static_eval(SigmoidFn{1.0, 0.0}, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("static derivatives match finite differences") {
    const StaticFunction fns[] = {Linear{0.7}, Cubic{0.4},
                                  CubicMinusLinear{0.5, 1.2},
                                  SigmoidFn{3.0, -0.5}};
    for (const auto& f : fns)
        for (double v : {-1.7, -0.2, 0.9, 2.3}) {
            const double h = 1e-6;
            const double fd =
                (static_eval(f, v + h) - static_eval(f, v - h)) / (2 * h);
            CHECK(static_deriv(f, v) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("piecewise linear requires strictly increasing knots") {
    PiecewiseLinear pl{{{0.0, 0.0}, {0.0, 1.0}}};
    CHECK_THROWS_AS(static_validate(pl), std::invalid_argument);
    PiecewiseLinear ok{{{-1.0, -2.0}, {1.0, 2.0}}};
    CHECK_NOTHROW(static_validate(ok));
    CHECK(static_eval(ok, 0.0) == doctest::Approx(0.0));
    CHECK(static_eval(ok, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("first-order block matches its discrete recursion") {
    // tau*xdot = g*u - x with implicit Euler:
    // x' = (x + (dt/tau)*g*u) / (1 + dt/tau)
    const LTIFirstOrder lti{2.0, 0.5, 0.25};
    const double dt = 0.1;
    Signal u = Signal::constant(1.0, 100, dt);
    Signal y = evaluate(make_lti(lti), u);
    double x = 0.0;
    const double a = dt / lti.tau;
    for (std::size_t i = 0; i < u.size(); ++i) {
        x = (x + a * lti.gain * u.samples[i]) / (1.0 + a);
        CHECK(y.samples[i] ==
              doctest::Approx(x + lti.feedthrough * u.samples[i])
                  .epsilon(1e-14));
    }
    // long-run output approaches gain + feedthrough
    CHECK(y.samples.back() == doctest::Approx(2.25).epsilon(1e-2));
}

TEST_CASE("gate update is the exact exponential step") {
    Gate g;
    g.steady_state = SigmoidFn{8.0, -0.3};
    g.tau = 0.4;
    ConductanceBranch b;
    b.g_max = 1.0;
    b.reversal = 0.0;
    b.gates = {g};
    b.name = "test";

    const double dt = 0.05, v0 = -1.0, v1 = 0.5;
    OperatorRunner runner(make_branch(b), dt);
    runner.init_from(v0);
    const double m0 = g.steady_state(v0);
    const double minf = g.steady_state(v1);
    const double m1 = minf + (m0 - minf) * std::exp(-dt / g.tau);
    CHECK(runner.step(v1) == doctest::Approx(m1 * v1).epsilon(1e-14));
}

TEST_CASE("peek does not advance the runner state") {
    OperatorRunner runner(make_lti(LTIFirstOrder{1.0, 1.0, 0.0}), 0.1);
    runner.reset();
    const double first = runner.peek(1.0);
    CHECK(runner.peek(1.0) == first);
    runner.commit(1.0);
    CHECK(runner.peek(1.0) > first);
}

TEST_CASE("non-finite samples are rejected before evaluation") {
    CHECK_THROWS(evaluate(make_static(Linear{1.0}),
                          Signal({1.0, std::nan("")}, 0.1)));
}

TEST_CASE("resolvent of a linear operator is exact division") {
    const double g = 3.0, alpha = 0.5;
    Signal target({1.0, -2.0, 0.7}, 0.1);
    Signal x = resolvent(make_static(Linear{g}), alpha, target);
    for (std::size_t i = 0; i < target.size(); ++i)
        CHECK(x.samples[i] ==
              doctest::Approx(target.samples[i] / (1.0 + alpha * g))
                  .epsilon(1e-9));
}

TEST_CASE("resolvent of a sum agrees with the defining equation") {
    OperatorSpec op = make_sum(
        {make_static(Cubic{1.0}), make_lti(LTIFirstOrder{0.5, 1.0, 0.0})});
    Signal target({0.4, 1.0, -0.6, 0.2}, 0.1);
    Signal x = resolvent(op, 0.7, target);
    Signal y = evaluate(op, x);
    for (std::size_t i = 0; i < target.size(); ++i)
        CHECK(x.samples[i] + 0.7 * y.samples[i] ==
              doctest::Approx(target.samples[i]).epsilon(1e-8));
}

TEST_CASE("monotonicity certificate accepts monotone operators") {
    const auto probes = default_probe_suite(0.01, 200);
    CHECK(monotonicity_certificate(make_static(Linear{1.0}), probes).pass);
    CHECK(monotonicity_certificate(make_static(Cubic{0.5}), probes).pass);
    CHECK(monotonicity_certificate(make_lti(LTIFirstOrder{2.0, 0.3, 0.1}),
                                   probes)
              .pass);
}

TEST_CASE("certificate fails cubic-minus-linear with an in-range witness") {
    // slope of v^3/3 - k*v is v^2 - k, negative exactly on |v| < sqrt(k)
    const double k = 1.0;
    const auto probes = default_probe_suite(0.01, 200);
    const Certificate cert = monotonicity_certificate(
        make_static(CubicMinusLinear{1.0 / 3.0, k}), probes);
    REQUIRE_FALSE(cert.pass);
    REQUIRE(cert.witness_index.has_value());
    CHECK(cert.inner_value < 0.0);
    // the constant-pair probes that violate must sit inside (-1, 1)
    const Signal& a = cert.witness.a;
    const Signal& b = cert.witness.b;
    bool constant = true;
    for (double s : a.samples) constant &= (s == a.samples.front());
    for (double s : b.samples) constant &= (s == b.samples.front());
    if (constant) {
        CHECK(std::fabs(a.samples.front()) < std::sqrt(k));
        CHECK(std::fabs(b.samples.front()) < std::sqrt(k));
    }
}

TEST_CASE("certificate requires a nonempty probe suite") {
    CHECK_THROWS_AS(
        monotonicity_certificate(make_static(Linear{1.0}), {}),
        std::invalid_argument);
}

TEST_CASE("negative conductance range of cubic-minus-linear") {
    const auto ranges =
        negative_conductance_range(CubicMinusLinear{1.0 / 3.0, 1.0});
    REQUIRE(ranges.size() == 1);
    CHECK(ranges[0].lo == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(ranges[0].hi == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(negative_conductance_range(Linear{1.0}).empty());
    CHECK(negative_conductance_range(Cubic{1.0}).empty());
}

TEST_CASE("static reduction of a gated branch has a negative range") {
    // activation gate with a high reversal: N-shaped steady-state I(V)
    Gate g;
    g.steady_state = SigmoidFn{8.0, -0.3};
    g.tau = 0.05;
    ConductanceBranch b;
    b.g_max = 4.0;
    b.reversal = 2.0;
    b.gates = {g};
    b.name = "fast";
    const auto ranges = negative_range_of(
        [&](double v) { return b.static_current(v); }, -5.0, 5.0);
    CHECK_FALSE(ranges.empty());
}

TEST_CASE("scaled and summed operators evaluate compositionally") {
    OperatorSpec op = make_scaled(
        2.0, make_sum({make_static(Linear{1.0}), make_static(Cubic{1.0})}));
    Signal u({0.5, -1.0}, 0.1);
    Signal y = evaluate(op, u);
    CHECK(y.samples[0] == doctest::Approx(2.0 * (0.5 + 0.125)));
    CHECK(y.samples[1] == doctest::Approx(2.0 * (-1.0 - 1.0)));
}
