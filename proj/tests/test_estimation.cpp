#include <cmath>

#include "doctest.h"
#include "spikeport/circuits.hpp"
#include "spikeport/estimation.hpp"
#include "spikeport/solvers.hpp"

using namespace spikeport;

TEST_CASE("gain bound equals the worst negative slope") {
    // the fhn controller's static slope is v^2 - k + (RL branch dc gain);
    // only the negative-tagged branch counts: min slope of v^3/3 - k*v
    // is -k at v = 0
    const OnePortCircuit fhn = build_fhn(1.0, 100.0, 1.0, 1.0);
    CHECK(output_feedback_gain_bound(fhn) ==
          doctest::Approx(1.0).epsilon(1e-6));
    const OnePortCircuit passive = build_fhn(1.0, 100.0, 1.0, 0.0);
    CHECK(output_feedback_gain_bound(passive) == doctest::Approx(0.0));
}

TEST_CASE("observer contracts to the measured trajectory") {
    const OnePortCircuit b = build_burster();
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 100.0;
    const Signal drive =
        Signal::constant(default_burster_input(), cfg.steps(), cfg.dt);
    const SolveReport truth = simulate(b, drive, cfg);
    const Signal& v = truth.state("V");

    OnePortCircuit copy = b;
    copy.v_init += 0.8;  // mismatched start
    const double gain = 1.5 * output_feedback_gain_bound(b) + 1.0;
    const SolveReport obs = contracting_observer(copy, drive, v, gain, cfg);
    const Signal& v_hat = obs.state("V");
    double terminal = 0.0;
    for (std::size_t i = v.size() - v.size() / 10; i < v.size(); ++i)
        terminal = std::max(terminal,
                            std::fabs(v.samples[i] - v_hat.samples[i]));
    CHECK(terminal < 1e-3);
}

TEST_CASE("observer below the bound carries a warning diagnostic") {
    const OnePortCircuit b = build_burster();
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 1.0;
    const Signal drive =
        Signal::constant(default_burster_input(), cfg.steps(), cfg.dt);
    const SolveReport truth = simulate(b, drive, cfg);
    const SolveReport obs =
        contracting_observer(b, drive, truth.state("V"), 0.01, cfg);
    CHECK_FALSE(obs.diagnostics.empty());
}

TEST_CASE("rls recovers conductances and matches the batch oracle") {
    const OnePortCircuit b = build_burster();
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 120.0;
    const Signal drive =
        Signal::constant(default_burster_input(), cfg.steps(), cfg.dt);
    const SolveReport truth_rep = simulate(b, drive, cfg);
    const Signal& v = truth_rep.state("V");

    const std::vector<std::string> unknown = {"fast_mixed", "slow_positive"};
    const std::vector<double> truth = {
        std::get<ConductanceBranch>(b.find_branch("fast_mixed")->op.node)
            .g_max,
        std::get<ConductanceBranch>(b.find_branch("slow_positive")->op.node)
            .g_max};

    ObserverConfig ocfg;
    ocfg.forgetting = 1.0;
    // a nearly flat prior and a positive initial guess (so the
    // nonnegativity clamp never binds) make the recursion numerically
    // identical to the normal-equations solution
    ocfg.initial_covariance = 1e8;
    ocfg.theta_init = {2.0, 5.0};
    const EstimationReport rep =
        rls_estimate(b, unknown, drive, v, ocfg, &truth);
    REQUIRE(rep.theta_final.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::fabs(rep.theta_final[i] - truth[i]) / truth[i] < 0.01);
    CHECK(rep.final_relative_error < 0.01);

    const std::vector<double> batch = batch_least_squares(b, unknown, drive, v);
    REQUIRE(batch.size() == 2);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::fabs(rep.theta_final[i] - batch[i]) /
                  std::max(1.0, std::fabs(batch[i])) <
              1e-8);
}

TEST_CASE("estimation report csv header") {
    const OnePortCircuit b = build_burster();
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.horizon = 5.0;
    const Signal drive =
        Signal::constant(default_burster_input(), cfg.steps(), cfg.dt);
    const SolveReport truth_rep = simulate(b, drive, cfg);
    ObserverConfig ocfg;
    const EstimationReport rep = rls_estimate(
        b, {"fast_mixed"}, drive, truth_rep.state("V"), ocfg, nullptr);
    const std::string csv = rep.to_csv();
    CHECK(csv.find("t,theta_1,vhat,cov_trace\n") == 0);
    CHECK(rep.final_relative_error == doctest::Approx(-1.0));
}

TEST_CASE("observer config validation") {
    ObserverConfig bad;
    bad.forgetting = 0.0;
    CHECK_THROWS(bad.validate());
    bad.forgetting = 1.0;
    bad.initial_covariance = -1.0;
    CHECK_THROWS(bad.validate());
}
