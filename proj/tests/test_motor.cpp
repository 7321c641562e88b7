#include <cmath>

#include "doctest.h"
#include "spikeport/motor.hpp"

using namespace spikeport;

TEST_CASE("plant step: stiction holds zero speed under small torque") {
    MotorPlant p;  // coulomb = 0.2, torque_const = 1
    CHECK(plant_step(p, 0.0, 0.1, 0.01) == 0.0);
    CHECK(plant_step(p, 0.0, -0.2, 0.01) == 0.0);
    CHECK(plant_step(p, 0.0, 0.5, 0.01) > 0.0);
}

TEST_CASE("plant step: friction always opposes motion") {
    MotorPlant p;
    // coasting with zero input decelerates
    CHECK(plant_step(p, 1.0, 0.0, 0.01) < 1.0);
    CHECK(plant_step(p, -1.0, 0.0, 0.01) > -1.0);
    // a sign change within a step is captured at zero
    CHECK(plant_step(p, 1e-6, 0.0, 0.01) == 0.0);
}

TEST_CASE("plant step: steady state balances torque against friction") {
    MotorPlant p;
    double omega = 0.0;
    const double u = 1.0;
    for (int i = 0; i < 200000; ++i) omega = plant_step(p, omega, u, 0.002);
    // k_t*u = b*omega + c at steady state
    CHECK(omega == doctest::Approx((p.torque_const * u - p.coulomb) /
                                   p.viscous)
                       .epsilon(1e-3));
}

TEST_CASE("plant validation") {
    MotorPlant p;
    p.inertia = 0.0;
    CHECK_THROWS(p.validate());
    p.inertia = 1.0;
    p.coulomb = -0.1;
    CHECK_THROWS(p.validate());
}

TEST_CASE("zero reference produces no sustained motion") {
    SimConfig cfg;
    cfg.dt = 0.002;
    cfg.horizon = 100.0;
    const MotorReport rep = motor_demo(0.0, MotorPlant{},
                                       MotorControllerParams{}, cfg);
    CHECK(rep.mean_speed_spiking < 0.02);
    CHECK(rep.mean_speed_baseline < 0.02);
}

TEST_CASE("low reference: pulses move the load, proportional drive stalls") {
    SimConfig cfg;
    cfg.dt = 0.002;
    cfg.horizon = 200.0;
    const MotorReport rep = motor_demo(0.05, MotorPlant{},
                                       MotorControllerParams{}, cfg);
    CHECK(rep.stall_baseline);
    CHECK_FALSE(rep.stall_spiking);
    CHECK(rep.mean_speed_spiking > 0.0);
    CHECK(rep.spike_rate > 0.0);
}

TEST_CASE("moderate references track within ten percent") {
    SimConfig cfg;
    cfg.dt = 0.002;
    cfg.horizon = 200.0;
    double prev_rate = 0.0;
    for (double ref : {1.0, 1.5, 2.0}) {
        const MotorReport rep =
            motor_demo(ref, MotorPlant{}, MotorControllerParams{}, cfg);
        CHECK(std::fabs(rep.mean_speed_spiking - ref) / ref < 0.10);
        CHECK(rep.spike_rate > prev_rate);  // rate encodes the reference
        prev_rate = rep.spike_rate;
    }
}

TEST_CASE("report trajectories share the grid") {
    SimConfig cfg;
    cfg.dt = 0.002;
    cfg.horizon = 10.0;
    const MotorReport rep = motor_demo(1.0, MotorPlant{},
                                       MotorControllerParams{}, cfg);
    CHECK(rep.omega_spiking.size() == rep.omega_baseline.size());
    CHECK(rep.omega_spiking.size() == rep.torque_spiking.size());
    CHECK(rep.omega_spiking.size() == rep.controller_v.size());
    CHECK(rep.omega_spiking.dt == doctest::Approx(cfg.dt));
}
