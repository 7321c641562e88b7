#include "spikeport/motor.hpp"

#include <cmath>
#include <stdexcept>

namespace spikeport {

void MotorPlant::validate() const {
    if (!(inertia > 0.0) || !(torque_const > 0.0))
        throw std::invalid_argument("MotorPlant: J and k_t must be positive");
    if (viscous < 0.0 || coulomb < 0.0)
        throw std::invalid_argument("MotorPlant: b and c must be >= 0");
}

/// One stiction-aware plant step. omega == 0 is invariant while the applied
/// torque magnitude stays within the Coulomb level.
double plant_step(const MotorPlant& p, double omega, double u, double dt) {
    const double applied = p.torque_const * u;
    if (omega == 0.0) {
        if (std::fabs(applied) <= p.coulomb) return 0.0;
        const double net = applied - p.coulomb * (applied > 0.0 ? 1.0 : -1.0);
        return net / p.inertia * dt;
    }
    const double s = omega > 0.0 ? 1.0 : -1.0;
    const double net = applied - p.viscous * omega - p.coulomb * s;
    double next = omega + dt / p.inertia * net;
    if (next * omega < 0.0) next = 0.0;  // stiction capture at zero crossing
    return next;
}

MotorReport motor_demo(double reference_speed, const MotorPlant& plant,
                       const MotorControllerParams& params,
                       const SimConfig& cfg) {
    if (reference_speed < 0.0)
        throw std::invalid_argument("motor_demo: reference must be >= 0");
    plant.validate();
    cfg.validate();

    const std::size_t n = cfg.steps();
    const double dt = cfg.dt;

    MotorReport rep;
    rep.omega_spiking = Signal::zeros(n, dt);
    rep.omega_baseline = Signal::zeros(n, dt);
    rep.torque_spiking = Signal::zeros(n, dt);
    rep.controller_v = Signal::zeros(n, dt, Unit::Volt);

    // spiking controller state (FHN, same scheme as the circuit simulator)
    double v = 0.0, i_l = 0.0;
    double omega = 0.0;
    double pulse_left = 0.0;
    double last_spike = -1e300;
    bool above = false;
    std::size_t n_spikes = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        rep.omega_spiking.samples[i] = omega;
        rep.controller_v.samples[i] = v;

        const double err = reference_speed - omega;
        const double drive = params.input_bias + params.error_gain * err;

        const double il_next =
            (i_l + dt / params.fhn_L * params.fhn_R * v) /
            (1.0 + dt / params.fhn_L);
        const double v_next =
            v + dt / params.fhn_C *
                    (drive - (v * v * v / 3.0 - params.fhn_k * v) - il_next);
        if (std::fabs(v_next) > 1e6) throw BlowUpError(t);

        const bool above_next = v_next >= params.spike_threshold;
        if (above_next && !above && t - last_spike >= params.refractory) {
            pulse_left = params.pulse_width;
            last_spike = t;
            ++n_spikes;
        }
        above = above_next;
        v = v_next;
        i_l = il_next;

        const double u = pulse_left > 0.0 ? params.pulse_torque : 0.0;
        pulse_left = std::max(0.0, pulse_left - dt);
        rep.torque_spiking.samples[i] = u;
        omega = plant_step(plant, omega, u, dt);
    }

    // proportional baseline on the same plant
    double omega_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.omega_baseline.samples[i] = omega_b;
        const double u = params.kp_baseline * (reference_speed - omega_b);
        omega_b = plant_step(plant, omega_b, u, dt);
    }

    const std::size_t half = n / 2;
    double acc_s = 0.0, acc_b = 0.0, max_s = 0.0, max_b = 0.0;
    for (std::size_t i = half; i < n; ++i) {
        acc_s += rep.omega_spiking.samples[i];
        acc_b += rep.omega_baseline.samples[i];
        max_s = std::max(max_s, std::fabs(rep.omega_spiking.samples[i]));
        max_b = std::max(max_b, std::fabs(rep.omega_baseline.samples[i]));
    }
    rep.mean_speed_spiking = acc_s / static_cast<double>(n - half);
    rep.mean_speed_baseline = acc_b / static_cast<double>(n - half);
    rep.stall_spiking = max_s < 1e-9;
    rep.stall_baseline = max_b < 1e-9;
    rep.spike_rate = static_cast<double>(n_spikes) / cfg.horizon;
    return rep;
}

}  // namespace spikeport
