#pragma once

#include "spikeport/circuits.hpp"
#include "spikeport/solvers.hpp"

namespace spikeport {

/// Rotational plant with Coulomb friction and stiction:
///   J * domega/dt = k_t*u - b*omega - friction,
/// and omega is held at exactly 0 while |applied torque| <= c.
struct MotorPlant {
    double inertia = 2.0;        // J > 0
    double viscous = 0.1;        // b >= 0
    double torque_const = 1.0;   // k_t > 0
    double coulomb = 0.2;        // stiction torque c >= 0

    void validate() const;
};

/// Defaults are calibrated so that with the default plant the spiking loop
/// sustains motion at references the proportional baseline stalls on, and
/// tracks references in [0.5, 2] to within 10% (dt <= 0.004 recommended;
/// the controller capacitance sets the fast timescale).
struct MotorControllerParams {
    double error_gain = 0.3;     // maps speed error to controller current
    double input_bias = -0.32;   // parks the drive just under the
                                 // controller's oscillation onset
    double pulse_torque = 2.0;   // command during a pulse
    double pulse_width = 0.2;    // seconds
    double spike_threshold = 1.0;
    double refractory = 0.3;
    double kp_baseline = 2.0;    // proportional baseline for comparison
    // spiking controller circuit (relaxation regime)
    double fhn_C = 0.01;
    double fhn_L = 0.3;
    double fhn_R = 1.0;
    double fhn_k = 1.0;
};

struct MotorReport {
    Signal omega_spiking;
    Signal omega_baseline;
    Signal torque_spiking;
    Signal controller_v;
    double mean_speed_spiking = 0.0;
    double mean_speed_baseline = 0.0;
    double spike_rate = 0.0;  // spikes per unit time over the horizon
    bool stall_spiking = false;
    bool stall_baseline = false;
};

/// One explicit step of the friction plant. omega == 0 is held while
/// |k_t * u| <= c; a sign change of omega within a step is captured at 0.
double plant_step(const MotorPlant& p, double omega, double u, double dt);

/// Closed loop: the speed error drives a spiking one-port whose spikes
/// inject fixed-width torque pulses. A proportional baseline runs on the
/// same plant for comparison. Means and stall flags are computed over the
/// last half of the horizon.
MotorReport motor_demo(double reference_speed, const MotorPlant& plant,
                       const MotorControllerParams& params,
                       const SimConfig& cfg);

}  // namespace spikeport
