#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikeport/amplifier.hpp"
#include "spikeport/analysis.hpp"
#include "spikeport/circuits.hpp"
#include "spikeport/config.hpp"
#include "spikeport/estimation.hpp"
#include "spikeport/experiments.hpp"
#include "spikeport/motor.hpp"
#include "spikeport/solvers.hpp"
#include "spikeport/sweeps.hpp"

namespace py = pybind11;
using namespace spikeport;

namespace {

SimConfig make_sim_config(double dt, double horizon, const std::string& method,
                          double noise_std, std::uint64_t noise_seed) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = horizon;
    if (method == "semi_implicit_euler")
        cfg.method = Method::SemiImplicitEuler;
    else if (method == "rk4")
        cfg.method = Method::ExplicitRK4;
    else
        throw std::invalid_argument("unknown method '" + method + "'");
    if (noise_std > 0.0) cfg.noise = NoiseConfig{noise_std, noise_seed};
    return cfg;
}

py::dict report_to_dict(const SolveReport& rep) {
    py::dict out;
    py::dict states;
    for (std::size_t i = 0; i < rep.names.size(); ++i)
        states[py::str(rep.names[i])] = rep.trajectory[i].samples;
    out["states"] = states;
    out["dt"] = rep.trajectory.empty() ? 0.0 : rep.trajectory.front().dt;
    out["converged"] = rep.converged;
    out["outer_iterations"] = rep.outer_iterations;
    out["diagnostics"] = rep.diagnostics;
    return out;
}

}  // namespace

PYBIND11_MODULE(spikeport, m) {
    m.doc() = "Spiking circuit modeling: monotone-operator port "
              "interconnections, simulation, and analysis";

    // ---- circuits ----------------------------------------------------------
    py::class_<OnePortCircuit>(m, "OnePortCircuit")
        .def_readwrite("capacitance", &OnePortCircuit::capacitance)
        .def_readwrite("v_init", &OnePortCircuit::v_init)
        .def("state_size", &OnePortCircuit::state_size)
        .def("static_current", &OnePortCircuit::static_current)
        .def("set_branch_conductance",
             [](OnePortCircuit& c, const std::string& name, double g) {
                 ControllerBranch* br = c.find_branch(name);
                 if (!br)
                     throw std::invalid_argument("no branch named '" + name +
                                                 "'");
                 auto* cond = std::get_if<ConductanceBranch>(&br->op.node);
                 if (!cond)
                     throw std::invalid_argument(
                         "branch '" + name + "' has no conductance scale");
                 cond->g_max = g;
             });
    py::class_<NetworkCircuit>(m, "NetworkCircuit")
        .def("state_size", &NetworkCircuit::state_size)
        .def_property_readonly("n_nodes", [](const NetworkCircuit& n) {
            return n.nodes.size();
        });

    m.def("build_fhn", &build_fhn, py::arg("C"), py::arg("L"), py::arg("R"),
          py::arg("k"));
    m.def("build_burster", [] { return build_burster(); });
    m.def("default_burster_input", &default_burster_input);
    m.def("build_default_hco", [] {
        const HcoDefaults hco = build_default_hco();
        return py::make_tuple(hco.network, hco.input_a, hco.input_b);
    });

    // ---- simulation --------------------------------------------------------
    m.def(
        "simulate",
        [](const OnePortCircuit& circuit, const std::vector<double>& i_ext,
           double dt, double horizon, const std::string& method,
           double noise_std, std::uint64_t noise_seed) {
            const SimConfig cfg =
                make_sim_config(dt, horizon, method, noise_std, noise_seed);
            Signal drive(i_ext, dt, Unit::Ampere);
            return report_to_dict(simulate(circuit, drive, cfg));
        },
        py::arg("circuit"), py::arg("i_ext"), py::arg("dt"),
        py::arg("horizon"), py::arg("method") = "semi_implicit_euler",
        py::arg("noise_std") = 0.0, py::arg("noise_seed") = 0,
        "Fixed-step simulation; i_ext must have horizon/dt samples. Returns "
        "a dict with per-state trajectories.");
    m.def(
        "simulate_network",
        [](const NetworkCircuit& net,
           const std::vector<std::vector<double>>& i_ext, double dt,
           double horizon, const std::string& method) {
            const SimConfig cfg = make_sim_config(dt, horizon, method, 0.0, 0);
            std::vector<Signal> drives;
            for (const auto& samples : i_ext)
                drives.emplace_back(samples, dt, Unit::Ampere);
            return report_to_dict(simulate(net, drives, cfg));
        },
        py::arg("network"), py::arg("i_ext"), py::arg("dt"),
        py::arg("horizon"), py::arg("method") = "semi_implicit_euler");

    // ---- spike analysis ----------------------------------------------------
    m.def(
        "detect_spikes",
        [](const std::vector<double>& v, double dt, double threshold,
           double refractory) {
            return detect_spikes(Signal(v, dt, Unit::Volt), threshold,
                                 refractory)
                .times;
        },
        py::arg("v"), py::arg("dt"), py::arg("threshold"),
        py::arg("refractory") = 0.0);
    m.def(
        "classify",
        [](const std::vector<double>& v, double dt, double threshold,
           double refractory) {
            const Signal sig(v, dt, Unit::Volt);
            const SpikeTrain train = detect_spikes(sig, threshold, refractory);
            const BehaviorClass bc =
                classify_behavior(train, dt * double(v.size()));
            py::dict out;
            out["label"] = to_string(bc.label);
            out["n_spikes"] = bc.evidence.n_spikes;
            out["n_bursts"] = bc.evidence.n_bursts;
            out["isi_ratio"] = bc.evidence.isi_ratio;
            return out;
        },
        py::arg("v"), py::arg("dt"), py::arg("threshold"),
        py::arg("refractory") = 0.0);
    m.def(
        "phase_difference",
        [](const std::vector<double>& a, const std::vector<double>& b,
           double horizon, double period) {
            SpikeTrain ta{a, horizon, 0.0}, tb{b, horizon, 0.0};
            return phase_difference(ta, tb, period);
        },
        py::arg("spikes_a"), py::arg("spikes_b"), py::arg("horizon"),
        py::arg("period_estimate"));

    // ---- amplifier algebra -------------------------------------------------
    m.def("negative_feedback_slope", &negative_feedback_slope, py::arg("g"),
          py::arg("k"));
    m.def(
        "amplifier_characteristic",
        [](double g, double k, bool positive, double u) {
            const auto sol = mixed_amplifier_characteristic(
                g, k, positive ? FeedbackSign::Positive
                               : FeedbackSign::Negative,
                u);
            return sol.values;
        },
        py::arg("g"), py::arg("k"), py::arg("positive"), py::arg("u"));
    m.def(
        "bistable_range",
        [](double g, double k) {
            const Interval2 r = bistable_range(g, k);
            return py::make_tuple(r.lo, r.hi);
        },
        py::arg("g"), py::arg("k"));

    // ---- dc analysis and estimation -----------------------------------------
    m.def(
        "dc_solve_fhn",
        [](double C, double L, double R, double k,
           const std::vector<double>& i_star, double dt) {
            const OnePortCircuit fhn = build_fhn(C, L, R, k);
            const FeedbackSystem sys = decompose(fhn);
            const Signal drive(i_star, dt, Unit::Ampere);
            DCSolveConfig dcfg;
            const SolveReport rep = continuation_solve(
                sys.plant, sys.c1,
                [](double kk) { return make_static(Linear{kk}); }, k, drive,
                dcfg);
            return report_to_dict(rep);
        },
        py::arg("C"), py::arg("L"), py::arg("R"), py::arg("k"),
        py::arg("i_star"), py::arg("dt"),
        "Difference-of-monotone splitting solution of the closed loop, with "
        "continuation in the negative slope.");
    m.def("output_feedback_gain_bound", &output_feedback_gain_bound);
    m.def(
        "estimate_conductances",
        [](const OnePortCircuit& model,
           const std::vector<std::string>& unknown,
           const std::vector<double>& i_ext, const std::vector<double>& v,
           double dt, double forgetting, double initial_covariance) {
            ObserverConfig cfg;
            cfg.forgetting = forgetting;
            cfg.initial_covariance = initial_covariance;
            const EstimationReport rep = rls_estimate(
                model, unknown, Signal(i_ext, dt, Unit::Ampere),
                Signal(v, dt, Unit::Volt), cfg, nullptr);
            return rep.theta_final;
        },
        py::arg("model"), py::arg("unknown_branches"), py::arg("i_ext"),
        py::arg("v"), py::arg("dt"), py::arg("forgetting") = 1.0,
        py::arg("initial_covariance") = 100.0);

    // ---- motor demo ----------------------------------------------------------
    m.def(
        "motor_demo",
        [](double reference, double dt, double horizon) {
            SimConfig cfg;
            cfg.dt = dt;
            cfg.horizon = horizon;
            const MotorReport rep =
                motor_demo(reference, MotorPlant{}, MotorControllerParams{},
                           cfg);
            py::dict out;
            out["mean_speed_spiking"] = rep.mean_speed_spiking;
            out["mean_speed_baseline"] = rep.mean_speed_baseline;
            out["spike_rate"] = rep.spike_rate;
            out["stall_spiking"] = rep.stall_spiking;
            out["stall_baseline"] = rep.stall_baseline;
            return out;
        },
        py::arg("reference"), py::arg("dt") = 0.002,
        py::arg("horizon") = 200.0);

    // ---- scenario configs ----------------------------------------------------
    m.def(
        "run_config",
        [](const std::string& json_text, int threads) {
            const ScenarioConfig cfg = parse_config(json_text);
            const ExperimentResult res = run_experiment(cfg, threads);
            py::dict out;
            out["summary"] = res.summary;
            out["files"] = res.files_written;
            return out;
        },
        py::arg("json_text"), py::arg("threads") = 1,
        "Parses a scenario document and runs the configured experiment.");
    m.def("validate_config", [](const std::string& json_text) {
        return serialize_config(parse_config(json_text));
    });
}
