#include "spikeport/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spikeport/amplifier.hpp"
#include "spikeport/analysis.hpp"
#include "spikeport/estimation.hpp"
#include "spikeport/motor.hpp"
#include "spikeport/sweeps.hpp"

namespace spikeport {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

std::string out_path(const OutputSpec& out, const std::string& suffix) {
    return (fs::path(out.dir) / (out.prefix + "_" + suffix)).string();
}

struct Summary {
    std::ostringstream lines;
    void kv(const std::string& key, const std::string& value) {
        lines << key << "=" << value << "\n";
    }
    void kv(const std::string& key, double value) { kv(key, fmt(value)); }
    void kv(const std::string& key, std::size_t value) {
        kv(key, std::to_string(value));
    }
    void kv(const std::string& key, bool value) {
        kv(key, std::string(value ? "true" : "false"));
    }
};

void emit(ExperimentResult& result, const std::string& path,
          const std::string& content) {
    write_file_atomic(path, content);
    result.files_written.push_back(path);
}

// Per-node constant input levels. node_inputs overrides; otherwise the
// builder's natural operating point is used.
std::vector<double> default_node_levels(const ScenarioConfig& cfg,
                                        std::size_t n_nodes) {
    if (!cfg.node_inputs.empty()) {
        if (cfg.node_inputs.size() != n_nodes)
            throw ConfigError("node_inputs",
                              "expected " + std::to_string(n_nodes) +
                                  " entries");
        return cfg.node_inputs;
    }
    if (std::holds_alternative<HcoSpec>(cfg.circuit)) {
        const HcoDefaults d = build_default_hco();
        return {d.input_a, d.input_b};
    }
    if (std::holds_alternative<BursterSpec>(cfg.circuit))
        return {default_burster_input()};
    return std::vector<double>(n_nodes, 0.0);
}

std::vector<Signal> build_inputs(const ScenarioConfig& cfg,
                                 std::size_t n_nodes, std::size_t n_steps) {
    const std::vector<double> levels = default_node_levels(cfg, n_nodes);
    std::vector<Signal> inputs;
    inputs.reserve(n_nodes);
    // node 0 takes the rendered input section unless per-node constants
    // were given; the burster falls back to its bursting operating point
    // when the input section was left at the zero default
    const auto* c = std::get_if<ConstantInput>(&cfg.input);
    const bool zero_default = c && c->value == 0.0;
    const bool render_first =
        cfg.node_inputs.empty() &&
        !std::holds_alternative<HcoSpec>(cfg.circuit) &&
        !(std::holds_alternative<BursterSpec>(cfg.circuit) && zero_default);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (i == 0 && render_first)
            inputs.push_back(render_input(cfg.input, n_steps, cfg.sim.dt));
        else
            inputs.push_back(Signal::constant(levels[i], n_steps, cfg.sim.dt,
                                              Unit::Ampere));
    }
    return inputs;
}

// ---------------------------------------------------------------------------

ExperimentResult run_simulate(const ScenarioConfig& cfg) {
    ExperimentResult result;
    Summary s;
    const NetworkCircuit net = build_circuit(cfg.circuit);
    const std::size_t n = cfg.sim.steps();
    const std::vector<Signal> inputs = build_inputs(cfg, net.nodes.size(), n);
    const SolveReport rep = simulate(net, inputs, cfg.sim);

    emit(result, out_path(cfg.outputs, "trajectory.csv"),
         to_csv(rep.trajectory, rep.names));

    s.kv("experiment", std::string("simulate"));
    s.kv("nodes", net.nodes.size());
    s.kv("steps", n);
    s.kv("dt", cfg.sim.dt);
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        const std::string vname =
            net.nodes.size() == 1 ? "V" : "V" + std::to_string(i + 1);
        const SpikeTrain train = detect_spikes(
            rep.state(vname), cfg.analysis.threshold, cfg.analysis.refractory);
        const BehaviorClass bc = classify_behavior(train, cfg.sim.horizon);
        const std::string tag = "node" + std::to_string(i);
        s.kv(tag + "_class", to_string(bc.label));
        s.kv(tag + "_spikes", train.count());
        s.kv(tag + "_bursts", bc.evidence.n_bursts);
    }
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_dc_solve(const ScenarioConfig& cfg) {
    const auto* fhn = std::get_if<FhnSpec>(&cfg.circuit);
    if (!fhn)
        throw ConfigError("dc",
                          "dc-solve requires the 'fhn' circuit builder");
    const double k_target = cfg.dc.k_target < 0.0 ? fhn->k : cfg.dc.k_target;
    const std::size_t n = cfg.sim.steps();
    const Signal i_star = render_input(cfg.input, n, cfg.sim.dt);

    const OnePortCircuit circuit =
        build_fhn(fhn->C, fhn->L, fhn->R, k_target);
    const FeedbackSystem sys = decompose(circuit);

    SolveReport rep;
    if (cfg.dc.continuation && k_target != 0.0) {
        auto c2_at = [](double k) { return make_static(Linear{k}); };
        rep = continuation_solve(sys.plant, sys.c1, c2_at, k_target, i_star,
                                 cfg.dc.cfg);
    } else {
        rep = dc_solve(sys.plant, sys.c1, sys.c2, i_star,
                       Signal::constant(circuit.v_init, n, cfg.sim.dt,
                                        Unit::Volt),
                       cfg.dc.cfg);
    }
    if (!rep.converged && cfg.dc.require_converged)
        throw NonconvergedRun("dc solve did not converge (k_target=" +
                              fmt(k_target) + ")");

    // independent check against the time-stepping engine
    SimConfig sim = cfg.sim;
    sim.noise.reset();
    const SolveReport ts = simulate(circuit, i_star, sim);
    const Signal& v = rep.state("V");
    Signal v_ts = ts.state("V");
    v_ts.samples.resize(v.size());
    const double mismatch = l2_norm(subtract(v, v_ts));

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "dc.csv"), to_csv(v, "V"));

    Summary s;
    s.kv("experiment", std::string("dc-solve"));
    s.kv("k_target", k_target);
    s.lines << rep.summary();
    s.kv("simulator_l2_mismatch", mismatch);
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_reliability(const ScenarioConfig& cfg) {
    const NetworkCircuit net = build_circuit(cfg.circuit);
    if (net.nodes.size() != 1)
        throw ConfigError("reliability", "requires a single-node circuit");
    const OnePortCircuit& base = net.nodes[0];
    const ReliabilitySpec& rel = cfg.reliability;
    if (rel.trials < 2)
        throw ConfigError("reliability", "trials must be >= 2");
    const std::size_t n = cfg.sim.steps();

    // one initial-condition perturbation per trial, shared by both blocks
    std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995ULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> perturb(static_cast<std::size_t>(rel.trials));
    for (double& p : perturb) p = rel.init_perturb * uni(rng);

    auto run_block = [&](const InputSpec& spec) {
        const Signal drive = render_input(spec, n, cfg.sim.dt);
        std::vector<SpikeTrain> rasters;
        for (int trial = 0; trial < rel.trials; ++trial) {
            OnePortCircuit c = base;
            c.v_init += perturb[static_cast<std::size_t>(trial)];
            SimConfig sim = cfg.sim;
            sim.noise = NoiseConfig{rel.trial_noise_std,
                                    cfg.seed * 1000003ULL +
                                        static_cast<std::uint64_t>(trial)};
            const SolveReport rep = simulate(c, drive, sim);
            rasters.push_back(detect_spikes(rep.state("V"),
                                            cfg.analysis.threshold,
                                            cfg.analysis.refractory));
        }
        return rasters;
    };

    const auto rasters_step = run_block(rel.step_input);
    const auto rasters_frozen = run_block(rel.frozen_input);
    const ReliabilityMetrics m_step =
        reliability_metrics(rasters_step, rel.window);
    const ReliabilityMetrics m_frozen =
        reliability_metrics(rasters_frozen, rel.window);

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "raster_step.csv"),
         rasters_to_csv(rasters_step));
    emit(result, out_path(cfg.outputs, "raster_frozen.csv"),
         rasters_to_csv(rasters_frozen));
    if (cfg.outputs.svg) {
        emit(result, out_path(cfg.outputs, "raster_step.svg"),
             rasters_to_svg(rasters_step, cfg.sim.horizon));
        emit(result, out_path(cfg.outputs, "raster_frozen.svg"),
             rasters_to_svg(rasters_frozen, cfg.sim.horizon));
    }

    Summary s;
    s.kv("experiment", std::string("reliability"));
    s.kv("trials", static_cast<std::size_t>(rel.trials));
    s.kv("jitter_step", m_step.jitter);
    s.kv("jitter_frozen", m_frozen.jitter);
    s.kv("jitter_ratio",
         m_step.jitter > 0.0 ? m_frozen.jitter / m_step.jitter : 0.0);
    s.kv("consistency_step", m_step.event_count_consistency);
    s.kv("consistency_frozen", m_frozen.event_count_consistency);
    s.kv("events_step", m_step.n_events);
    s.kv("events_frozen", m_frozen.n_events);
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_sweep_exp(const ScenarioConfig& cfg, int threads) {
    SweepSpec spec;
    spec.circuit = build_circuit(cfg.circuit);
    spec.inputs = default_node_levels(cfg, spec.circuit.nodes.size());
    spec.paths = cfg.sweep.paths;
    spec.grids = cfg.sweep.grids;
    spec.sim = cfg.sim;
    spec.classifier = {cfg.analysis.threshold, cfg.analysis.refractory};
    spec.seed = cfg.seed;
    if (spec.paths.empty())
        throw ConfigError("sweep", "at least one parameter path is required");

    const BehaviorMap map = run_sweep(spec, threads);

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "sweep.csv"), map.to_csv());
    if (cfg.outputs.svg)
        emit(result, out_path(cfg.outputs, "sweep.svg"), map.to_svg());

    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(map.content_hash()));
    Summary s;
    s.kv("experiment", std::string("sweep"));
    s.kv("cells", map.cells.size());
    s.kv("content_hash", std::string(hash));
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_estimate(const ScenarioConfig& cfg) {
    const NetworkCircuit net = build_circuit(cfg.circuit);
    if (net.nodes.size() != 1)
        throw ConfigError("estimate", "requires a single-node circuit");
    const OnePortCircuit& truth = net.nodes[0];
    const EstimateSpec& est = cfg.estimate;
    if (est.unknown_branches.empty())
        throw ConfigError("estimate", "unknown_branches must be nonempty");

    const std::size_t n = cfg.sim.steps();
    const Signal i_ext = render_input(cfg.input, n, cfg.sim.dt);
    SimConfig sim = cfg.sim;
    sim.noise.reset();
    const SolveReport truth_rep = simulate(truth, i_ext, sim);
    const Signal& v = truth_rep.state("V");

    const double bound = output_feedback_gain_bound(truth);
    const double gain =
        est.observer_gain < 0.0 ? 1.5 * bound + 1.0 : est.observer_gain;

    // observer starts from a deliberately mismatched state
    OnePortCircuit observer_circuit = truth;
    observer_circuit.v_init += 0.5;
    const SolveReport obs =
        contracting_observer(observer_circuit, i_ext, v, gain, sim);
    const Signal& v_hat = obs.state("V");
    double v_lo = v.samples[0], v_hi = v.samples[0];
    for (double x : v.samples) {
        v_lo = std::min(v_lo, x);
        v_hi = std::max(v_hi, x);
    }
    const double range = std::max(v_hi - v_lo, 1e-30);
    double terminal = 0.0;
    for (std::size_t i = n - n / 10; i < n; ++i)
        terminal = std::max(terminal,
                            std::abs(v.samples[i] - v_hat.samples[i]));
    terminal /= range;

    std::vector<double> theta_truth = est.theta_truth;
    if (theta_truth.empty())
        for (const std::string& name : est.unknown_branches) {
            const ControllerBranch* br = truth.find_branch(name);
            if (!br)
                throw ConfigError("estimate",
                                  "no branch named '" + name + "'");
            const auto* cond = std::get_if<ConductanceBranch>(&br->op.node);
            if (!cond)
                throw ConfigError("estimate",
                                  "branch '" + name +
                                      "' has no maximal conductance");
            theta_truth.push_back(cond->g_max);
        }

    ObserverConfig ocfg;
    ocfg.injection_gain = gain;
    ocfg.forgetting = est.forgetting;
    ocfg.initial_covariance = est.initial_covariance;
    const EstimationReport rls = rls_estimate(
        truth, est.unknown_branches, i_ext, v, ocfg, &theta_truth);

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "estimate.csv"), rls.to_csv());

    Summary s;
    s.kv("experiment", std::string("estimate"));
    s.kv("gain_bound", bound);
    s.kv("observer_gain", gain);
    s.kv("observer_terminal_error", terminal);
    for (std::size_t i = 0; i < rls.theta_final.size(); ++i)
        s.kv("theta_" + std::to_string(i + 1), rls.theta_final[i]);
    s.kv("rls_relative_error", rls.final_relative_error);
    s.kv("covariance_reset", rls.covariance_reset);
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_amplifier(const ScenarioConfig& cfg) {
    const AmplifierSpec& a = cfg.amplifier;
    if (!(a.g > 0.0) || a.k < 0.0)
        throw ConfigError("amplifier", "g must be > 0 and k >= 0");
    if (a.points < 2 || !(a.u_max > a.u_min))
        throw ConfigError("amplifier", "need points >= 2 and u_max > u_min");
    const FeedbackSign sign =
        a.positive ? FeedbackSign::Positive : FeedbackSign::Negative;

    std::ostringstream csv;
    csv << "u,n_solutions,y_min,y_max\n";
    for (std::size_t i = 0; i < a.points; ++i) {
        const double u = a.u_min + (a.u_max - a.u_min) *
                                       static_cast<double>(i) /
                                       static_cast<double>(a.points - 1);
        const AmplifierSolutions sols =
            mixed_amplifier_characteristic(a.g, a.k, sign, u);
        csv << fmt(u) << "," << sols.values.size() << ","
            << (sols.values.empty() ? "" : fmt(sols.values.front())) << ","
            << (sols.values.empty() ? "" : fmt(sols.values.back())) << "\n";
    }

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "amplifier.csv"), csv.str());

    Summary s;
    s.kv("experiment", std::string("amplifier"));
    s.kv("g", a.g);
    s.kv("k", a.k);
    s.kv("sign", std::string(a.positive ? "positive" : "negative"));
    s.kv("negative_feedback_slope", negative_feedback_slope(a.g, a.k));
    if (a.positive && a.k > 1.0 / a.g) {
        const Interval2 range = bistable_range(a.g, a.k);
        s.kv("bistable_lo", range.lo);
        s.kv("bistable_hi", range.hi);

        // triangular up-down input sweep exercising both jumps
        Signal u_sweep = render_input(
            TriangleInput{range.lo - 0.5 * (range.hi - range.lo) - 0.05,
                          0.05},
            a.points, 1.0);
        const Signal y = hysteresis_trace(a.g, a.k, sign, u_sweep);
        std::ostringstream hcsv;
        hcsv << "u,y\n";
        for (std::size_t i = 0; i < y.size(); ++i)
            hcsv << fmt(u_sweep.samples[i]) << "," << fmt(y.samples[i])
                 << "\n";
        emit(result, out_path(cfg.outputs, "hysteresis.csv"), hcsv.str());
    }
    result.summary = s.lines.str();
    return result;
}

ExperimentResult run_motor(const ScenarioConfig& cfg) {
    const MotorSpec& m = cfg.motor;
    if (m.reference < 0.0)
        throw ConfigError("motor", "reference speed must be >= 0");
    const MotorReport rep =
        motor_demo(m.reference, m.plant, m.controller, cfg.sim);

    ExperimentResult result;
    emit(result, out_path(cfg.outputs, "motor.csv"),
         to_csv({rep.omega_spiking, rep.omega_baseline, rep.torque_spiking,
                 rep.controller_v},
                {"omega_spiking", "omega_baseline", "torque_spiking",
                 "controller_v"}));

    Summary s;
    s.kv("experiment", std::string("motor"));
    s.kv("reference", m.reference);
    s.kv("mean_speed_spiking", rep.mean_speed_spiking);
    s.kv("mean_speed_baseline", rep.mean_speed_baseline);
    s.kv("spike_rate", rep.spike_rate);
    s.kv("stall_spiking", rep.stall_spiking);
    s.kv("stall_baseline", rep.stall_baseline);
    result.summary = s.lines.str();
    return result;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failure on '" + tmp.string() +
                                     "'");
    }
    fs::rename(tmp, target);
}

ExperimentResult run_experiment(const ScenarioConfig& cfg, int threads) {
    cfg.sim.validate();
    cfg.dc.cfg.validate();
    if (cfg.experiment == "simulate") return run_simulate(cfg);
    if (cfg.experiment == "dc-solve") return run_dc_solve(cfg);
    if (cfg.experiment == "reliability") return run_reliability(cfg);
    if (cfg.experiment == "sweep") return run_sweep_exp(cfg, threads);
    if (cfg.experiment == "estimate") return run_estimate(cfg);
    if (cfg.experiment == "amplifier") return run_amplifier(cfg);
    if (cfg.experiment == "motor") return run_motor(cfg);
    throw ConfigError("experiment",
                      "unknown experiment '" + cfg.experiment + "'");
}

}  // namespace spikeport
