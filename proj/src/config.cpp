#include "spikeport/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace spikeport {

using nlohmann::json;

// ---------------------------------------------------------------------------
// input rendering
// ---------------------------------------------------------------------------

Signal render_input(const InputSpec& spec, std::size_t n, double dt) {
    Signal out = Signal::zeros(n, dt, Unit::Ampere);
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConstantInput>) {
                for (double& s : out.samples) s = k.value;
            } else if constexpr (std::is_same_v<T, StepInput>) {
                for (std::size_t i = 0; i < n; ++i)
                    out.samples[i] = out.time(i) >= k.t0 ? k.level : k.baseline;
            } else if constexpr (std::is_same_v<T, TriangleInput>) {
                const double half = 0.5 * static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double frac = static_cast<double>(i) / half;
                    const double lam = frac <= 1.0 ? frac : 2.0 - frac;
                    out.samples[i] = k.start + (k.peak - k.start) * lam;
                }
            } else {  // OuInput: exact discretization of the OU process
                std::mt19937_64 rng(k.seed);
                std::normal_distribution<double> gauss(0.0, 1.0);
                const double a = std::exp(-dt / k.tau);
                const double s = k.std * std::sqrt(1.0 - a * a);
                double x = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    out.samples[i] = k.mean + x;
                    x = a * x + s * gauss(rng);
                }
            }
        },
        spec);
    return out;
}

NetworkCircuit build_circuit(const CircuitSpec& spec) {
    return std::visit(
        [](const auto& k) -> NetworkCircuit {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, FhnSpec>) {
                NetworkCircuit net;
                net.nodes = {build_fhn(k.C, k.L, k.R, k.k)};
                return net;
            } else if constexpr (std::is_same_v<T, BursterSpec>) {
                NetworkCircuit net;
                net.nodes = {build_burster(k.params)};
                return net;
            } else if constexpr (std::is_same_v<T, HcoSpec>) {
                HcoDefaults hco = build_default_hco();
                NetworkCircuit net = build_hco(hco.network.nodes[0],
                                               hco.network.nodes[1], k.g_syn,
                                               k.v_syn, k.tau_syn);
                return net;
            } else {
                std::vector<double> C = k.capacitance, g = k.leak_g,
                                    v = k.leak_v;
                auto broadcast = [&](std::vector<double>& vec, double dflt) {
                    if (vec.empty()) vec.assign(k.n, dflt);
                    if (vec.size() == 1) vec.assign(k.n, vec.front());
                };
                broadcast(C, 1.0);
                broadcast(g, 1.0);
                broadcast(v, 0.0);
                std::vector<LeakBranch> leaks(k.n);
                for (std::size_t i = 0; i < k.n; ++i)
                    leaks[i] = {g[i], v[i]};
                return build_rc_network(k.n, C, leaks, k.gaps);
            }
        },
        spec);
}

// ---------------------------------------------------------------------------
// json helpers
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError(section, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(section, "unknown key '" + key + "'");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T dflt) {
    if (!obj.contains(key)) return dflt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

InputSpec parse_input(const json& obj, const std::string& section) {
    check_keys(obj, section,
               {"kind", "value", "t0", "baseline", "level", "start", "peak",
                "mean", "std", "tau", "seed"});
    const std::string kind = get_or<std::string>(obj, "kind", "constant");
    if (kind == "constant")
        return ConstantInput{get_or(obj, "value", 0.0)};
    if (kind == "step")
        return StepInput{get_or(obj, "t0", 0.0), get_or(obj, "baseline", 0.0),
                         get_or(obj, "level", 0.0)};
    if (kind == "triangle")
        return TriangleInput{get_or(obj, "start", 0.0),
                             get_or(obj, "peak", 1.0)};
    if (kind == "ou")
        return OuInput{get_or(obj, "mean", 0.0), get_or(obj, "std", 1.0),
                       get_or(obj, "tau", 1.0),
                       get_or<std::uint64_t>(obj, "seed", 1)};
    throw ConfigError(section, "unknown input kind '" + kind + "'");
}

json input_to_json(const InputSpec& spec) {
    json out;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, ConstantInput>) {
                out = {{"kind", "constant"}, {"value", k.value}};
            } else if constexpr (std::is_same_v<T, StepInput>) {
                out = {{"kind", "step"},
                       {"t0", k.t0},
                       {"baseline", k.baseline},
                       {"level", k.level}};
            } else if constexpr (std::is_same_v<T, TriangleInput>) {
                out = {{"kind", "triangle"},
                       {"start", k.start},
                       {"peak", k.peak}};
            } else {
                out = {{"kind", "ou"},
                       {"mean", k.mean},
                       {"std", k.std},
                       {"tau", k.tau},
                       {"seed", k.seed}};
            }
        },
        spec);
    return out;
}

CircuitSpec parse_circuit(const json& obj) {
    check_keys(obj, "circuit", {"builder", "params"});
    const std::string builder = get_or<std::string>(obj, "builder", "fhn");
    const json params = obj.contains("params") ? obj.at("params")
                                               : json::object();
    if (builder == "fhn") {
        check_keys(params, "circuit.params", {"C", "L", "R", "k"});
        FhnSpec s;
        s.C = get_or(params, "C", s.C);
        s.L = get_or(params, "L", s.L);
        s.R = get_or(params, "R", s.R);
        s.k = get_or(params, "k", s.k);
        return s;
    }
    if (builder == "burster") {
        check_keys(params, "circuit.params",
                   {"capacitance", "leak_g", "leak_v", "fast_mixed_g",
                    "slow_positive_g", "slow_mixed_g", "ultraslow_positive_g"});
        BursterSpec s;
        auto& p = s.params;
        p.capacitance = get_or(params, "capacitance", p.capacitance);
        p.leak_g = get_or(params, "leak_g", p.leak_g);
        p.leak_v = get_or(params, "leak_v", p.leak_v);
        p.fast_mixed.g_max = get_or(params, "fast_mixed_g", p.fast_mixed.g_max);
        p.slow_positive.g_max =
            get_or(params, "slow_positive_g", p.slow_positive.g_max);
        p.slow_mixed.g_max = get_or(params, "slow_mixed_g", p.slow_mixed.g_max);
        p.ultraslow_positive.g_max = get_or(params, "ultraslow_positive_g",
                                            p.ultraslow_positive.g_max);
        return s;
    }
    if (builder == "hco") {
        check_keys(params, "circuit.params", {"g_syn", "v_syn", "tau_syn"});
        HcoSpec s;
        s.g_syn = get_or(params, "g_syn", s.g_syn);
        s.v_syn = get_or(params, "v_syn", s.v_syn);
        s.tau_syn = get_or(params, "tau_syn", s.tau_syn);
        return s;
    }
    if (builder == "rc") {
        check_keys(params, "circuit.params",
                   {"n", "capacitance", "leak_g", "leak_v", "gaps"});
        RcSpec s;
        s.n = get_or<std::size_t>(params, "n", 1);
        s.capacitance = get_or(params, "capacitance", std::vector<double>{});
        s.leak_g = get_or(params, "leak_g", std::vector<double>{});
        s.leak_v = get_or(params, "leak_v", std::vector<double>{});
        if (params.contains("gaps")) {
            for (const json& g : params.at("gaps")) {
                check_keys(g, "circuit.params.gaps", {"i", "j", "g"});
                s.gaps.push_back({get_or<std::size_t>(g, "i", 0),
                                  get_or<std::size_t>(g, "j", 0),
                                  get_or(g, "g", 0.0)});
            }
        }
        return s;
    }
    throw ConfigError("circuit", "unknown builder '" + builder + "'");
}

json circuit_to_json(const CircuitSpec& spec) {
    json out;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, FhnSpec>) {
                out = {{"builder", "fhn"},
                       {"params",
                        {{"C", k.C}, {"L", k.L}, {"R", k.R}, {"k", k.k}}}};
            } else if constexpr (std::is_same_v<T, BursterSpec>) {
                const auto& p = k.params;
                out = {{"builder", "burster"},
                       {"params",
                        {{"capacitance", p.capacitance},
                         {"leak_g", p.leak_g},
                         {"leak_v", p.leak_v},
                         {"fast_mixed_g", p.fast_mixed.g_max},
                         {"slow_positive_g", p.slow_positive.g_max},
                         {"slow_mixed_g", p.slow_mixed.g_max},
                         {"ultraslow_positive_g",
                          p.ultraslow_positive.g_max}}}};
            } else if constexpr (std::is_same_v<T, HcoSpec>) {
                out = {{"builder", "hco"},
                       {"params",
                        {{"g_syn", k.g_syn},
                         {"v_syn", k.v_syn},
                         {"tau_syn", k.tau_syn}}}};
            } else {
                json gaps = json::array();
                for (const GapJunction& g : k.gaps)
                    gaps.push_back({{"i", g.i}, {"j", g.j}, {"g", g.g}});
                out = {{"builder", "rc"},
                       {"params",
                        {{"n", k.n},
                         {"capacitance", k.capacitance},
                         {"leak_g", k.leak_g},
                         {"leak_v", k.leak_v},
                         {"gaps", gaps}}}};
            }
        },
        spec);
    return out;
}

SimConfig parse_solver(const json& obj) {
    check_keys(obj, "solver", {"dt", "horizon", "method", "noise"});
    SimConfig cfg;
    cfg.dt = get_or(obj, "dt", cfg.dt);
    cfg.horizon = get_or(obj, "horizon", cfg.horizon);
    const std::string m =
        get_or<std::string>(obj, "method", "semi_implicit_euler");
    if (m == "semi_implicit_euler")
        cfg.method = Method::SemiImplicitEuler;
    else if (m == "rk4")
        cfg.method = Method::ExplicitRK4;
    else
        throw ConfigError("solver", "unknown method '" + m + "'");
    if (obj.contains("noise")) {
        check_keys(obj.at("noise"), "solver.noise", {"std", "seed"});
        cfg.noise = NoiseConfig{get_or(obj.at("noise"), "std", 0.0),
                                get_or<std::uint64_t>(obj.at("noise"), "seed",
                                                      0)};
    }
    return cfg;
}

json solver_to_json(const SimConfig& cfg) {
    json out = {{"dt", cfg.dt},
                {"horizon", cfg.horizon},
                {"method", cfg.method == Method::SemiImplicitEuler
                               ? "semi_implicit_euler"
                               : "rk4"}};
    if (cfg.noise)
        out["noise"] = {{"std", cfg.noise->std}, {"seed", cfg.noise->seed}};
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// scenario parse/serialize
// ---------------------------------------------------------------------------

ScenarioConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("root", std::string("parse failure: ") + e.what());
    }
    check_keys(root, "root",
               {"schema_version", "experiment", "circuit", "input", "solver",
                "analysis", "dc", "reliability", "sweep", "estimate",
                "amplifier", "motor", "outputs", "seed", "node_inputs"});

    ScenarioConfig cfg;
    cfg.schema_version = get_or(root, "schema_version", 1);
    if (cfg.schema_version != 1)
        throw ConfigError("schema_version", "unsupported version");
    cfg.experiment = get_or<std::string>(root, "experiment", "simulate");
    static const char* kKnown[] = {"simulate", "dc-solve", "reliability",
                                   "sweep", "estimate", "amplifier", "motor"};
    bool known = false;
    for (const char* e : kKnown)
        if (cfg.experiment == e) known = true;
    if (!known)
        throw ConfigError("experiment",
                          "unknown experiment '" + cfg.experiment + "'");

    if (root.contains("circuit")) cfg.circuit = parse_circuit(root["circuit"]);
    if (root.contains("input"))
        cfg.input = parse_input(root["input"], "input");
    if (root.contains("solver")) cfg.sim = parse_solver(root["solver"]);
    cfg.seed = get_or<std::uint64_t>(root, "seed", 0);
    cfg.node_inputs =
        get_or(root, "node_inputs", std::vector<double>{});

    if (root.contains("analysis")) {
        const json& a = root["analysis"];
        check_keys(a, "analysis", {"threshold", "refractory"});
        cfg.analysis.threshold = get_or(a, "threshold", 0.0);
        cfg.analysis.refractory = get_or(a, "refractory", 0.0);
    }
    if (root.contains("dc")) {
        const json& d = root["dc"];
        check_keys(d, "dc",
                   {"outer_tol", "inner_tol", "max_outer", "damping",
                    "continuation_steps", "k_target", "require_converged",
                    "continuation"});
        cfg.dc.cfg.outer_tol = get_or(d, "outer_tol", cfg.dc.cfg.outer_tol);
        cfg.dc.cfg.inner_tol = get_or(d, "inner_tol", cfg.dc.cfg.inner_tol);
        cfg.dc.cfg.max_outer = get_or(d, "max_outer", cfg.dc.cfg.max_outer);
        cfg.dc.cfg.damping = get_or(d, "damping", cfg.dc.cfg.damping);
        cfg.dc.cfg.continuation_steps =
            get_or(d, "continuation_steps", cfg.dc.cfg.continuation_steps);
        cfg.dc.k_target = get_or(d, "k_target", cfg.dc.k_target);
        cfg.dc.require_converged =
            get_or(d, "require_converged", cfg.dc.require_converged);
        cfg.dc.continuation = get_or(d, "continuation", cfg.dc.continuation);
    }
    if (root.contains("reliability")) {
        const json& r = root["reliability"];
        check_keys(r, "reliability",
                   {"trials", "trial_noise_std", "init_perturb", "window",
                    "step_input", "frozen_input"});
        cfg.reliability.trials = get_or(r, "trials", cfg.reliability.trials);
        cfg.reliability.trial_noise_std =
            get_or(r, "trial_noise_std", cfg.reliability.trial_noise_std);
        cfg.reliability.init_perturb =
            get_or(r, "init_perturb", cfg.reliability.init_perturb);
        cfg.reliability.window = get_or(r, "window", cfg.reliability.window);
        if (r.contains("step_input"))
            cfg.reliability.step_input =
                parse_input(r["step_input"], "reliability.step_input");
        if (r.contains("frozen_input"))
            cfg.reliability.frozen_input =
                parse_input(r["frozen_input"], "reliability.frozen_input");
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        check_keys(s, "sweep", {"paths", "grids"});
        if (s.contains("paths"))
            for (const json& p : s["paths"]) {
                check_keys(p, "sweep.paths", {"node", "branch"});
                cfg.sweep.paths.push_back(
                    {get_or<std::size_t>(p, "node", 0),
                     get_or<std::string>(p, "branch", "")});
            }
        if (s.contains("grids"))
            cfg.sweep.grids =
                s["grids"].get<std::vector<std::vector<double>>>();
    }
    if (root.contains("estimate")) {
        const json& e = root["estimate"];
        check_keys(e, "estimate",
                   {"unknown_branches", "theta_truth", "forgetting",
                    "initial_covariance", "observer_gain"});
        cfg.estimate.unknown_branches =
            get_or(e, "unknown_branches", std::vector<std::string>{});
        cfg.estimate.theta_truth =
            get_or(e, "theta_truth", std::vector<double>{});
        cfg.estimate.forgetting =
            get_or(e, "forgetting", cfg.estimate.forgetting);
        cfg.estimate.initial_covariance =
            get_or(e, "initial_covariance", cfg.estimate.initial_covariance);
        cfg.estimate.observer_gain =
            get_or(e, "observer_gain", cfg.estimate.observer_gain);
    }
    if (root.contains("amplifier")) {
        const json& a = root["amplifier"];
        check_keys(a, "amplifier",
                   {"g", "k", "positive", "u_min", "u_max", "points"});
        cfg.amplifier.g = get_or(a, "g", cfg.amplifier.g);
        cfg.amplifier.k = get_or(a, "k", cfg.amplifier.k);
        cfg.amplifier.positive = get_or(a, "positive", cfg.amplifier.positive);
        cfg.amplifier.u_min = get_or(a, "u_min", cfg.amplifier.u_min);
        cfg.amplifier.u_max = get_or(a, "u_max", cfg.amplifier.u_max);
        cfg.amplifier.points =
            get_or<std::size_t>(a, "points", cfg.amplifier.points);
    }
    if (root.contains("motor")) {
        const json& m = root["motor"];
        check_keys(m, "motor",
                   {"reference", "inertia", "viscous", "torque_const",
                    "coulomb", "error_gain", "pulse_torque", "pulse_width",
                    "kp_baseline"});
        cfg.motor.reference = get_or(m, "reference", cfg.motor.reference);
        cfg.motor.plant.inertia =
            get_or(m, "inertia", cfg.motor.plant.inertia);
        cfg.motor.plant.viscous =
            get_or(m, "viscous", cfg.motor.plant.viscous);
        cfg.motor.plant.torque_const =
            get_or(m, "torque_const", cfg.motor.plant.torque_const);
        cfg.motor.plant.coulomb =
            get_or(m, "coulomb", cfg.motor.plant.coulomb);
        cfg.motor.controller.error_gain =
            get_or(m, "error_gain", cfg.motor.controller.error_gain);
        cfg.motor.controller.pulse_torque =
            get_or(m, "pulse_torque", cfg.motor.controller.pulse_torque);
        cfg.motor.controller.pulse_width =
            get_or(m, "pulse_width", cfg.motor.controller.pulse_width);
        cfg.motor.controller.kp_baseline =
            get_or(m, "kp_baseline", cfg.motor.controller.kp_baseline);
    }
    if (root.contains("outputs")) {
        const json& o = root["outputs"];
        check_keys(o, "outputs", {"dir", "prefix", "svg"});
        cfg.outputs.dir = get_or<std::string>(o, "dir", cfg.outputs.dir);
        cfg.outputs.prefix =
            get_or<std::string>(o, "prefix", cfg.outputs.prefix);
        cfg.outputs.svg = get_or(o, "svg", cfg.outputs.svg);
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("root", "cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json root;
    root["schema_version"] = cfg.schema_version;
    root["experiment"] = cfg.experiment;
    root["circuit"] = circuit_to_json(cfg.circuit);
    root["input"] = input_to_json(cfg.input);
    root["solver"] = solver_to_json(cfg.sim);
    root["analysis"] = {{"threshold", cfg.analysis.threshold},
                        {"refractory", cfg.analysis.refractory}};
    root["dc"] = {{"outer_tol", cfg.dc.cfg.outer_tol},
                  {"inner_tol", cfg.dc.cfg.inner_tol},
                  {"max_outer", cfg.dc.cfg.max_outer},
                  {"damping", cfg.dc.cfg.damping},
                  {"continuation_steps", cfg.dc.cfg.continuation_steps},
                  {"k_target", cfg.dc.k_target},
                  {"require_converged", cfg.dc.require_converged},
                  {"continuation", cfg.dc.continuation}};
    root["reliability"] = {
        {"trials", cfg.reliability.trials},
        {"trial_noise_std", cfg.reliability.trial_noise_std},
        {"init_perturb", cfg.reliability.init_perturb},
        {"window", cfg.reliability.window},
        {"step_input", input_to_json(cfg.reliability.step_input)},
        {"frozen_input", input_to_json(cfg.reliability.frozen_input)}};
    json paths = json::array();
    for (const ParamPath& p : cfg.sweep.paths)
        paths.push_back({{"node", p.node}, {"branch", p.branch}});
    root["sweep"] = {{"paths", paths}, {"grids", cfg.sweep.grids}};
    root["estimate"] = {
        {"unknown_branches", cfg.estimate.unknown_branches},
        {"theta_truth", cfg.estimate.theta_truth},
        {"forgetting", cfg.estimate.forgetting},
        {"initial_covariance", cfg.estimate.initial_covariance},
        {"observer_gain", cfg.estimate.observer_gain}};
    root["amplifier"] = {{"g", cfg.amplifier.g},
                         {"k", cfg.amplifier.k},
                         {"positive", cfg.amplifier.positive},
                         {"u_min", cfg.amplifier.u_min},
                         {"u_max", cfg.amplifier.u_max},
                         {"points", cfg.amplifier.points}};
    root["motor"] = {
        {"reference", cfg.motor.reference},
        {"inertia", cfg.motor.plant.inertia},
        {"viscous", cfg.motor.plant.viscous},
        {"torque_const", cfg.motor.plant.torque_const},
        {"coulomb", cfg.motor.plant.coulomb},
        {"error_gain", cfg.motor.controller.error_gain},
        {"pulse_torque", cfg.motor.controller.pulse_torque},
        {"pulse_width", cfg.motor.controller.pulse_width},
        {"kp_baseline", cfg.motor.controller.kp_baseline}};
    root["outputs"] = {{"dir", cfg.outputs.dir},
                       {"prefix", cfg.outputs.prefix},
                       {"svg", cfg.outputs.svg}};
    root["seed"] = cfg.seed;
    root["node_inputs"] = cfg.node_inputs;
    return root.dump(2) + "\n";
}

}  // namespace spikeport
