#include "spikeport/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace spikeport {

std::size_t SimConfig::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !(horizon > dt))
        throw std::invalid_argument("SimConfig: require 0 < dt < horizon");
    if (noise && noise->std < 0.0)
        throw std::invalid_argument("SimConfig: noise std must be >= 0");
}

void DCSolveConfig::validate() const {
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0))
        throw std::invalid_argument("DCSolveConfig: tolerances must be > 0");
    if (max_outer < 1)
        throw std::invalid_argument("DCSolveConfig: max_outer must be >= 1");
    if (!(damping > 0.0) || damping > 1.0)
        throw std::invalid_argument("DCSolveConfig: damping in (0, 1]");
    if (continuation_steps < 1)
        throw std::invalid_argument("DCSolveConfig: continuation_steps >= 1");
}

const Signal& SolveReport::state(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return trajectory[i];
    throw std::out_of_range("SolveReport: no state named '" + name + "'");
}

std::string SolveReport::summary() const {
    std::ostringstream out;
    out << "converged=" << (converged ? "true" : "false") << '\n';
    out << "outer_iterations=" << outer_iterations << '\n';
    if (!residual_history.empty())
        out << "final_residual=" << residual_history.back() << '\n';
    for (const std::string& d : diagnostics) out << "diagnostic=" << d << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// compiled circuit: flattened elements with state offsets
// ---------------------------------------------------------------------------

namespace {

struct Element {
    enum class Kind { Static, Lti, Gated };
    Kind kind;
    double factor = 1.0;
    StaticFunction f;
    LTIFirstOrder l;
    ConductanceBranch b;
    std::size_t state_off = 0;  // into the global state vector
    std::string name;
};

struct CompiledNode {
    double capacitance = 1.0;
    LeakBranch leak;
    std::size_t v_off = 0;
    std::vector<Element> elements;
};

struct Compiled {
    std::vector<CompiledNode> nodes;
    std::vector<Synapse> synapses;
    std::vector<GapJunction> gaps;
    std::vector<std::size_t> syn_off;
    std::size_t n_states = 0;
    std::vector<std::string> state_names;
};

void flatten_op(const OperatorSpec& op, double factor, const std::string& name,
                std::vector<Element>& out) {
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, StaticFunction>) {
                Element e;
                e.kind = Element::Kind::Static;
                e.factor = factor;
                e.f = k;
                e.name = name;
                out.push_back(std::move(e));
            } else if constexpr (std::is_same_v<T, LTIFirstOrder>) {
                Element e;
                e.kind = Element::Kind::Lti;
                e.factor = factor;
                e.l = k;
                e.name = name;
                out.push_back(std::move(e));
            } else if constexpr (std::is_same_v<T, ConductanceBranch>) {
                Element e;
                e.kind = Element::Kind::Gated;
                e.factor = factor;
                e.b = k;
                e.name = name;
                out.push_back(std::move(e));
            } else if constexpr (std::is_same_v<T, SumOp>) {
                for (std::size_t i = 0; i < k.terms.size(); ++i)
                    flatten_op(k.terms[i], factor,
                               name + "." + std::to_string(i), out);
            } else {
                flatten_op(*k.inner, factor * k.factor, name, out);
            }
        },
        op.node);
}

Compiled compile(const NetworkCircuit& net, bool prefix_nodes) {
    Compiled c;
    for (std::size_t ni = 0; ni < net.nodes.size(); ++ni) {
        const OnePortCircuit& node = net.nodes[ni];
        const std::string pfx =
            prefix_nodes ? "n" + std::to_string(ni + 1) + "." : "";
        CompiledNode cn;
        cn.capacitance = node.capacitance;
        cn.leak = node.leak;
        cn.v_off = c.n_states++;
        c.state_names.push_back(prefix_nodes
                                    ? "V" + std::to_string(ni + 1)
                                    : "V");
        for (const ControllerBranch& br : node.branches)
            flatten_op(br.op, 1.0, br.name, cn.elements);
        for (Element& e : cn.elements) {
            if (e.kind == Element::Kind::Lti) {
                e.state_off = c.n_states++;
                c.state_names.push_back(pfx + "I_" + e.name);
            } else if (e.kind == Element::Kind::Gated) {
                e.state_off = c.n_states;
                for (std::size_t g = 0; g < e.b.gates.size(); ++g) {
                    ++c.n_states;
                    c.state_names.push_back(
                        pfx + "m_" + e.name +
                        (e.b.gates.size() > 1 ? std::to_string(g + 1) : ""));
                }
            }
        }
        c.nodes.push_back(std::move(cn));
    }
    c.synapses = net.synapses;
    c.gaps = net.gap_junctions;
    for (std::size_t s = 0; s < net.synapses.size(); ++s) {
        c.syn_off.push_back(c.n_states++);
        c.state_names.push_back("s_syn" + std::to_string(s + 1));
    }
    return c;
}

std::vector<double> default_initial_state(const Compiled& c) {
    // rest consistent with the initial voltage held forever
    std::vector<double> x(c.n_states, 0.0);
    return x;
}

void init_state(const Compiled& c, const NetworkCircuit& net,
                std::vector<double>& x) {
    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
        const double v0 = net.nodes[ni].v_init;
        x[c.nodes[ni].v_off] = v0;
        for (const Element& e : c.nodes[ni].elements) {
            if (e.kind == Element::Kind::Lti) {
                x[e.state_off] = e.l.gain * v0;
            } else if (e.kind == Element::Kind::Gated) {
                for (std::size_t g = 0; g < e.b.gates.size(); ++g)
                    x[e.state_off + g] = e.b.gates[g].steady_state(v0);
            }
        }
    }
    for (std::size_t s = 0; s < c.synapses.size(); ++s)
        x[c.syn_off[s]] =
            c.synapses[s].activation(net.nodes[c.synapses[s].pre].v_init);
}

double gated_current(const Element& e, const std::vector<double>& x,
                     double v) {
    double g = e.b.g_max;
    for (std::size_t i = 0; i < e.b.gates.size(); ++i)
        g *= std::pow(x[e.state_off + i], e.b.gates[i].exponent);
    return e.factor * g * (v - e.b.reversal);
}

/// One semi-implicit step: internal states implicitly (exact exponential
/// update for gates, implicit Euler for LTI), voltages explicitly from the
/// pre-step voltages.
void semi_implicit_step(const Compiled& c, std::vector<double>& x,
                        const std::vector<double>& i_ext, double dt,
                        double t) {
    std::vector<double> v_old(c.nodes.size());
    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni)
        v_old[ni] = x[c.nodes[ni].v_off];

    std::vector<double> dv(c.nodes.size(), 0.0);
    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
        const CompiledNode& cn = c.nodes[ni];
        const double v = v_old[ni];
        double i_total = cn.leak.g * (v - cn.leak.v_rev);
        for (const Element& e : cn.elements) {
            switch (e.kind) {
                case Element::Kind::Static:
                    i_total += e.factor * static_eval(e.f, v);
                    break;
                case Element::Kind::Lti: {
                    const double a = dt / e.l.tau;
                    const double xn =
                        (x[e.state_off] + a * e.l.gain * v) / (1.0 + a);
                    x[e.state_off] = xn;
                    i_total += e.factor * (xn + e.l.feedthrough * v);
                    break;
                }
                case Element::Kind::Gated: {
                    for (std::size_t g = 0; g < e.b.gates.size(); ++g) {
                        const Gate& gate = e.b.gates[g];
                        const double minf = gate.steady_state(v);
                        const double m =
                            minf + (x[e.state_off + g] - minf) *
                                       std::exp(-dt / gate.tau);
                        x[e.state_off + g] = std::clamp(m, 0.0, 1.0);
                    }
                    i_total += gated_current(e, x, v);
                    break;
                }
            }
        }
        dv[ni] = i_ext[ni] - i_total;
    }

    for (std::size_t s = 0; s < c.synapses.size(); ++s) {
        const Synapse& syn = c.synapses[s];
        const double sinf = syn.activation(v_old[syn.pre]);
        const double sv = sinf + (x[c.syn_off[s]] - sinf) *
                                     std::exp(-dt / syn.tau);
        x[c.syn_off[s]] = std::clamp(sv, 0.0, 1.0);
        dv[syn.post] -= syn.g_max * sv * (v_old[syn.post] - syn.v_rev);
    }
    for (const GapJunction& gj : c.gaps) {
        const double i_gap = gj.g * (v_old[gj.i] - v_old[gj.j]);
        dv[gj.i] -= i_gap;
        dv[gj.j] += i_gap;
    }

    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
        const double v_new =
            v_old[ni] + dt / c.nodes[ni].capacitance * dv[ni];
        if (std::fabs(v_new) > 1e6) throw BlowUpError(t);
        x[c.nodes[ni].v_off] = v_new;
    }
}

/// Vector field for the explicit RK4 path (gates in ODE form).
void vector_field(const Compiled& c, const std::vector<double>& x,
                  const std::vector<double>& i_ext,
                  std::vector<double>& dx) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::vector<double> v(c.nodes.size());
    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni)
        v[ni] = x[c.nodes[ni].v_off];

    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni) {
        const CompiledNode& cn = c.nodes[ni];
        double i_total = cn.leak.g * (v[ni] - cn.leak.v_rev);
        for (const Element& e : cn.elements) {
            switch (e.kind) {
                case Element::Kind::Static:
                    i_total += e.factor * static_eval(e.f, v[ni]);
                    break;
                case Element::Kind::Lti:
                    dx[e.state_off] =
                        (e.l.gain * v[ni] - x[e.state_off]) / e.l.tau;
                    i_total += e.factor *
                               (x[e.state_off] + e.l.feedthrough * v[ni]);
                    break;
                case Element::Kind::Gated:
                    for (std::size_t g = 0; g < e.b.gates.size(); ++g) {
                        const Gate& gate = e.b.gates[g];
                        dx[e.state_off + g] =
                            (gate.steady_state(v[ni]) - x[e.state_off + g]) /
                            gate.tau;
                    }
                    i_total += gated_current(e, x, v[ni]);
                    break;
            }
        }
        dx[cn.v_off] = i_ext[ni] - i_total;
    }

    for (std::size_t s = 0; s < c.synapses.size(); ++s) {
        const Synapse& syn = c.synapses[s];
        dx[c.syn_off[s]] =
            (syn.activation(v[syn.pre]) - x[c.syn_off[s]]) / syn.tau;
        dx[c.nodes[syn.post].v_off] -=
            syn.g_max * x[c.syn_off[s]] * (v[syn.post] - syn.v_rev);
    }
    for (const GapJunction& gj : c.gaps) {
        const double i_gap = gj.g * (v[gj.i] - v[gj.j]);
        dx[c.nodes[gj.i].v_off] -= i_gap;
        dx[c.nodes[gj.j].v_off] += i_gap;
    }
    for (std::size_t ni = 0; ni < c.nodes.size(); ++ni)
        dx[c.nodes[ni].v_off] /= c.nodes[ni].capacitance;
}

void rk4_step(const Compiled& c, std::vector<double>& x,
              const std::vector<double>& i_ext, double dt, double t) {
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    vector_field(c, x, i_ext, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    vector_field(c, tmp, i_ext, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    vector_field(c, tmp, i_ext, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    vector_field(c, tmp, i_ext, k4);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (const CompiledNode& cn : c.nodes) {
        if (std::fabs(x[cn.v_off]) > 1e6) throw BlowUpError(t);
        for (const Element& e : cn.elements)
            if (e.kind == Element::Kind::Gated)
                for (std::size_t g = 0; g < e.b.gates.size(); ++g)
                    x[e.state_off + g] =
                        std::clamp(x[e.state_off + g], 0.0, 1.0);
    }
    for (std::size_t s = 0; s < c.synapses.size(); ++s)
        x[c.syn_off[s]] = std::clamp(x[c.syn_off[s]], 0.0, 1.0);
}

SolveReport run_simulation(const NetworkCircuit& net,
                           const std::vector<Signal>& i_ext,
                           const SimConfig& cfg, bool prefix_nodes,
                           const Signal* v_measured = nullptr,
                           double injection_gain = 0.0) {
    net.validate();
    cfg.validate();
    const std::size_t n_steps = cfg.steps();
    if (i_ext.size() != net.nodes.size())
        throw std::invalid_argument("simulate: one input signal per node");
    for (const Signal& s : i_ext) {
        if (s.size() != n_steps || s.dt != cfg.dt)
            throw std::invalid_argument(
                "simulate: input not conformable with the simulation grid");
    }

    Compiled c = compile(net, prefix_nodes);
    std::vector<double> x = default_initial_state(c);
    init_state(c, net, x);
    if (cfg.initial_state) {
        if (cfg.initial_state->size() != c.n_states)
            throw std::invalid_argument("simulate: initial state size");
        x = *cfg.initial_state;
    }

    std::mt19937_64 rng(cfg.noise ? cfg.noise->seed : 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_scale =
        cfg.noise ? cfg.noise->std / std::sqrt(cfg.dt) : 0.0;

    SolveReport report;
    report.names = c.state_names;
    report.trajectory.assign(
        c.n_states, Signal::zeros(n_steps, cfg.dt, Unit::Dimensionless));

    std::vector<double> inputs(net.nodes.size());
    bool stiff = false;
    for (const CompiledNode& cn : c.nodes)
        for (const Element& e : cn.elements) {
            if (e.kind == Element::Kind::Lti && e.l.tau < 2.0 * cfg.dt)
                stiff = true;
            if (e.kind == Element::Kind::Gated)
                for (const Gate& g : e.b.gates)
                    if (g.tau < 2.0 * cfg.dt) stiff = true;
        }
    if (stiff) report.diagnostics.push_back("stiffness: tau < 2*dt");

    for (std::size_t n = 0; n < n_steps; ++n) {
        for (std::size_t i = 0; i < c.n_states; ++i)
            report.trajectory[i].samples[n] = x[i];
        for (std::size_t ni = 0; ni < net.nodes.size(); ++ni) {
            inputs[ni] = i_ext[ni].samples[n];
            if (noise_scale != 0.0) inputs[ni] += noise_scale * gauss(rng);
        }
        if (v_measured)
            inputs[0] +=
                injection_gain * (v_measured->samples[n] - x[c.nodes[0].v_off]);
        const double t = static_cast<double>(n) * cfg.dt;
        if (cfg.method == Method::SemiImplicitEuler)
            semi_implicit_step(c, x, inputs, cfg.dt, t);
        else
            rk4_step(c, x, inputs, cfg.dt, t);
    }
    report.converged = true;
    report.outer_iterations = 0;
    return report;
}

}  // namespace

SolveReport simulate(const OnePortCircuit& circuit, const Signal& i_ext,
                     const SimConfig& cfg) {
    NetworkCircuit net;
    net.nodes = {circuit};
    return run_simulation(net, {i_ext}, cfg, false);
}

SolveReport simulate(const NetworkCircuit& network,
                     const std::vector<Signal>& i_ext, const SimConfig& cfg) {
    // single-node networks keep one-port names (V, I_<branch>, ...)
    return run_simulation(network, i_ext, cfg, network.nodes.size() > 1);
}

SolveReport simulate_with_injection(const OnePortCircuit& circuit,
                                    const Signal& i_ext,
                                    const Signal& v_measured, double gain,
                                    const SimConfig& cfg) {
    NetworkCircuit net;
    net.nodes = {circuit};
    return run_simulation(net, {i_ext}, cfg, false, &v_measured, gain);
}

// ---------------------------------------------------------------------------
// decomposition
// ---------------------------------------------------------------------------

FeedbackSystem decompose(const OnePortCircuit& circuit) {
    circuit.validate();
    FeedbackSystem sys;
    sys.plant = {circuit.capacitance, circuit.leak.g, circuit.leak.v_rev};
    std::vector<OperatorSpec> c1_terms, c2_terms;
    for (const ControllerBranch& br : circuit.branches) {
        if (br.role == BranchRole::Positive) {
            c1_terms.push_back(br.op);
            continue;
        }
        if (const auto* f = std::get_if<StaticFunction>(&br.op.node)) {
            if (const auto* cml = std::get_if<CubicMinusLinear>(f)) {
                c1_terms.push_back(make_static(Cubic{cml->cubic}));
                c2_terms.push_back(make_static(Linear{cml->linear}));
                continue;
            }
            // generic static split: shear by the worst negative slope
            double shear = 0.0;
            for (int i = 0; i <= 4096; ++i) {
                const double v = -5.0 + 10.0 * i / 4096.0;
                shear = std::max(shear, -static_deriv(*f, v));
            }
            c1_terms.push_back(
                make_sum({make_static(*f), make_static(Linear{shear})}));
            c2_terms.push_back(make_static(Linear{shear}));
            continue;
        }
        throw std::invalid_argument(
            "decompose: negative-tagged branch '" + br.name +
            "' is not static; no monotone split available");
    }
    sys.c1 = c1_terms.empty() ? make_zero() : make_sum(std::move(c1_terms));
    sys.c2 = c2_terms.empty() ? make_zero() : make_sum(std::move(c2_terms));
    return sys;
}

// ---------------------------------------------------------------------------
// splitting engine
// ---------------------------------------------------------------------------

Signal feedback_residual(const PlantInverse& plant, const OperatorSpec& c1,
                         const OperatorSpec& c2, const Signal& i_star,
                         const Signal& v) {
    if (!i_star.conformable(v))
        throw std::invalid_argument("feedback_residual: not conformable");
    if (v.size() < 2)
        throw std::invalid_argument("feedback_residual: need >= 2 samples");
    EvalOptions opts;
    opts.init_input = v.samples.front();
    const Signal y1 = evaluate(c1, v, opts);
    const Signal y2 = evaluate(c2, v, opts);
    Signal r = Signal::zeros(v.size() - 1, v.dt, Unit::Ampere);
    for (std::size_t n = 0; n + 1 < v.size(); ++n) {
        r.samples[n] =
            plant.capacitance * (v.samples[n + 1] - v.samples[n]) / v.dt +
            plant.g_leak * (v.samples[n] - plant.v_leak) + y1.samples[n] -
            y2.samples[n] - i_star.samples[n];
    }
    return r;
}

namespace {

/// Causal sweep solving P^{-1}(W) + C1(W) = input with W[0] = v0. Matches
/// the simulator's discretization exactly, so converged dc iterates share
/// the simulator's fixed points.
Signal plant_sweep(const PlantInverse& plant, const OperatorSpec& c1,
                   const Signal& input, double v0) {
    OperatorRunner runner(c1, input.dt);
    runner.init_from(v0);
    Signal w = Signal::zeros(input.size(), input.dt, Unit::Volt);
    w.samples[0] = v0;
    for (std::size_t n = 0; n + 1 < input.size(); ++n) {
        const double v = w.samples[n];
        const double i1 = runner.step(v);
        const double w_next =
            v + input.dt / plant.capacitance *
                    (input.samples[n] - plant.g_leak * (v - plant.v_leak) -
                     i1);
        if (std::fabs(w_next) > 1e6)
            throw BlowUpError(static_cast<double>(n) * input.dt);
        w.samples[n + 1] = w_next;
    }
    return w;
}

}  // namespace

SolveReport dc_solve(const PlantInverse& plant, const OperatorSpec& c1,
                     const OperatorSpec& c2, const Signal& i_star,
                     const Signal& v_init, const DCSolveConfig& cfg) {
    cfg.validate();
    if (!i_star.conformable(v_init))
        throw std::invalid_argument("dc_solve: signals not conformable");
    const double v0 = v_init.samples.front();

    SolveReport report;
    Signal v = v_init;
    EvalOptions opts;
    opts.init_input = v0;
    for (int it = 1; it <= cfg.max_outer; ++it) {
        const Signal y2 = evaluate(c2, v, opts);
        const Signal input = add(i_star, y2);
        Signal w = plant_sweep(plant, c1, input, v0);

        const double diff = l2_norm(subtract(w, v));
        const double res =
            l2_norm(feedback_residual(plant, c1, c2, i_star, w));
        report.residual_history.push_back(res);
        report.outer_iterations = it;
        if (diff <= cfg.outer_tol || res <= cfg.outer_tol) {
            report.converged = true;
            v = std::move(w);
            break;
        }
        // relaxation toward the new iterate
        v = add(scale(cfg.damping, w), scale(1.0 - cfg.damping, v));
    }
    if (!report.converged)
        report.diagnostics.push_back(
            "dc_solve: max_outer reached without convergence (local theory "
            "only; outcome reported, not raised)");
    report.names = {"V"};
    report.trajectory = {std::move(v)};
    return report;
}

SolveReport continuation_solve(const PlantInverse& plant,
                               const OperatorSpec& c1,
                               const std::function<OperatorSpec(double)>& c2_at,
                               double k_target, const Signal& i_star,
                               const DCSolveConfig& cfg) {
    cfg.validate();
    // global solve at k = 0: the loop is monotone, one sweep suffices
    Signal v = plant_sweep(plant, c1, i_star, 0.0);
    SolveReport last = dc_solve(plant, c1, c2_at(0.0), i_star, v, cfg);
    if (!last.converged || k_target == 0.0) {
        last.diagnostics.push_back("continuation: k_reached=0");
        return last;
    }
    double k_reached = 0.0;
    for (int s = 1; s <= cfg.continuation_steps; ++s) {
        const double k = k_target * s / cfg.continuation_steps;
        SolveReport rep = dc_solve(plant, c1, c2_at(k), i_star,
                                   last.state("V"), cfg);
        if (!rep.converged) {
            rep.diagnostics.push_back("continuation: failed at k=" +
                                      std::to_string(k));
            rep.diagnostics.push_back("continuation: k_reached=" +
                                      std::to_string(k_reached));
            return rep;
        }
        k_reached = k;
        last = std::move(rep);
    }
    last.diagnostics.push_back("continuation: k_reached=" +
                               std::to_string(k_reached));
    return last;
}

Signal monotone_solve(const OperatorSpec& op, const Signal& target,
                      double inner_tol, int max_iter) {
    const double alpha = 1.0;
    Signal x = Signal::zeros(target.size(), target.dt, target.unit);
    std::vector<double> history;
    for (int it = 0; it < max_iter; ++it) {
        const Signal residual = subtract(evaluate(op, x), target);
        const double rn = l2_norm(residual);
        history.push_back(rn);
        if (rn <= inner_tol) return x;
        x = resolvent(op, alpha, add(x, scale(alpha, target)));
    }
    const double final_res = l2_norm(subtract(evaluate(op, x), target));
    if (final_res <= inner_tol) return x;
    throw NonconvergenceError("monotone_solve: max_iter exceeded", final_res);
}

}  // namespace spikeport
