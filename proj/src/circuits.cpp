#include "spikeport/circuits.hpp"

#include <cmath>
#include <stdexcept>

namespace spikeport {

namespace {

std::size_t op_state_size(const OperatorSpec& op) {
    return std::visit(
        [](const auto& k) -> std::size_t {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, LTIFirstOrder>) {
                return 1;
            } else if constexpr (std::is_same_v<T, ConductanceBranch>) {
                return k.gates.size();
            } else if constexpr (std::is_same_v<T, SumOp>) {
                std::size_t acc = 0;
                for (const auto& t : k.terms) acc += op_state_size(t);
                return acc;
            } else if constexpr (std::is_same_v<T, ScaledOp>) {
                return op_state_size(*k.inner);
            } else {
                return 0;
            }
        },
        op.node);
}

double op_static_current(const OperatorSpec& op, double v) {
    return std::visit(
        [v](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, StaticFunction>) {
                return static_eval(k, v);
            } else if constexpr (std::is_same_v<T, LTIFirstOrder>) {
                return (k.gain + k.feedthrough) * v;
            } else if constexpr (std::is_same_v<T, ConductanceBranch>) {
                return k.static_current(v);
            } else if constexpr (std::is_same_v<T, SumOp>) {
                double acc = 0.0;
                for (const auto& t : k.terms) acc += op_static_current(t, v);
                return acc;
            } else {
                return k.factor * op_static_current(*k.inner, v);
            }
        },
        op.node);
}

bool has_negative_static_range(const OperatorSpec& op) {
    auto current = [&](double v) { return op_static_current(op, v); };
    return !negative_range_of(current, -5.0, 5.0).empty();
}

}  // namespace

void OnePortCircuit::validate() const {
    if (!(capacitance > 0.0))
        throw std::invalid_argument("OnePortCircuit: capacitance must be > 0");
    if (!(leak.g >= 0.0))
        throw std::invalid_argument("OnePortCircuit: leak conductance < 0");
    for (const ControllerBranch& b : branches) {
        if (b.role == BranchRole::Negative && !has_negative_static_range(b.op))
            throw std::invalid_argument(
                "OnePortCircuit: branch '" + b.name +
                "' tagged negative has empty negative conductance range");
    }
}

std::size_t OnePortCircuit::state_size() const {
    std::size_t acc = 1;
    for (const ControllerBranch& b : branches) acc += op_state_size(b.op);
    return acc;
}

double OnePortCircuit::static_current(double v) const {
    double acc = leak.g * (v - leak.v_rev);
    for (const ControllerBranch& b : branches)
        acc += op_static_current(b.op, v);
    return acc;
}

const ControllerBranch* OnePortCircuit::find_branch(
    const std::string& name) const {
    for (const ControllerBranch& b : branches)
        if (b.name == name) return &b;
    return nullptr;
}

ControllerBranch* OnePortCircuit::find_branch(const std::string& name) {
    for (ControllerBranch& b : branches)
        if (b.name == name) return &b;
    return nullptr;
}

void NetworkCircuit::validate() const {
    for (const OnePortCircuit& n : nodes) n.validate();
    for (const GapJunction& g : gap_junctions) {
        if (g.i >= nodes.size() || g.j >= nodes.size())
            throw std::out_of_range("NetworkCircuit: gap junction node index");
        if (!(g.g >= 0.0))
            throw std::invalid_argument("NetworkCircuit: gap conductance < 0");
    }
    for (const Synapse& s : synapses) {
        if (s.pre >= nodes.size() || s.post >= nodes.size())
            throw std::out_of_range("NetworkCircuit: synapse node index");
        if (!(s.g_max >= 0.0) || !(s.tau > 0.0))
            throw std::invalid_argument("NetworkCircuit: synapse parameters");
    }
}

std::size_t NetworkCircuit::state_size() const {
    std::size_t acc = 0;
    for (const OnePortCircuit& n : nodes) acc += n.state_size();
    return acc + synapses.size();
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

OnePortCircuit build_fhn(double C, double L, double R, double k) {
    if (!(C > 0.0) || !(L > 0.0) || !(R > 0.0))
        throw std::invalid_argument("build_fhn: C, L, R must be positive");
    OnePortCircuit c;
    c.capacitance = C;
    c.leak = {0.0, 0.0};
    ControllerBranch neg;
    neg.name = "negative_resistance";
    neg.role = k > 0.0 ? BranchRole::Negative : BranchRole::Positive;
    neg.op = make_static(CubicMinusLinear{1.0 / 3.0, k});
    ControllerBranch rl;
    rl.name = "L";
    rl.role = BranchRole::Positive;
    rl.op = make_lti(LTIFirstOrder{R, L, 0.0});
    c.branches = {std::move(neg), std::move(rl)};
    c.v_init = 0.0;
    c.validate();
    return c;
}

namespace {

ControllerBranch gated_branch(const std::string& name, BranchRole role,
                              const BursterBranchParams& p) {
    ConductanceBranch b;
    b.name = name;
    b.g_max = p.g_max;
    b.reversal = p.reversal;
    Gate g;
    g.steady_state = SigmoidFn{p.gate_slope, p.gate_center};
    g.tau = p.tau;
    g.exponent = 1;
    g.kind = p.gate_slope >= 0.0 ? Gate::Kind::Activation
                                 : Gate::Kind::Inactivation;
    b.gates = {g};
    return ControllerBranch{name, role, make_branch(std::move(b))};
}

}  // namespace

OnePortCircuit build_burster(const BursterParams& p) {
    const double tf = p.fast_mixed.tau;
    const double ts = std::min(p.slow_positive.tau, p.slow_mixed.tau);
    const double ts_hi = std::max(p.slow_positive.tau, p.slow_mixed.tau);
    const double tu = p.ultraslow_positive.tau;
    if (!(tf < ts && ts_hi < tu))
        throw std::invalid_argument(
            "build_burster: timescales must satisfy fast < slow < ultraslow");

    OnePortCircuit c;
    c.capacitance = p.capacitance;
    c.leak = {p.leak_g, p.leak_v};
    c.branches = {
        gated_branch("fast_mixed", BranchRole::Negative, p.fast_mixed),
        gated_branch("slow_positive", BranchRole::Positive, p.slow_positive),
        gated_branch("slow_mixed", BranchRole::Negative, p.slow_mixed),
        gated_branch("ultraslow_positive", BranchRole::Positive,
                     p.ultraslow_positive),
    };
    c.v_init = p.leak_v;
    c.validate();
    return c;
}

double default_burster_input() { return -0.15; }

NetworkCircuit build_hco(OnePortCircuit a, OnePortCircuit b, double g_syn,
                         double v_syn, double tau_syn) {
    if (!(g_syn >= 0.0))
        throw std::invalid_argument("build_hco: g_syn must be >= 0");
    if (!(v_syn < a.leak.v_rev && v_syn < b.leak.v_rev))
        throw std::invalid_argument(
            "build_hco: v_syn must lie below both resting potentials");
    NetworkCircuit net;
    net.nodes = {std::move(a), std::move(b)};
    SigmoidFn act{8.0, -0.2};
    net.synapses = {
        Synapse{0, 1, g_syn, v_syn, act, tau_syn},
        Synapse{1, 0, g_syn, v_syn, act, tau_syn},
    };
    net.validate();
    return net;
}

HcoDefaults build_default_hco() {
    OnePortCircuit a = build_burster();
    OnePortCircuit b = build_burster();
    // symmetry breaking via initial conditions; parameters stay identical
    a.v_init = -0.5;
    b.v_init = 0.3;
    NetworkCircuit net = build_hco(std::move(a), std::move(b), 0.5, -2.0, 1.0);
    return HcoDefaults{std::move(net), default_burster_input(),
                       default_burster_input()};
}

NetworkCircuit build_rc_network(std::size_t n, const std::vector<double>& C,
                                const std::vector<LeakBranch>& leaks,
                                const std::vector<GapJunction>& gaps) {
    if (n < 1) throw std::invalid_argument("build_rc_network: n must be >= 1");
    if (C.size() != n || leaks.size() != n)
        throw std::invalid_argument("build_rc_network: parameter size");
    NetworkCircuit net;
    net.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(C[i] > 0.0))
            throw std::invalid_argument("build_rc_network: C must be > 0");
        net.nodes[i].capacitance = C[i];
        net.nodes[i].leak = leaks[i];
        net.nodes[i].v_init = leaks[i].v_rev;
    }
    net.gap_junctions = gaps;
    net.validate();
    return net;
}

}  // namespace spikeport
