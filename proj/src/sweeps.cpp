#include "spikeport/sweeps.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace spikeport {

void SweepSpec::validate() const {
    circuit.validate();
    sim.validate();
    if (inputs.size() != circuit.nodes.size())
        throw std::invalid_argument("SweepSpec: one input per node");
    if (paths.size() != grids.size() || paths.empty())
        throw std::invalid_argument("SweepSpec: one grid per parameter path");
    for (const auto& g : grids) {
        if (g.empty())
            throw std::invalid_argument("SweepSpec: empty grid");
        for (double v : g)
            if (!std::isfinite(v))
                throw std::invalid_argument("SweepSpec: non-finite grid value");
    }
    // parameter paths must resolve against the template
    NetworkCircuit probe = circuit;
    for (const ParamPath& p : paths) apply_param(probe, p, 0.0);
}

void apply_param(NetworkCircuit& circuit, const ParamPath& path,
                 double value) {
    if (path.branch == "synapses") {
        if (circuit.synapses.empty())
            throw std::invalid_argument("apply_param: circuit has no synapses");
        for (Synapse& s : circuit.synapses) s.g_max = value;
        return;
    }
    if (path.node >= circuit.nodes.size())
        throw std::out_of_range("apply_param: node index");
    ControllerBranch* br = circuit.nodes[path.node].find_branch(path.branch);
    if (!br)
        throw std::invalid_argument("apply_param: no branch named '" +
                                    path.branch + "'");
    if (auto* cond = std::get_if<ConductanceBranch>(&br->op.node)) {
        cond->g_max = value;
        return;
    }
    throw std::invalid_argument(
        "apply_param: branch '" + path.branch + "' has no conductance scale");
}

namespace {

std::vector<std::vector<double>> grid_points(
    const std::vector<std::vector<double>>& grids) {
    std::vector<std::vector<double>> out = {{}};
    for (const auto& g : grids) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out)
            for (double v : g) {
                auto p = prefix;
                p.push_back(v);
                next.push_back(std::move(p));
            }
        out = std::move(next);
    }
    return out;
}

SweepCell run_cell(const SweepSpec& spec, const std::vector<double>& params) {
    SweepCell cell;
    cell.params = params;
    NetworkCircuit circuit = spec.circuit;
    for (std::size_t i = 0; i < spec.paths.size(); ++i)
        apply_param(circuit, spec.paths[i], params[i]);
    // zeroed branches are classified with their role relaxed: a mixed branch
    // at g_max = 0 no longer has a negative range
    for (OnePortCircuit& node : circuit.nodes)
        for (ControllerBranch& br : node.branches)
            if (br.role == BranchRole::Negative)
                if (auto* cond = std::get_if<ConductanceBranch>(&br.op.node))
                    if (cond->g_max == 0.0) br.role = BranchRole::Positive;

    const std::size_t n_steps = spec.sim.steps();
    std::vector<Signal> inputs;
    for (double level : spec.inputs)
        inputs.push_back(Signal::constant(level, n_steps, spec.sim.dt,
                                          Unit::Ampere));
    SimConfig cfg = spec.sim;
    if (cfg.noise) cfg.noise->seed = spec.seed;

    try {
        const SolveReport rep = simulate(circuit, inputs, cfg);
        std::string net_label;
        for (std::size_t ni = 0; ni < circuit.nodes.size(); ++ni) {
            const Signal& v = rep.state(
                circuit.nodes.size() > 1 ? "V" + std::to_string(ni + 1) : "V");
            const SpikeTrain train = detect_spikes(
                v, spec.classifier.threshold, spec.classifier.refractory);
            const BehaviorClass bc = classify_behavior(train, cfg.horizon);
            cell.node_class.push_back(bc.label);
            if (!net_label.empty()) net_label += '|';
            net_label += to_string(bc.label);
        }
        cell.network_class = net_label;
    } catch (const BlowUpError&) {
        cell.failed = true;
        cell.node_class.assign(circuit.nodes.size(), Behavior::Quiescent);
        cell.network_class = "Failed";
    }
    return cell;
}

}  // namespace

BehaviorMap run_sweep(const SweepSpec& spec, int threads) {
    spec.validate();
    const auto points = grid_points(spec.grids);

    BehaviorMap map;
    map.seed = spec.seed;
    map.cells.resize(points.size());

    if (threads < 1) threads = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            map.cells[i] = run_cell(spec, points[i]);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return map;
}

std::string BehaviorMap::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    if (cells.empty()) return "params,network_class,failed\n";
    out << "cell";
    for (std::size_t i = 0; i < cells.front().params.size(); ++i)
        out << ",param_" << (i + 1);
    for (std::size_t i = 0; i < cells.front().node_class.size(); ++i)
        out << ",node_" << (i + 1);
    out << ",network_class,failed\n";
    for (std::size_t c = 0; c < cells.size(); ++c) {
        out << c;
        for (double p : cells[c].params) out << ',' << p;
        for (Behavior b : cells[c].node_class) out << ',' << to_string(b);
        out << ',' << cells[c].network_class << ','
            << (cells[c].failed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::uint64_t BehaviorMap::content_hash() const {
    const std::string csv = to_csv();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : csv) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string BehaviorMap::to_svg() const {
    // one colored cell per grid point, row-major
    const int cell_px = 24;
    const std::size_t n = cells.size();
    const std::size_t cols =
        static_cast<std::size_t>(std::ceil(std::sqrt(double(n))));
    const std::size_t rows = (n + cols - 1) / cols;
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='"
        << cols * cell_px << "' height='" << rows * cell_px << "'>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const char* color = "#cccccc";
        if (cells[i].failed)
            color = "#000000";
        else if (!cells[i].node_class.empty()) {
            switch (cells[i].node_class.front()) {
                case Behavior::Quiescent: color = "#dddddd"; break;
                case Behavior::Spiking: color = "#5588ee"; break;
                case Behavior::Bursting: color = "#ee6644"; break;
            }
        }
        out << "<rect x='" << (i % cols) * cell_px << "' y='"
            << (i / cols) * cell_px << "' width='" << cell_px << "' height='"
            << cell_px << "' fill='" << color << "'/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace spikeport
