#include "spikeport/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spikeport {

void ObserverConfig::validate() const {
    if (!(forgetting > 0.0) || forgetting > 1.0)
        throw std::invalid_argument("ObserverConfig: forgetting in (0, 1]");
    if (!(initial_covariance > 0.0))
        throw std::invalid_argument("ObserverConfig: covariance scale > 0");
    for (double t : theta_init)
        if (t < 0.0)
            throw std::invalid_argument("ObserverConfig: theta_init >= 0");
}

namespace {

double branch_static_slope(const OperatorSpec& op, double v);

double branch_static_slope_visit(const StaticFunction& f, double v) {
    return static_deriv(f, v);
}

double branch_static_slope(const OperatorSpec& op, double v) {
    return std::visit(
        [v](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, StaticFunction>) {
                return branch_static_slope_visit(k, v);
            } else if constexpr (std::is_same_v<T, LTIFirstOrder>) {
                return k.gain + k.feedthrough;
            } else if constexpr (std::is_same_v<T, ConductanceBranch>) {
                return k.static_slope(v);
            } else if constexpr (std::is_same_v<T, SumOp>) {
                double acc = 0.0;
                for (const auto& t : k.terms)
                    acc += branch_static_slope(t, v);
                return acc;
            } else {
                return k.factor * branch_static_slope(*k.inner, v);
            }
        },
        op.node);
}

}  // namespace

double output_feedback_gain_bound(const OnePortCircuit& circuit) {
    double bound = 0.0;
    for (const ControllerBranch& br : circuit.branches) {
        if (br.role != BranchRole::Negative) continue;
        double worst = 0.0;
        constexpr int kSamples = 65536;
        double best_v = 0.0;
        for (int i = 0; i <= kSamples; ++i) {
            const double v = -5.0 + 10.0 * i / kSamples;
            const double s = -branch_static_slope(br.op, v);
            if (s > worst) {
                worst = s;
                best_v = v;
            }
        }
        // local refinement around the grid maximum
        double lo = best_v - 10.0 / kSamples, hi = best_v + 10.0 / kSamples;
        for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (-branch_static_slope(br.op, m1) <
                -branch_static_slope(br.op, m2))
                lo = m1;
            else
                hi = m2;
        }
        worst = std::max(worst, -branch_static_slope(br.op, 0.5 * (lo + hi)));
        bound += std::max(0.0, worst);
    }
    return bound;
}

SolveReport contracting_observer(const OnePortCircuit& circuit_copy,
                                 const Signal& i_measured,
                                 const Signal& v_measured, double gain,
                                 const SimConfig& cfg) {
    if (!i_measured.conformable(v_measured))
        throw std::invalid_argument("contracting_observer: not conformable");
    SolveReport rep = simulate_with_injection(circuit_copy, i_measured,
                                              v_measured, gain, cfg);
    const double bound = output_feedback_gain_bound(circuit_copy);
    if (gain < bound)
        rep.diagnostics.push_back(
            "warning: injection gain below output feedback bound (" +
            std::to_string(bound) + "); contraction not guaranteed");
    return rep;
}

// ---------------------------------------------------------------------------
// recursive least squares over maximal conductances
// ---------------------------------------------------------------------------

namespace {

struct Regression {
    std::vector<std::vector<double>> phi;  // [n_params][n_rows]
    std::vector<double> y;                 // n_rows
};

Regression build_regression(const OnePortCircuit& model,
                            const std::vector<std::string>& unknown,
                            const Signal& i_ext, const Signal& v) {
    if (!i_ext.conformable(v))
        throw std::invalid_argument("rls: signals not conformable");
    if (v.size() < 2) throw std::invalid_argument("rls: need >= 2 samples");

    EvalOptions opts;
    opts.init_input = v.samples.front();

    const std::size_t rows = v.size() - 1;
    Regression reg;
    reg.y.assign(rows, 0.0);
    for (std::size_t n = 0; n < rows; ++n)
        reg.y[n] = i_ext.samples[n] -
                   model.capacitance * (v.samples[n + 1] - v.samples[n]) / v.dt -
                   model.leak.g * (v.samples[n] - model.leak.v_rev);

    for (const std::string& name : unknown) {
        const ControllerBranch* br = model.find_branch(name);
        if (!br)
            throw std::invalid_argument("rls: no branch named '" + name + "'");
        const auto* cond = std::get_if<ConductanceBranch>(&br->op.node);
        if (!cond)
            throw std::invalid_argument(
                "rls: unknown parameters must scale conductance branches");
        ConductanceBranch unit = *cond;
        unit.g_max = 1.0;
        const Signal col = evaluate(make_branch(unit), v, opts);
        reg.phi.emplace_back(col.samples.begin(), col.samples.end() - 1);
    }
    // branches with known parameters enter as known terms
    for (const ControllerBranch& br : model.branches) {
        if (std::find(unknown.begin(), unknown.end(), br.name) !=
            unknown.end())
            continue;
        const Signal known = evaluate(br.op, v, opts);
        for (std::size_t n = 0; n < rows; ++n) reg.y[n] -= known.samples[n];
    }
    return reg;
}

std::vector<double> solve_spd(std::vector<std::vector<double>> a,
                              std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t piv = i;
        for (std::size_t r = i + 1; r < n; ++r)
            if (std::fabs(a[r][i]) > std::fabs(a[piv][i])) piv = r;
        std::swap(a[i], a[piv]);
        std::swap(b[i], b[piv]);
        if (a[i][i] == 0.0)
            throw std::runtime_error("least squares: singular normal matrix");
        for (std::size_t r = i + 1; r < n; ++r) {
            const double f = a[r][i] / a[i][i];
            for (std::size_t c = i; c < n; ++c) a[r][c] -= f * a[i][c];
            b[r] -= f * b[i];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
        x[i] = acc / a[i][i];
    }
    return x;
}

}  // namespace

EstimationReport rls_estimate(const OnePortCircuit& model,
                              const std::vector<std::string>& unknown,
                              const Signal& i_ext, const Signal& v_measured,
                              const ObserverConfig& cfg,
                              const std::vector<double>* theta_truth) {
    cfg.validate();
    const Regression reg =
        build_regression(model, unknown, i_ext, v_measured);
    const std::size_t p = reg.phi.size();
    const std::size_t rows = reg.y.size();
    if (cfg.theta_init.size() != 0 && cfg.theta_init.size() != p)
        throw std::invalid_argument("rls: theta_init size mismatch");

    std::vector<double> theta(p, 0.0);
    if (!cfg.theta_init.empty()) theta = cfg.theta_init;
    std::vector<std::vector<double>> P(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) P[i][i] = cfg.initial_covariance;

    EstimationReport out;
    out.theta.assign(p, Signal::zeros(rows, v_measured.dt));
    out.cov_trace = Signal::zeros(rows, v_measured.dt);
    out.v_hat = Signal::zeros(rows, v_measured.dt, Unit::Volt);

    const double lambda = cfg.forgetting;
    std::vector<double> phi(p), Pphi(p), k_gain(p);
    for (std::size_t n = 0; n < rows; ++n) {
        for (std::size_t i = 0; i < p; ++i) phi[i] = reg.phi[i][n];

        double denom = lambda;
        for (std::size_t i = 0; i < p; ++i) {
            Pphi[i] = 0.0;
            for (std::size_t j = 0; j < p; ++j) Pphi[i] += P[i][j] * phi[j];
        }
        for (std::size_t i = 0; i < p; ++i) denom += phi[i] * Pphi[i];
        for (std::size_t i = 0; i < p; ++i) k_gain[i] = Pphi[i] / denom;

        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred += theta[i] * phi[i];
        const double err = reg.y[n] - pred;
        for (std::size_t i = 0; i < p; ++i)
            theta[i] = std::max(0.0, theta[i] + k_gain[i] * err);

        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                P[i][j] = (P[i][j] - k_gain[i] * Pphi[j]) / lambda;
        // enforce symmetry lost to rounding in the rank-1 downdate
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                const double s = 0.5 * (P[i][j] + P[j][i]);
                P[i][j] = P[j][i] = s;
            }

        bool pd = true;
        for (std::size_t i = 0; i < p; ++i)
            if (!(P[i][i] > 0.0)) pd = false;
        if (!pd) {
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    P[i][j] = (i == j) ? cfg.initial_covariance : 0.0;
            out.covariance_reset = true;
        }

        double trace = 0.0;
        for (std::size_t i = 0; i < p; ++i) trace += P[i][i];
        out.cov_trace.samples[n] = trace;
        for (std::size_t i = 0; i < p; ++i)
            out.theta[i].samples[n] = theta[i];

        // one-step voltage prediction from the current estimate:
        // y[n] already equals i_ext - known - leak - C*dV/dt, so the
        // prediction error relative to the measured step is (y - pred)/C*dt
        double pred_updated = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred_updated += theta[i] * phi[i];
        out.v_hat.samples[n] =
            v_measured.samples[n + 1] +
            v_measured.dt / model.capacitance * (reg.y[n] - pred_updated);
    }
    out.theta_final = theta;
    if (theta_truth && theta_truth->size() == p) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            num += (theta[i] - (*theta_truth)[i]) * (theta[i] - (*theta_truth)[i]);
            den += (*theta_truth)[i] * (*theta_truth)[i];
        }
        out.final_relative_error = den > 0.0 ? std::sqrt(num / den) : -1.0;
    }
    return out;
}

std::vector<double> batch_least_squares(
    const OnePortCircuit& model, const std::vector<std::string>& unknown,
    const Signal& i_ext, const Signal& v_measured) {
    const Regression reg = build_regression(model, unknown, i_ext, v_measured);
    const std::size_t p = reg.phi.size();
    std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
    std::vector<double> b(p, 0.0);
    for (std::size_t n = 0; n < reg.y.size(); ++n) {
        for (std::size_t i = 0; i < p; ++i) {
            b[i] += reg.phi[i][n] * reg.y[n];
            for (std::size_t j = 0; j < p; ++j)
                a[i][j] += reg.phi[i][n] * reg.phi[j][n];
        }
    }
    return solve_spd(std::move(a), std::move(b));
}

std::string EstimationReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "t";
    for (std::size_t i = 0; i < theta.size(); ++i)
        out << ",theta_" << (i + 1);
    out << ",vhat,cov_trace\n";
    const std::size_t rows = cov_trace.size();
    for (std::size_t n = 0; n < rows; ++n) {
        out << cov_trace.time(n);
        for (const Signal& th : theta) out << ',' << th.samples[n];
        out << ',' << v_hat.samples[n] << ',' << cov_trace.samples[n] << '\n';
    }
    return out.str();
}

}  // namespace spikeport
