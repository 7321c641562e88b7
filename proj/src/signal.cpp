#include "spikeport/signal.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace spikeport {

Signal::Signal(std::vector<double> s, double step, Unit u)
    : samples(std::move(s)), dt(step), unit(u) {
    validate();
}

Signal Signal::zeros(std::size_t n, double dt, Unit u) {
    return Signal(std::vector<double>(n, 0.0), dt, u);
}

Signal Signal::constant(double value, std::size_t n, double dt, Unit u) {
    return Signal(std::vector<double>(n, value), dt, u);
}

bool Signal::conformable(const Signal& other) const {
    // unit tags are metadata; both power pairings (V with I) and increment
    // pairings (like with like) are legal, so only the grid must match
    return samples.size() == other.samples.size() && dt == other.dt;
}

void Signal::validate() const {
    if (!(dt > 0.0))
        throw std::invalid_argument("Signal: dt must be positive");
    for (double v : samples)
        if (!std::isfinite(v))
            throw std::invalid_argument("Signal: non-finite sample");
}

static void require_conformable(const Signal& a, const Signal& b,
                                const char* what) {
    if (!a.conformable(b))
        throw std::invalid_argument(std::string(what) +
                                    ": signals not conformable");
}

double inner_product(const Signal& a, const Signal& b) {
    require_conformable(a, b, "inner_product");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        acc += a.samples[i] * b.samples[i];
    return acc * a.dt;
}

Signal increment_pair(const Signal& x1, const Signal& x2) {
    require_conformable(x1, x2, "increment_pair");
    Signal out = x1;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] -= x2.samples[i];
    return out;
}

double l2_norm(const Signal& a) { return std::sqrt(inner_product(a, a)); }

double linf_norm(const Signal& a) {
    double m = 0.0;
    for (double v : a.samples) m = std::max(m, std::fabs(v));
    return m;
}

Signal add(const Signal& a, const Signal& b) {
    require_conformable(a, b, "add");
    Signal out = a;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] += b.samples[i];
    return out;
}

Signal subtract(const Signal& a, const Signal& b) {
    return increment_pair(a, b);
}

Signal scale(double factor, const Signal& a) {
    Signal out = a;
    for (double& v : out.samples) v *= factor;
    return out;
}

static void append_full_precision(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

std::string to_csv(const Signal& s, const std::string& name) {
    return to_csv(std::vector<Signal>{s}, std::vector<std::string>{name});
}

std::string to_csv(const std::vector<Signal>& columns,
                   const std::vector<std::string>& names) {
    if (columns.empty() || columns.size() != names.size())
        throw std::invalid_argument("to_csv: column/name mismatch");
    for (const Signal& c : columns)
        require_conformable(columns.front(), c, "to_csv");
    std::string out = "t";
    for (const std::string& n : names) {
        out += ',';
        out += n;
    }
    out += '\n';
    const std::size_t n = columns.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        append_full_precision(out, columns.front().time(i));
        for (const Signal& c : columns) {
            out += ',';
            append_full_precision(out, c.samples[i]);
        }
        out += '\n';
    }
    return out;
}

Signal from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("from_csv: empty input");
    std::vector<double> t, v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("from_csv: malformed row");
        t.push_back(std::stod(line.substr(0, comma)));
        v.push_back(std::stod(line.substr(comma + 1)));
    }
    if (v.empty()) throw std::invalid_argument("from_csv: no rows");
    double dt = v.size() > 1 ? t[1] - t[0] : 1.0;
    return Signal(std::move(v), dt);
}

}  // namespace spikeport
