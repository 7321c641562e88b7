#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace spikeport {

enum class Unit { Volt, Ampere, Dimensionless };

/// Uniformly sampled real trajectory. The common currency of all operators:
/// immutable by convention, safe to share across workers.
struct Signal {
    std::vector<double> samples;
    double dt = 1.0;
    Unit unit = Unit::Dimensionless;

    Signal() = default;
    Signal(std::vector<double> s, double step, Unit u = Unit::Dimensionless);

    static Signal zeros(std::size_t n, double dt, Unit u = Unit::Dimensionless);
    static Signal constant(double value, std::size_t n, double dt,
                           Unit u = Unit::Dimensionless);

    std::size_t size() const { return samples.size(); }
    double time(std::size_t i) const { return static_cast<double>(i) * dt; }
    double horizon() const { return static_cast<double>(samples.size()) * dt; }

    bool conformable(const Signal& other) const;

    /// dt > 0 and all samples finite; throws std::invalid_argument otherwise.
    void validate() const;
};

/// Left-endpoint Riemann sum of the L2 pairing: sum_i a_i * b_i * dt.
double inner_product(const Signal& a, const Signal& b);

/// Pointwise difference x1 - x2. Increments pair within a unit.
Signal increment_pair(const Signal& x1, const Signal& x2);

double l2_norm(const Signal& a);
double linf_norm(const Signal& a);

Signal add(const Signal& a, const Signal& b);
Signal subtract(const Signal& a, const Signal& b);
Signal scale(double factor, const Signal& a);

/// CSV with header `t,<name>`, time column = index*dt, 17 significant digits.
std::string to_csv(const Signal& s, const std::string& name);

/// Multi-column variant: header `t,<names...>`, all signals conformable.
std::string to_csv(const std::vector<Signal>& columns,
                   const std::vector<std::string>& names);

Signal from_csv(const std::string& text);

}  // namespace spikeport
