#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>

#include "latthom/energy.hpp"
#include "latthom/homogenize.hpp"

namespace test_support {

using namespace latthom;

inline Lattice zd_nn(int d = 2, int n = 1) { return Lattice::validate(lattice_preset("zd-nn", d, n)); }

inline std::shared_ptr<const EnvironmentSpec> env_spec(Distribution dist, CorrelationMode mode, std::uint64_t seed) {
    EnvironmentSpec spec;
    spec.distributions = {std::move(dist)};
    spec.mode = mode;
    spec.seed = seed;
    return std::make_shared<const EnvironmentSpec>(std::move(spec));
}

inline EnvironmentSample constant_env(double value) {
    return EnvironmentSample(env_spec(Distribution::constant(value), CorrelationMode::IidPerEdge, 0), 0);
}

// Fills every stored node with deterministic pseudo-random values.
inline void randomize_field(Field& field, std::uint64_t seed, double amplitude = 1.0) {
    CounterRng rng(seed);
    for (double& v : field.raw_values()) v = amplitude * (2.0 * rng.uniform() - 1.0);
}

inline Eigen::VectorXd const_vec(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

// Independent long-double recomputation of the pair energy: fresh enumeration,
// fresh weight lookups, no compensated tricks shared with the implementation.
inline long double brute_force_energy(const Lattice& lattice, const Weights& weights, const PotentialSpec& pot,
                                      const Field& field, const Region& region, SumConvention conv) {
    long double acc = 0.0L;
    auto edges = lattice.edges_in_region(field.eps_den(), region, conv);
    for (const auto& inst : edges) {
        const EdgeOffset& e = lattice.edge(inst.b);
        const Eigen::VectorXd tail = field.value_vec(inst.cell, e.x_offset);
        const Eigen::VectorXd head = field.value_vec(Eigen::VectorXi(inst.cell + e.y_shift), e.y_offset);
        Eigen::VectorXd r = (head - tail) / (field.eps() * e.length);
        acc += static_cast<long double>(pot.eval(weights(inst.cell, inst.b), r));
    }
    long double eps_d = 1.0L;
    for (int i = 0; i < lattice.d(); ++i) eps_d /= static_cast<long double>(field.eps_den());
    return eps_d * acc;
}

// Central finite differences of an objective; the derivative oracle.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (int i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace test_support
