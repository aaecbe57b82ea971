#pragma once

#include <Eigen/Core>
#include <functional>

#include "latthom/environment.hpp"
#include "latthom/field.hpp"
#include "latthom/potentials.hpp"

namespace latthom {

// Node-sampled body force with its dual-exponent metadata.
struct BodyForce {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
    double dual_exponent = 2.0;  // q/(q-1)

    static BodyForce zero(int n) {
        return {[n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n); }, 2.0};
    }
    static BodyForce constant(const Eigen::VectorXd& c) {
        return {[c](const Eigen::VectorXd&) { return c; }, 2.0};
    }
};

// Discrete directional derivative (u(z + eps y_b) - u(z + eps x_b)) / (eps |y_b - x_b|).
// For periodic fields the lookups wrap; the caller adds any affine part.
Eigen::VectorXd discrete_gradient(const Lattice& lattice, const Field& field, const Eigen::VectorXi& zcell, int b);

// eps^d sum over enumerated edges of V_b(lambda(z/eps, b); d_b u(z)), with
// compensated accumulation in the fixed lexicographic enumeration order.
// ZAnchored realizes the pair energy E_eps, EdgeContained realizes H_eps;
// the two differ only near the boundary.
double assemble_energy(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                       const Field& field, const Region& region, SumConvention convention);

// Exact gradient of assemble_energy with respect to free node values, in the
// field's node layout (n entries per node, zeros at fixed nodes).
std::vector<double> energy_gradient(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                    const Field& field, const Region& region, SumConvention convention);

// F_eps(u) = eps^d sum over nodes x of eps L cap A of f(x) . u(x).
double body_force_functional(const Lattice& lattice, const BodyForce& force, const Field& field, const Region& region);

}  // namespace latthom
