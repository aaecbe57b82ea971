#include "latthom/energy.hpp"

#include <cmath>

#include "latthom/common.hpp"

namespace latthom {

Eigen::VectorXd discrete_gradient(const Lattice& lattice, const Field& field, const Eigen::VectorXi& zcell, int b) {
    const EdgeOffset& e = lattice.edge(b);
    const Eigen::VectorXi head_cell = zcell + e.y_shift;
    if (!field.in_window(zcell) || !field.in_window(head_cell))
        throw numerical_error("OutOfHalo", "discrete derivative touches nodes outside the halo");
    const double* tail = field.value(field.node_index(zcell, e.x_offset));
    const double* head = field.value(field.node_index(head_cell, e.y_offset));
    const double inv = 1.0 / (field.eps() * e.length);
    Eigen::VectorXd r(field.n());
    for (int c = 0; c < field.n(); ++c) r[c] = (head[c] - tail[c]) * inv;
    return r;
}

double assemble_energy(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                       const Field& field, const Region& region, SumConvention convention) {
    if (potential.scalar_only() && field.n() != 1)
        throw config_error("NotScalar", "scalar potential family used with a vector field");
    const int n = field.n();
    const double inv_eps = static_cast<double>(field.eps_den());
    KahanSum sum;
    Eigen::VectorXd r(n);
    lattice.for_each_edge(field.eps_den(), region, convention, [&](const Eigen::VectorXi& z, int b) {
        const EdgeOffset& e = lattice.edge(b);
        const Eigen::VectorXi head_cell = z + e.y_shift;
        const double* tail = field.value(field.node_index(z, e.x_offset));
        const double* head = field.value(field.node_index(head_cell, e.y_offset));
        const double inv = inv_eps / e.length;
        for (int c = 0; c < n; ++c) r[c] = (head[c] - tail[c]) * inv;
        const double lam = weights(z, b);
        sum.add(n == 1 ? potential.eval1(lam, r[0]) : potential.eval(lam, r));
    });
    return std::pow(field.eps(), field.d()) * sum.value();
}

std::vector<double> energy_gradient(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                    const Field& field, const Region& region, SumConvention convention) {
    if (!potential.has_gradient())
        throw numerical_error("NoGradient", "analytic gradients exist for the built-in families only");
    const int n = field.n();
    const double inv_eps = static_cast<double>(field.eps_den());
    const double eps_d = std::pow(field.eps(), field.d());
    std::vector<double> grad(static_cast<std::size_t>(field.num_nodes()) * n, 0.0);
    Eigen::VectorXd r(n);
    lattice.for_each_edge(field.eps_den(), region, convention, [&](const Eigen::VectorXi& z, int b) {
        const EdgeOffset& e = lattice.edge(b);
        const Eigen::VectorXi head_cell = z + e.y_shift;
        const std::int64_t tail_node = field.node_index(z, e.x_offset);
        const std::int64_t head_node = field.node_index(head_cell, e.y_offset);
        const double* tail = field.value(tail_node);
        const double* head = field.value(head_node);
        const double inv = inv_eps / e.length;
        for (int c = 0; c < n; ++c) r[c] = (head[c] - tail[c]) * inv;
        const double lam = weights(z, b);
        const double scale = eps_d * inv;
        if (n == 1) {
            const double dv = potential.grad1(lam, r[0]) * scale;
            if (field.is_free(head_node)) grad[static_cast<std::size_t>(head_node)] += dv;
            if (field.is_free(tail_node)) grad[static_cast<std::size_t>(tail_node)] -= dv;
        } else {
            const Eigen::VectorXd dv = potential.grad(lam, r);
            if (field.is_free(head_node))
                for (int c = 0; c < n; ++c) grad[static_cast<std::size_t>(head_node) * n + c] += dv[c] * scale;
            if (field.is_free(tail_node))
                for (int c = 0; c < n; ++c) grad[static_cast<std::size_t>(tail_node) * n + c] -= dv[c] * scale;
        }
    });
    return grad;
}

double body_force_functional(const Lattice& lattice, const BodyForce& force, const Field& field, const Region& region) {
    KahanSum sum;
    lattice.for_each_node(field.eps_den(), region, [&](const Eigen::VectorXi& cell, int off) {
        const Eigen::VectorXd pos = lattice.node_position(field.eps_den(), cell, off);
        const Eigen::VectorXd fv = force.f(pos);
        const double* u = field.value(field.node_index(cell, off));
        double dot = 0.0;
        for (int c = 0; c < field.n(); ++c) dot += fv[c] * u[c];
        sum.add(dot);
    });
    return std::pow(field.eps(), field.d()) * sum.value();
}

}  // namespace latthom
