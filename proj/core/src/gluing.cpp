#include "latthom/gluing.hpp"

#include <algorithm>
#include <cmath>

namespace latthom {

namespace {

// phi^k as a function of the face distance: 0 below the A^{k+1}_- level,
// 1 above the A^k_+ level, linear between.
double cutoff_value(double dist, double delta, int m, int k) {
    const double lo = delta * (2.0 * m - k - 0.75) / (2.0 * m);
    const double hi = delta * (2.0 * m - k - 0.25) / (2.0 * m);
    if (dist <= lo) return 0.0;
    if (dist >= hi) return 1.0;
    return (dist - lo) / (hi - lo);
}

std::pair<Field, GlueReport> glue_common(const Lattice& lattice, const Weights& weights,
                                         const PotentialSpec& potential, const Field& u_eps,
                                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                         const Region& A, const GlueParams& params, bool truncate) {
    params.check(A);
    const int eps_den = u_eps.eps_den();
    const double eps_R = lattice.range() / static_cast<double>(eps_den);
    if (params.delta / (8.0 * params.m) < 2.0 * eps_R)
        throw config_error("LayersTooThin", "layer separation delta/(8m) must be at least 2 eps R");
    if (truncate && u_eps.n() != 1)
        throw config_error("NotScalar", "the truncation construction is scalar only");

    const int n = u_eps.n();
    // Perturbation w = u_eps - u_bar, clamped at +-s for the truncation path.
    Field ubar_field = u_eps;
    sample_onto_field(lattice, ubar_field, u_bar);
    Field w_field = u_eps;
    long clamp_active = 0, nodes_in_A = 0;
    w_field.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
        double* w = w_field.value(node);
        const double* ub = ubar_field.value(node);
        bool clamped = false;
        for (int c = 0; c < n; ++c) {
            w[c] -= ub[c];
            if (truncate) {
                if (w[c] > params.s) {
                    w[c] = params.s;
                    clamped = true;
                } else if (w[c] < -params.s) {
                    w[c] = -params.s;
                    clamped = true;
                }
            }
        }
        const Eigen::VectorXd pos = lattice.node_position(eps_den, cell, off);
        if (A.contains(pos)) {
            ++nodes_in_A;
            if (clamped) ++clamp_active;
        }
    });
    const double clamp_fraction = nodes_in_A > 0 ? static_cast<double>(clamp_active) / nodes_in_A : 0.0;

    GlueReport report;
    report.original_energy = assemble_energy(lattice, weights, potential, u_eps, A, SumConvention::ZAnchored);

    Field best;
    Field candidate = u_eps;
    for (int k = 0; k < params.m; ++k) {
        candidate.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
            const Eigen::VectorXd pos = lattice.node_position(eps_den, cell, off);
            const double phi = cutoff_value(A.boundary_distance(pos), params.delta, params.m, k);
            double* v = candidate.value(node);
            const double* ub = ubar_field.value(node);
            const double* w = w_field.value(node);
            for (int c = 0; c < n; ++c) v[c] = ub[c] + phi * w[c];
        });
        GlueCandidate entry;
        entry.k = k;
        entry.energy = assemble_energy(lattice, weights, potential, candidate, A, SumConvention::ZAnchored);
        entry.clamp_active_fraction = clamp_fraction;
        long changed = 0;
        candidate.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) {
            const double* v = candidate.value(node);
            const double* u = u_eps.value(node);
            for (int c = 0; c < n; ++c) {
                if (v[c] != u[c]) {
                    ++changed;
                    break;
                }
            }
        });
        entry.boundary_nodes_changed = changed;
        report.candidates.push_back(entry);
        if (report.candidates.size() == 1 || entry.energy < report.chosen_energy) {
            report.chosen_k = k;
            report.chosen_energy = entry.energy;
            best = candidate;
        }
    }
    return {std::move(best), std::move(report)};
}

}  // namespace

std::pair<Field, GlueReport> glue_cutoff(const Lattice& lattice, const Weights& weights,
                                         const PotentialSpec& potential, const Field& u_eps,
                                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                         const Region& A, const GlueParams& params) {
    return glue_common(lattice, weights, potential, u_eps, u_bar, A, params, false);
}

std::pair<Field, GlueReport> glue_truncate(const Lattice& lattice, const Weights& weights,
                                           const PotentialSpec& potential, const Field& u_eps,
                                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                           const Region& A, const GlueParams& params) {
    return glue_common(lattice, weights, potential, u_eps, u_bar, A, params, true);
}

TruncFactorReport truncation_factor_check(const Lattice& lattice, const Field& u_eps,
                                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                          double s, const Region& A) {
    if (u_eps.n() != 1) throw config_error("NotScalar", "the truncation factor check is scalar only");
    Field ubar_field = u_eps;
    sample_onto_field(lattice, ubar_field, u_bar);
    Field w_field = u_eps;
    w_field.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) {
        double* w = w_field.value(node);
        w[0] = std::clamp(w[0] - ubar_field.value(node)[0], -s, s);
    });

    TruncFactorReport report;
    lattice.for_each_edge(u_eps.eps_den(), A, SumConvention::ZAnchored, [&](const Eigen::VectorXi& z, int b) {
        const double du = discrete_gradient(lattice, u_eps, z, b)[0] - discrete_gradient(lattice, ubar_field, z, b)[0];
        const double dw = discrete_gradient(lattice, w_field, z, b)[0];
        // Differences at round-off level carry no factor information.
        if (std::abs(du) <= 1e-7) {
            if (std::abs(dw) > std::abs(du) + 1e-7) report.ok = false;
            return;
        }
        const double t = dw / du;
        report.min_t = std::min(report.min_t, t);
        report.max_t = std::max(report.max_t, t);
        if (t < -1e-6 || t > 1.0 + 1e-6) report.ok = false;
    });
    if (report.max_t < report.min_t) {  // no informative edges
        report.min_t = 0.0;
        report.max_t = 1.0;
    }
    return report;
}

}  // namespace latthom
