#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "latthom/energy.hpp"

namespace latthom {

struct GlueParams {
    double delta = 0.25;  // boundary-layer width
    int m = 2;            // layer count; candidates k = 0..m-1
    double s = 1.0;       // value-truncation level (glue_truncate)

    void check(const Region& region) const {
        if (m < 1) throw config_error("ConfigInvalid", "layer count m must be at least 1");
        if (!(delta > 0.0) || !(2.0 * delta < region.min_side()))
            throw config_error("ConfigInvalid", "delta must be positive and leave (A)_{-delta} nonempty");
        if (!(s > 0.0)) throw config_error("ConfigInvalid", "truncation level s must be positive");
    }
};

struct GlueCandidate {
    int k = 0;
    double energy = 0.0;
    long boundary_nodes_changed = 0;      // nodes where the candidate differs from u_eps
    double clamp_active_fraction = 0.0;   // share of nodes in A where the clamp bites
};

struct GlueReport {
    std::vector<GlueCandidate> candidates;
    int chosen_k = 0;
    double original_energy = 0.0;  // E_eps(u_eps, A)
    double chosen_energy = 0.0;
};

// Gluing I (cutoff averaging): layers A^k = {dist(x, dA) > delta (2m-k)/(2m)},
// piecewise-linear cutoffs phi^k ramping between the A^k_- and A^k_+ levels
// (Lipschitz constant 4m/delta <= 8m/delta), candidates
// u^k = u_bar + phi^k (u_eps - u_bar); returns the least-energy candidate
// (ties: smallest k). Enforces the layer separation delta/(8m) >= 2 eps R.
std::pair<Field, GlueReport> glue_cutoff(const Lattice& lattice, const Weights& weights,
                                         const PotentialSpec& potential, const Field& u_eps,
                                         const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                         const Region& A, const GlueParams& params);

// Gluing II (truncation, scalar): w = clamp(u_eps - u_bar, -s, s), candidates
// u^k = u_bar + phi^k w. The report carries the clamp activity fraction.
std::pair<Field, GlueReport> glue_truncate(const Lattice& lattice, const Weights& weights,
                                           const PotentialSpec& potential, const Field& u_eps,
                                           const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                           const Region& A, const GlueParams& params);

struct TruncFactorReport {
    bool ok = true;
    double min_t = 1.0, max_t = 0.0;
};

// Per-edge factor of the truncation: d_b w(z) = t (d_b u(z) - d_b u_bar(z))
// with t in [0,1] for every edge instance in the region.
TruncFactorReport truncation_factor_check(const Lattice& lattice, const Field& u_eps,
                                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_bar,
                                          double s, const Region& A);

}  // namespace latthom
