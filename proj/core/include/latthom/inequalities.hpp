#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "latthom/energy.hpp"

namespace latthom {

struct SumintResult {
    double integral_lhs = 0.0;  // nodal quadrature of |grad u|^q over (A)_{-eps R}
    double discrete_rhs = 0.0;  // eps^d sum over anchors in A, nn edges, of |d_b u|^q
    double ratio = 0.0;         // suite maxima estimate the constant c_0
};

// Discrete/continuum norm comparison: the per-cell gradient is the least
// squares fit of the nn directional derivatives.
SumintResult sumint_check(const Lattice& lattice, const Field& field, const Region& region, double q);

struct PoincareEntry {
    int eps_den = 1;
    double lhs = 0.0;
    double rhs_without_C = 0.0;
    double implied_C = 0.0;
    double m_alpha = 0.0;  // weight moment factor over Q
    double m_beta = 0.0;   // inverse-weight moment factor over (Q)_{eps R}
};

// Weighted Poincare inequality on a cube Q: LHS is the weighted nodal
// L^q-mean oscillation, the RHS factor |Q|^{1/d} m_alpha^{1/q} m_beta^{1/p}
// (weighted gradient sum)^{1/p}. Exponents must satisfy alpha > 1 and
// (1 - 1/alpha)/q >= (1 + 1/beta)/p - 1/d; alpha or beta may be infinite
// (bounded-weight mode, empirical sups). Throws ExponentViolation otherwise.
PoincareEntry poincare_check(const Lattice& lattice, const Weights& weights, const Field& field, const Region& Q,
                             double p, double q, double alpha, double beta);

struct CoercivityResult {
    bool ok = true;
    double lhs = 0.0, rhs = 0.0;
};

// Exact Hoelder structure with constant 1:
// (eps^d sum |d u|^{bp/(b+1)})^{(b+1)/b} <= (eps^d sum lambda^{-b})^{1/b} (eps^d sum lambda |d u|^p).
// A failure beyond round-off signals an arithmetic bug, not a math event.
CoercivityResult coercivity_diagnostic(const Lattice& lattice, const Weights& weights, const Field& field,
                                       const Region& region, double p, double beta);

// An undirected hyper-cubic edge [z, z + e_axis].
struct GridEdge {
    Eigen::VectorXi z;
    int axis = 0;
};

using Path = std::vector<GridEdge>;

// The canonical family of 2d pairwise edge-disjoint paths connecting z and
// z + e_i inside B_4(z): the direct edge, two 3-edge staples through +-e_j
// for every j != i, and one 9-edge loop exiting through -e_i.
std::vector<Path> canonical_path_family(int d, int i, const Eigen::VectorXi& z);

struct PathWeight {
    Eigen::VectorXi z;
    int direction = 0;
    std::vector<Path> paths;
    double mu = 0.0;
    int min_index = 0;  // minimizing path
};

// mu(omega; e)^{-p/(p-1)} = min over the family of sum_b omega(b)^{-1/(p-1)}.
// Requires the hyper-cubic nearest-neighbour lattice.
PathWeight iid_mu(const Lattice& lattice, const Weights& weights, const Eigen::VectorXi& z, int direction, double p);

struct MuEdgeCheckResult {
    bool ok = true;
    long edges_checked = 0;
    double worst_slack = 0.0;  // min over edges of rhs - lhs
};

// Per-edge bound with constant exactly 1: |grad v(e)| <= mu(e)^{-1}
// (sum over the minimizing path of omega(b) |grad v(b)|^p)^{1/p}.
MuEdgeCheckResult mu_edge_inequality_check(const Lattice& lattice, const Weights& weights, const Field& field,
                                           const Region& region, double p);

struct MuMomentEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    long samples = 0;
    bool heavy_tail = false;  // wide confidence interval flag
};

// Monte Carlo estimate of E[mu^{-beta p}]; requires gamma > 1/(2d(p-1)) and
// 1/(p-1) <= beta < 2 d gamma (HypothesisViolation otherwise).
MuMomentEstimate mu_moment_estimate(const Lattice& lattice, const EnvironmentSpec& env, double p, double beta,
                                    double gamma, long n_samples, int threads = 1);

}  // namespace latthom
