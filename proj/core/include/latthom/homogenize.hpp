#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "latthom/solver.hpp"

namespace latthom {

struct CellProblemResult {
    Eigen::MatrixXd F;
    int k = 0;           // periodic cell count, 0 for Dirichlet regions
    double value = 0.0;  // energy per unit volume
    double total = 0.0;  // raw energy
    SolveResult solve;
};

// Dirichlet cell problem m_F(A): minimize E_1(g_F + phi, A) over correctors
// vanishing outside (A)_{-R}. The region must be an integer box (scale-1
// convention); `value` is m_F / |A|, `total` the raw infimum value.
CellProblemResult cell_mF(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                          const Eigen::MatrixXd& F, const Region& region, const SolverConfig& config);

// Periodic cell problem W_hom^(k) = k^{-d} inf E_1(g_F + phi, kY) over
// k Z^d-periodic correctors; the affine part is evaluated exactly, only phi
// wraps. Extra starts seed the descent (nonconvex sandwich checks pass the
// periodized Dirichlet minimizer here).
CellProblemResult whom_k(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                         const Eigen::MatrixXd& F, int k, const SolverConfig& config,
                         const std::vector<Eigen::VectorXd>& extra_starts = {});

struct WhomSampleRecord {
    int k = 0;
    long sample = 0;
    double value = 0.0;      // W_hom^(k) for this sample
    double m_f_value = 0.0;  // m_F(kY) / k^d for the same sample
    bool sandwich_ok = true;
    long iterations = 0;
};

struct WhomEstimate {
    Eigen::MatrixXd F;
    std::vector<int> k_schedule;
    std::vector<double> mean, standard_error;
    long samples_per_k = 0;
    double estimate = 0.0;     // mean at the largest k
    double uncertainty = 0.0;  // max(SE, last doubling increment)
    bool upper_bound_only = false;  // nonconvex potentials: solver reports upper bounds
    std::vector<WhomSampleRecord> records;
};

struct EstimateOptions {
    bool with_sandwich = true;  // also solve m_F(kY) per sample and record the comparison
    int threads = 1;
    double sandwich_slack = 2e-8;
};

// Monte Carlo means of whom_k along the k-schedule; the W0 estimate is the
// largest-k mean, its uncertainty the larger of the Monte Carlo error and the
// last increment between consecutive schedule entries.
WhomEstimate estimate_W0(const Lattice& lattice, const EnvironmentSpec& env, const PotentialSpec& potential,
                         const Eigen::MatrixXd& F, const std::vector<int>& k_schedule, long samples_per_k,
                         const SolverConfig& config, const EstimateOptions& opts = {});

struct GrowthCertificate {
    double estimate = 0.0;
    double upper_envelope = 0.0;  // sum_b c1 (1 + E-hat[lambda_b] (|F|^p + 1))
    bool upper_ok = false;
    bool positive_ok = false;  // estimate > 0 for F != 0
};

// Checks the W0 estimate against the explicit moment envelope; throws
// BoundViolated when it fails (a solver or sampling bug, not a math event).
GrowthCertificate growth_bounds_check(const WhomEstimate& estimate, const std::vector<double>& lambda_means, double p,
                                      double c1, bool throw_on_violation = true);

struct HomTensor {
    Eigen::MatrixXd L;            // symmetric (n d) x (n d); W(F) = F:L:F / 2
    Eigen::VectorXd eigenvalues;  // ascending
    double min_eigenvalue = 0.0;
    int k = 0;
    long samples = 0;
};

// Quadratic homogenized tensor by polarization: L[a][a] = 2 W(E_a) and
// L[a][b] = W(E_a + E_b) - W(E_a) - W(E_b) on the canonical basis of R^{n x d}
// (index a = component * d + direction), eigendecomposed for the ellipticity
// certificate.
HomTensor extract_tensor(const Lattice& lattice, const EnvironmentSpec& env, const PotentialSpec& potential, int k,
                         long samples, const SolverConfig& config, int threads = 1);

struct GammaGapRow {
    int eps_den = 0;
    double min_J_eps = 0.0;
    double min_J_hom = 0.0;
    double gap = 0.0;
};

// Minimum of J_eps = H_eps - F_eps over A^eps_g(A) along the eps schedule,
// against the constant-coefficient reference u -> eps^d sum_z Du:L:Du/2 -
// F_eps(u) discretized at the finest eps with the same Dirichlet machinery.
// Requires a lattice with unit edges (the reference uses axis differences).
std::vector<GammaGapRow> gamma_gap_experiment(const Lattice& lattice, const Weights& weights,
                                              const PotentialSpec& potential,
                                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                              const BodyForce& force, const Region& A,
                                              const std::vector<int>& eps_schedule, const HomTensor& tensor,
                                              const SolverConfig& config);

// Closed forms for the layered quadratic medium (weights depending on
// z . e_1 only): harmonic mean along e_1, arithmetic mean transverse, and the
// explicit p != 2 competitor bound along e_1.
double layered_value_e1(const std::vector<double>& layer_weights, double ell, double p);
double layered_value_transverse(const std::vector<double>& layer_weights, double ell);

// Reads the k layer weights omega(0..k-1) of a layered environment.
std::vector<double> read_layer_weights(const Lattice& lattice, const Weights& weights, int k);

}  // namespace latthom
