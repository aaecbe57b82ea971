#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

#include "latthom/energy.hpp"

namespace latthom {

struct SolverConfig {
    enum class Method { Auto, ConjugateGradient, Lbfgs, CoordinateDescent };
    Method method = Method::Auto;
    double tolerance = 1e-8;       // gradient-norm threshold, relative to the start
    long max_iterations = 200000;
    int multistart = 8;            // descent starts: canonical start + seeded perturbations
    double backtrack_factor = 0.5;
    double sufficient_decrease = 1e-4;
    double start_amplitude = -1.0;  // < 0: default 0.5 * (1 + |F|)
    std::uint64_t seed = 0;
    int threads = 1;
    std::function<void(long, double, double)> trace;  // (iteration, objective, gradient norm)
};

struct SolveResult {
    double value = 0.0;
    Eigen::VectorXd minimizer;  // DOF vector; expand with CellProblem::extract_field
    long iterations = 0;
    double grad_norm = 0.0;
    int best_start = 0;
    bool converged = false;
};

// Unconstrained objective over free degrees of freedom. Implementations must
// evaluate deterministically (fixed term order).
class Objective {
public:
    virtual ~Objective() = default;
    virtual int num_dof() const = 0;
    virtual int components() const = 0;  // vector components per node slot
    virtual double eval(const Eigen::VectorXd& x) const = 0;
    virtual void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const = 0;
    virtual Eigen::VectorXd start() const = 0;
    virtual bool quadratic() const = 0;
    virtual bool differentiable() const { return true; }
    virtual void jacobi_diagonal(Eigen::VectorXd& diag) const;
    // Removes the translation null space (periodic mean-zero gauge); no-op by default.
    virtual void project_null_space(Eigen::VectorXd&) const {}
    virtual bool has_null_space() const { return false; }
    // Dense assembly E(x) = x'Ax/2 + b'x + c for quadratic objectives.
    virtual void assemble_dense(Eigen::MatrixXd& A, Eigen::VectorXd& b) const;
    virtual double start_amplitude_scale() const { return 1.0; }
};

enum class PeriodicGauge {
    Auto,      // mean-zero for quadratic problems, pinned node otherwise
    MeanZero,  // iterates projected to zero mean per component
    Pin,       // q_1-node of cell 0 fixed to zero
};

// A constrained discrete lattice energy reduced to an Objective. Terms are
// baked in the canonical enumeration order.
class CellProblem final : public Objective {
public:
    // Dirichlet data g fixed outside (region)_{-eps R}; DOFs are the total
    // node values at free nodes. An optional body force turns the energy into
    // J = H - F; `convention` selects the E_eps or H_eps edge set.
    static CellProblem dirichlet(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                 const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g, const Region& region,
                                 int eps_den, SumConvention convention = SumConvention::ZAnchored,
                                 const BodyForce* force = nullptr);

    // k Z^d-periodic corrector phi for the affine map g_F; the affine part is
    // never wrapped, only phi is. DOFs are the corrector values on [0,k)^d.
    static CellProblem periodic(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                const Eigen::MatrixXd& F, int k, PeriodicGauge gauge = PeriodicGauge::Auto);

    int num_dof() const override { return num_dof_; }
    int components() const override { return n_; }
    bool quadratic() const override { return potential_.is_quadratic(); }
    bool differentiable() const override { return potential_.has_gradient(); }
    bool has_null_space() const override { return mean_zero_; }

    double eval(const Eigen::VectorXd& x) const override;
    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override;
    Eigen::VectorXd start() const override { return start_; }
    void jacobi_diagonal(Eigen::VectorXd& diag) const override;
    void project_null_space(Eigen::VectorXd& v) const override;
    void assemble_dense(Eigen::MatrixXd& A, Eigen::VectorXd& b) const override;
    double start_amplitude_scale() const override { return amplitude_scale_; }

    // Rebuilds the full field: total values for Dirichlet problems, the
    // corrector on the periodic fundamental domain otherwise. Fixed nodes are
    // bit-identical to the input data.
    Field extract_field(const Eigen::VectorXd& x) const;
    // Corrector DOF vector matching this problem's layout, built from a field
    // (used to seed periodic solves with Dirichlet minimizers).
    Eigen::VectorXd dofs_from_field(const Field& field) const;

private:
    struct Term {
        std::int32_t dof_a = -1, dof_b = -1;  // node-slot indices, -1 = fixed
        std::int32_t b = 0;
        double lambda = 0.0;
        double inv_len = 0.0;  // 1 / (eps |y_b - x_b|)
    };

    PotentialSpec potential_;
    int n_ = 1;
    int num_slots_ = 0;  // free node slots; num_dof = slots * n
    int num_dof_ = 0;
    double eps_d_ = 1.0;
    bool periodic_ = false;
    bool mean_zero_ = false;
    double amplitude_scale_ = 1.0;
    std::vector<Term> terms_;
    std::vector<double> base_;    // terms * n: fixed/affine part of each difference quotient
    std::vector<double> linear_;  // body-force linear term (per dof)
    double linear_const_ = 0.0;
    Eigen::VectorXd start_;
    Field template_field_;
    std::vector<std::int64_t> slot_to_node_;
};

// Quadratic path: Jacobi-preconditioned conjugate gradient, translation null
// space removed by mean-zero projection. General path: best of `multistart`
// L-BFGS descents with backtracking line search (the reported value is an
// upper bound on the infimum); potentials without analytic gradients fall
// back to derivative-free coordinate descent. Errors: NoConvergence when the
// iteration cap is hit (CG) or no descent start converges; NullSpace when the
// quadratic form is singular beyond translations.
SolveResult minimize(const Objective& problem, const SolverConfig& config,
                     const std::vector<Eigen::VectorXd>& extra_starts = {});

// Assembles the full stiffness matrix and solves by dense factorization;
// ground truth for CG. Quadratic objectives with at most 4096 unknowns.
SolveResult oracle_dense(const Objective& problem);

struct GridSpec {
    int points_per_dim = 21;  // <= 41
    double halfwidth = 2.0;   // scan [start - h, start + h] per unknown
};

// Exhaustive tensor-grid search plus local polish; ground truth for tiny
// nonconvex instances (scalar objectives, <= 6 unknowns).
SolveResult oracle_grid(const Objective& problem, const GridSpec& grid, const SolverConfig& config);

}  // namespace latthom
