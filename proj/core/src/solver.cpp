#include "latthom/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "latthom/common.hpp"

namespace latthom {

void Objective::jacobi_diagonal(Eigen::VectorXd& diag) const { diag = Eigen::VectorXd::Ones(num_dof()); }

void Objective::assemble_dense(Eigen::MatrixXd&, Eigen::VectorXd&) const {
    throw numerical_error("NotQuadratic", "dense assembly is defined for quadratic objectives only");
}

// ---------------------------------------------------------------------------
// CellProblem assembly

CellProblem CellProblem::dirichlet(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                   const Region& region, int eps_den, SumConvention convention,
                                   const BodyForce* force) {
    if (potential.scalar_only() && lattice.n() != 1)
        throw config_error("NotScalar", "scalar potential family used with a vector-valued lattice");
    CellProblem prob;
    prob.potential_ = potential;
    prob.n_ = lattice.n();
    prob.eps_d_ = std::pow(1.0 / static_cast<double>(eps_den), lattice.d());

    Field field = Field::over_region(lattice, eps_den, region);
    sample_onto_field(lattice, field, g);
    mark_dirichlet_free_nodes(lattice, field, region);

    const int n = prob.n_;
    std::vector<std::int32_t> node_slot(static_cast<std::size_t>(field.num_nodes()), -1);
    field.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) {
        if (field.is_free(node)) {
            node_slot[static_cast<std::size_t>(node)] = prob.num_slots_;
            prob.slot_to_node_.push_back(node);
            ++prob.num_slots_;
        }
    });
    prob.num_dof_ = prob.num_slots_ * n;

    prob.start_.resize(prob.num_dof_);
    for (int s = 0; s < prob.num_slots_; ++s) {
        const double* v = field.value(prob.slot_to_node_[static_cast<std::size_t>(s)]);
        for (int c = 0; c < n; ++c) prob.start_[s * n + c] = v[c];
    }

    const double inv_eps = static_cast<double>(eps_den);
    KahanSum rscale;
    std::int64_t nterms = 0;
    lattice.for_each_edge(eps_den, region, convention, [&](const Eigen::VectorXi& z, int b) {
        const EdgeOffset& e = lattice.edge(b);
        const std::int64_t tail = field.node_index(z, e.x_offset);
        const std::int64_t head = field.node_index(z + e.y_shift, e.y_offset);
        Term t;
        t.b = b;
        t.lambda = weights(z, b);
        t.inv_len = inv_eps / e.length;
        t.dof_a = node_slot[static_cast<std::size_t>(tail)];
        t.dof_b = node_slot[static_cast<std::size_t>(head)];
        const double* tv = field.value(tail);
        const double* hv = field.value(head);
        double rr = 0.0;
        for (int c = 0; c < n; ++c) {
            const double base =
                t.inv_len * ((t.dof_b < 0 ? hv[c] : 0.0) - (t.dof_a < 0 ? tv[c] : 0.0));
            prob.base_.push_back(base);
            const double full = t.inv_len * (hv[c] - tv[c]);
            rr += full * full;
        }
        rscale.add(std::sqrt(rr));
        prob.terms_.push_back(t);
        ++nterms;
    });
    prob.amplitude_scale_ = 1.0 + (nterms > 0 ? rscale.value() / static_cast<double>(nterms) : 0.0);

    if (force != nullptr) {
        prob.linear_.assign(static_cast<std::size_t>(prob.num_dof_), 0.0);
        KahanSum fixed_part;
        lattice.for_each_node(eps_den, region, [&](const Eigen::VectorXi& cell, int off) {
            const std::int64_t node = field.node_index(cell, off);
            const Eigen::VectorXd pos = lattice.node_position(eps_den, cell, off);
            const Eigen::VectorXd fv = force->f(pos);
            const std::int32_t slot = node_slot[static_cast<std::size_t>(node)];
            if (slot >= 0) {
                for (int c = 0; c < n; ++c) prob.linear_[static_cast<std::size_t>(slot) * n + c] += prob.eps_d_ * fv[c];
            } else {
                const double* v = field.value(node);
                double dot = 0.0;
                for (int c = 0; c < n; ++c) dot += fv[c] * v[c];
                fixed_part.add(prob.eps_d_ * dot);
            }
        });
        prob.linear_const_ = fixed_part.value();
    }

    prob.template_field_ = std::move(field);
    return prob;
}

CellProblem CellProblem::periodic(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                                  const Eigen::MatrixXd& F, int k, PeriodicGauge gauge) {
    if (k < 1) throw config_error("ConfigInvalid", "periodic cell count k must be positive");
    if (potential.scalar_only() && lattice.n() != 1)
        throw config_error("NotScalar", "scalar potential family used with a vector-valued lattice");
    if (F.rows() != lattice.n() || F.cols() != lattice.d())
        throw config_error("ConfigInvalid", "F must be an n x d matrix");

    CellProblem prob;
    prob.potential_ = potential;
    prob.n_ = lattice.n();
    prob.eps_d_ = 1.0;
    prob.periodic_ = true;
    if (gauge == PeriodicGauge::Auto)
        gauge = potential.is_quadratic() ? PeriodicGauge::MeanZero : PeriodicGauge::Pin;
    prob.mean_zero_ = (gauge == PeriodicGauge::MeanZero);
    prob.amplitude_scale_ = 1.0 + F.norm();

    Field field = Field::periodic(lattice, k);
    const int n = prob.n_;
    std::vector<std::int32_t> node_slot(static_cast<std::size_t>(field.num_nodes()), -1);
    field.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) {
        const bool pinned = (gauge == PeriodicGauge::Pin) && node == 0;
        field.set_free(node, !pinned);
        if (!pinned) {
            node_slot[static_cast<std::size_t>(node)] = prob.num_slots_;
            prob.slot_to_node_.push_back(node);
            ++prob.num_slots_;
        }
    });
    prob.num_dof_ = prob.num_slots_ * n;
    prob.start_ = Eigen::VectorXd::Zero(prob.num_dof_);

    const Region cell_region = Region::cube(lattice.d(), 0.0, static_cast<double>(k));
    lattice.for_each_edge(1, cell_region, SumConvention::ZAnchored, [&](const Eigen::VectorXi& z, int b) {
        const EdgeOffset& e = lattice.edge(b);
        Term t;
        t.b = b;
        t.lambda = weights(z, b);
        t.inv_len = 1.0 / e.length;
        t.dof_a = node_slot[static_cast<std::size_t>(field.node_index(z, e.x_offset))];
        t.dof_b = node_slot[static_cast<std::size_t>(field.node_index(z + e.y_shift, e.y_offset))];
        // The affine part F e_b is exact and never wrapped.
        const Eigen::VectorXd base = F * e.dir;
        for (int c = 0; c < n; ++c) prob.base_.push_back(base[c]);
        prob.terms_.push_back(t);
    });

    prob.template_field_ = std::move(field);
    return prob;
}

double CellProblem::eval(const Eigen::VectorXd& x) const {
    const int n = n_;
    KahanSum sum;
    Eigen::VectorXd r(n);
    const double* bp = base_.data();
    for (std::size_t ti = 0; ti < terms_.size(); ++ti, bp += n) {
        const Term& t = terms_[ti];
        for (int c = 0; c < n; ++c) {
            double diff = 0.0;
            if (t.dof_b >= 0) diff += x[t.dof_b * n + c];
            if (t.dof_a >= 0) diff -= x[t.dof_a * n + c];
            r[c] = bp[c] + t.inv_len * diff;
        }
        sum.add(n == 1 ? potential_.eval1(t.lambda, r[0]) : potential_.eval(t.lambda, r));
    }
    double e = eps_d_ * sum.value();
    if (!linear_.empty()) {
        KahanSum lin;
        for (int i = 0; i < num_dof_; ++i) lin.add(linear_[static_cast<std::size_t>(i)] * x[i]);
        e -= lin.value() + linear_const_;
    }
    return e;
}

void CellProblem::gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    const int n = n_;
    g.setZero(num_dof_);
    Eigen::VectorXd r(n);
    const double* bp = base_.data();
    for (std::size_t ti = 0; ti < terms_.size(); ++ti, bp += n) {
        const Term& t = terms_[ti];
        for (int c = 0; c < n; ++c) {
            double diff = 0.0;
            if (t.dof_b >= 0) diff += x[t.dof_b * n + c];
            if (t.dof_a >= 0) diff -= x[t.dof_a * n + c];
            r[c] = bp[c] + t.inv_len * diff;
        }
        const double scale = eps_d_ * t.inv_len;
        if (n == 1) {
            const double dv = potential_.grad1(t.lambda, r[0]) * scale;
            if (t.dof_b >= 0) g[t.dof_b] += dv;
            if (t.dof_a >= 0) g[t.dof_a] -= dv;
        } else {
            const Eigen::VectorXd dv = potential_.grad(t.lambda, r);
            if (t.dof_b >= 0)
                for (int c = 0; c < n; ++c) g[t.dof_b * n + c] += dv[c] * scale;
            if (t.dof_a >= 0)
                for (int c = 0; c < n; ++c) g[t.dof_a * n + c] -= dv[c] * scale;
        }
    }
    if (!linear_.empty())
        for (int i = 0; i < num_dof_; ++i) g[i] -= linear_[static_cast<std::size_t>(i)];
}

void CellProblem::jacobi_diagonal(Eigen::VectorXd& diag) const {
    diag.setZero(num_dof_);
    for (const Term& t : terms_) {
        const double w = 2.0 * t.lambda * t.inv_len * t.inv_len * eps_d_;
        for (int c = 0; c < n_; ++c) {
            if (t.dof_a >= 0) diag[t.dof_a * n_ + c] += w;
            if (t.dof_b >= 0) diag[t.dof_b * n_ + c] += w;
        }
    }
    for (int i = 0; i < num_dof_; ++i)
        if (diag[i] <= 0.0) diag[i] = 1.0;
}

void CellProblem::project_null_space(Eigen::VectorXd& v) const {
    if (!mean_zero_ || num_slots_ == 0) return;
    for (int c = 0; c < n_; ++c) {
        double mean = 0.0;
        for (int s = 0; s < num_slots_; ++s) mean += v[s * n_ + c];
        mean /= static_cast<double>(num_slots_);
        for (int s = 0; s < num_slots_; ++s) v[s * n_ + c] -= mean;
    }
}

void CellProblem::assemble_dense(Eigen::MatrixXd& A, Eigen::VectorXd& b) const {
    if (!quadratic()) throw numerical_error("NotQuadratic", "dense assembly needs a quadratic potential");
    A.setZero(num_dof_, num_dof_);
    for (const Term& t : terms_) {
        const double w = 2.0 * t.lambda * t.inv_len * t.inv_len * eps_d_;
        for (int c = 0; c < n_; ++c) {
            const int ia = t.dof_a >= 0 ? t.dof_a * n_ + c : -1;
            const int ib = t.dof_b >= 0 ? t.dof_b * n_ + c : -1;
            if (ia >= 0) A(ia, ia) += w;
            if (ib >= 0) A(ib, ib) += w;
            if (ia >= 0 && ib >= 0) {
                A(ia, ib) -= w;
                A(ib, ia) -= w;
            }
        }
    }
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(num_dof_);
    gradient(zero, b);
}

Field CellProblem::extract_field(const Eigen::VectorXd& x) const {
    Field out = template_field_;
    for (int s = 0; s < num_slots_; ++s) {
        double* v = out.value(slot_to_node_[static_cast<std::size_t>(s)]);
        for (int c = 0; c < n_; ++c) v[c] = x[s * n_ + c];
    }
    return out;
}

Eigen::VectorXd CellProblem::dofs_from_field(const Field& field) const {
    Eigen::VectorXd x(num_dof_);
    for (int s = 0; s < num_slots_; ++s) {
        const double* v = field.value(slot_to_node_[static_cast<std::size_t>(s)]);
        for (int c = 0; c < n_; ++c) x[s * n_ + c] = v[c];
    }
    if (periodic_ && !mean_zero_) {
        // Pin gauge: subtract the pinned node's value so the represented
        // function is the same corrector up to translation.
        const double* pin = field.value(0);
        for (int s = 0; s < num_slots_; ++s)
            for (int c = 0; c < n_; ++c) x[s * n_ + c] -= pin[c];
    }
    return x;
}

// ---------------------------------------------------------------------------
// Solvers

namespace {

SolveResult solve_cg(const Objective& prob, const SolverConfig& config) {
    const int ndof = prob.num_dof();
    SolveResult res;
    Eigen::VectorXd x = prob.start();
    prob.project_null_space(x);

    Eigen::VectorXd g(ndof);
    prob.gradient(x, g);
    Eigen::VectorXd r = -g;
    Eigen::VectorXd g_at_zero(ndof);
    prob.gradient(Eigen::VectorXd::Zero(ndof), g_at_zero);

    const double r0 = r.norm();
    // Absolute floor: a start whose residual is already at round-off level is
    // the solution (constant-coefficient problems start at the minimizer).
    const double floor = 1e-13 * (1.0 + g_at_zero.norm());
    const double target = std::max(config.tolerance * r0, floor);
    if (r0 <= floor) {
        res.value = prob.eval(x);
        res.minimizer = x;
        res.converged = true;
        return res;
    }

    Eigen::VectorXd diag(ndof);
    prob.jacobi_diagonal(diag);

    Eigen::VectorXd z = r.cwiseQuotient(diag);
    prob.project_null_space(z);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    Eigen::VectorXd Ap(ndof), gp(ndof);

    for (long it = 1; it <= config.max_iterations; ++it) {
        prob.gradient(p, gp);
        Ap = gp - g_at_zero;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            if (r.norm() <= 10.0 * floor) {  // residual already at round-off
                res.converged = true;
                break;
            }
            throw numerical_error("NullSpace", "quadratic form is singular beyond translations");
        }
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        res.iterations = it;
        const double rn = r.norm();
        if (config.trace) config.trace(it, prob.eval(x), rn);
        if (rn <= target) {
            res.converged = true;
            break;
        }
        z = r.cwiseQuotient(diag);
        prob.project_null_space(z);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    if (!res.converged)
        throw numerical_error("NoConvergence", "conjugate gradient hit the iteration cap");
    prob.project_null_space(x);
    res.value = prob.eval(x);
    res.minimizer = x;
    res.grad_norm = r.norm();
    return res;
}

struct DescentOutcome {
    double value = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

DescentOutcome run_lbfgs(const Objective& prob, Eigen::VectorXd x, const SolverConfig& config) {
    constexpr int kMemory = 10;
    const int ndof = prob.num_dof();
    DescentOutcome out;

    Eigen::VectorXd g(ndof), g_new(ndof);
    double f = prob.eval(x);
    prob.gradient(x, g);
    const double target = config.tolerance * std::max(1.0, g.norm());

    std::vector<Eigen::VectorXd> s_hist, y_hist;
    std::vector<double> rho_hist;
    Eigen::VectorXd dir(ndof), alpha(kMemory);

    for (long it = 0; it < config.max_iterations; ++it) {
        const double gnorm = g.norm();
        if (config.trace) config.trace(it, f, gnorm);
        if (gnorm <= target) {
            out.converged = true;
            break;
        }
        // Two-loop recursion.
        dir = -g;
        const int m = static_cast<int>(s_hist.size());
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(dir);
            dir -= alpha[i] * y_hist[static_cast<std::size_t>(i)];
        }
        if (m > 0) {
            const auto& sl = s_hist.back();
            const auto& yl = y_hist.back();
            dir *= sl.dot(yl) / yl.squaredNorm();
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)].dot(dir);
            dir += (alpha[i] - beta) * s_hist[static_cast<std::size_t>(i)];
        }
        double gd = g.dot(dir);
        if (!(gd < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -g;
            gd = -g.squaredNorm();
        }

        // Backtracking line search with the Armijo sufficient-decrease rule;
        // accepted steps never increase the objective.
        double t = 1.0;
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            f_new = prob.eval(x + t * dir);
            if (f_new <= f + config.sufficient_decrease * t * gd) {
                accepted = true;
                break;
            }
            t *= config.backtrack_factor;
        }
        if (!accepted) {
            if (!s_hist.empty()) {
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                continue;  // retry from steepest descent
            }
            break;  // stuck at line-search resolution
        }

        const Eigen::VectorXd step = t * dir;
        x += step;
        prob.gradient(x, g_new);
        const Eigen::VectorXd yk = g_new - g;
        const double sy = step.dot(yk);
        if (sy > 1e-12 * step.norm() * yk.norm()) {
            if (static_cast<int>(s_hist.size()) == kMemory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(step);
            y_hist.push_back(yk);
            rho_hist.push_back(1.0 / sy);
        }
        f = f_new;
        g = g_new;
        out.iterations = it + 1;
    }
    out.value = f;
    out.x = std::move(x);
    out.grad_norm = g.norm();
    return out;
}

// Derivative-free cyclic coordinate descent for tabulated potentials:
// expanding bracket plus golden-section refinement per coordinate.
DescentOutcome run_coordinate_descent(const Objective& prob, Eigen::VectorXd x, const SolverConfig& config) {
    DescentOutcome out;
    const int ndof = prob.num_dof();
    double f = prob.eval(x);
    const double golden = 0.6180339887498949;

    auto line_min = [&](int i) {
        double step = 0.5 * (1.0 + std::abs(x[i]));
        auto feval = [&](double xi) {
            Eigen::VectorXd xt = x;
            xt[i] = xi;
            return prob.eval(xt);
        };
        double lo = x[i] - step, hi = x[i] + step;
        double flo = feval(lo), fhi = feval(hi);
        int expand = 0;
        while (flo < f && expand < 60) {
            lo -= step;
            step *= 2.0;
            flo = feval(lo);
            ++expand;
        }
        while (fhi < f && expand < 60) {
            hi += step;
            step *= 2.0;
            fhi = feval(hi);
            ++expand;
        }
        double a = lo, b = hi;
        double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
        double fc1 = feval(c1), fc2 = feval(c2);
        for (int gs = 0; gs < 90; ++gs) {
            if (fc1 < fc2) {
                b = c2;
                c2 = c1;
                fc2 = fc1;
                c1 = b - golden * (b - a);
                fc1 = feval(c1);
            } else {
                a = c1;
                c1 = c2;
                fc1 = fc2;
                c2 = a + golden * (b - a);
                fc2 = feval(c2);
            }
        }
        const double xi = 0.5 * (a + b);
        const double fx = feval(xi);
        if (fx < f) {
            x[i] = xi;
            f = fx;
        }
    };

    for (long sweep = 0; sweep < std::max<long>(1, config.max_iterations / std::max(1, ndof)); ++sweep) {
        const double f_before = f;
        for (int i = 0; i < ndof; ++i) line_min(i);
        out.iterations = sweep + 1;
        if (config.trace) config.trace(sweep, f, 0.0);
        if (f_before - f <= config.tolerance * (1.0 + std::abs(f))) {
            out.converged = true;
            break;
        }
        if (sweep > 400) break;
    }
    out.value = f;
    out.x = std::move(x);
    return out;
}

}  // namespace

SolveResult minimize(const Objective& prob, const SolverConfig& config, const std::vector<Eigen::VectorXd>& extra_starts) {
    if (prob.num_dof() == 0) {
        SolveResult res;
        res.value = prob.eval(Eigen::VectorXd());
        res.converged = true;
        return res;
    }

    SolverConfig::Method method = config.method;
    if (method == SolverConfig::Method::Auto) {
        if (prob.quadratic())
            method = SolverConfig::Method::ConjugateGradient;
        else if (prob.differentiable())
            method = SolverConfig::Method::Lbfgs;
        else
            method = SolverConfig::Method::CoordinateDescent;
    }
    if (method == SolverConfig::Method::ConjugateGradient) {
        if (!prob.quadratic())
            throw config_error("ConfigInvalid", "the conjugate-gradient path requires a quadratic potential");
        return solve_cg(prob, config);
    }

    // Multistart descent: canonical start, caller-provided extra starts, then
    // seeded Gaussian perturbations. Results reduce by (value, start index).
    const int n_perturbed = std::max(0, config.multistart - 1);
    const std::size_t n_starts = 1 + extra_starts.size() + static_cast<std::size_t>(n_perturbed);
    const double amplitude =
        config.start_amplitude >= 0.0 ? config.start_amplitude : 0.5 * prob.start_amplitude_scale();

    std::vector<DescentOutcome> outcomes(n_starts);
    parallel_for_indexed(n_starts, config.threads, [&](std::size_t si) {
        Eigen::VectorXd x0;
        if (si == 0) {
            x0 = prob.start();
        } else if (si <= extra_starts.size()) {
            x0 = extra_starts[si - 1];
        } else {
            x0 = prob.start();
            CounterRng rng(hash_combine(config.seed, 0xdeadULL + si));
            for (int i = 0; i < x0.size(); ++i) x0[i] += amplitude * rng.normal();
        }
        outcomes[si] = (method == SolverConfig::Method::Lbfgs) ? run_lbfgs(prob, std::move(x0), config)
                                                               : run_coordinate_descent(prob, std::move(x0), config);
    });

    std::size_t best = 0;
    bool any_converged = outcomes[0].converged;
    for (std::size_t si = 1; si < n_starts; ++si) {
        any_converged = any_converged || outcomes[si].converged;
        if (outcomes[si].value < outcomes[best].value) best = si;
    }
    if (!any_converged) throw numerical_error("NoConvergence", "no descent start met the gradient tolerance");

    SolveResult res;
    res.value = outcomes[best].value;
    res.minimizer = std::move(outcomes[best].x);
    res.iterations = outcomes[best].iterations;
    res.grad_norm = outcomes[best].grad_norm;
    res.best_start = static_cast<int>(best);
    res.converged = outcomes[best].converged;
    return res;
}

SolveResult oracle_dense(const Objective& prob) {
    if (prob.num_dof() == 0) {
        SolveResult res;
        res.value = prob.eval(Eigen::VectorXd());
        res.converged = true;
        return res;
    }
    if (prob.num_dof() > 4096) throw numerical_error("TooLarge", "dense oracle accepts at most 4096 unknowns");
    const int ndof = prob.num_dof();
    Eigen::MatrixXd A(ndof, ndof);
    Eigen::VectorXd b(ndof);
    prob.assemble_dense(A, b);

    if (prob.has_null_space()) {
        // Penalize component means: removes the translation null space without
        // changing the minimizer (b is orthogonal to constants).
        const int n = prob.components();
        const int slots = ndof / n;
        const double sigma = A.diagonal().maxCoeff();
        for (int c = 0; c < n; ++c)
            for (int s1 = 0; s1 < slots; ++s1)
                for (int s2 = 0; s2 < slots; ++s2) A(s1 * n + c, s2 * n + c) += sigma / static_cast<double>(slots);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const Eigen::VectorXd D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-12 * std::max(1.0, dmax))
        throw numerical_error("NullSpace", "stiffness matrix is singular beyond translations");
    Eigen::VectorXd x = ldlt.solve(-b);

    SolveResult res;
    res.value = prob.eval(x);
    res.minimizer = std::move(x);
    res.converged = true;
    res.grad_norm = 0.0;
    return res;
}

SolveResult oracle_grid(const Objective& prob, const GridSpec& grid, const SolverConfig& config) {
    if (prob.components() != 1) throw config_error("NotScalar", "grid oracle handles scalar problems only");
    if (prob.num_dof() > 6) throw numerical_error("TooLarge", "grid oracle accepts at most 6 unknowns");
    if (grid.points_per_dim > 41 || grid.points_per_dim < 2)
        throw numerical_error("TooLarge", "grid oracle accepts 2..41 points per unknown");
    if (prob.num_dof() == 0) {
        SolveResult res;
        res.value = prob.eval(Eigen::VectorXd());
        res.converged = true;
        return res;
    }

    const int ndof = prob.num_dof();
    const Eigen::VectorXd center = prob.start();
    const int pts = grid.points_per_dim;
    std::int64_t total = 1;
    for (int i = 0; i < ndof; ++i) total *= pts;

    // Keep the best grid points for polishing; one argmin basin is not enough
    // when wells sit between grid planes.
    constexpr std::size_t kPolishCandidates = 16;
    std::vector<std::pair<double, Eigen::VectorXd>> best;
    Eigen::VectorXd x(ndof);
    for (std::int64_t idx = 0; idx < total; ++idx) {
        std::int64_t rest = idx;
        for (int i = ndof - 1; i >= 0; --i) {
            const int gi = static_cast<int>(rest % pts);
            rest /= pts;
            x[i] = center[i] - grid.halfwidth + 2.0 * grid.halfwidth * gi / static_cast<double>(pts - 1);
        }
        const double v = prob.eval(x);
        if (best.size() < kPolishCandidates) {
            best.emplace_back(v, x);
            std::push_heap(best.begin(), best.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
        } else if (v < best.front().first) {
            std::pop_heap(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            best.back() = {v, x};
            std::push_heap(best.begin(), best.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; });
        }
    }
    std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    SolveResult res;
    res.value = best.front().first;
    res.minimizer = best.front().second;
    for (const auto& [val, candidate] : best) {
        DescentOutcome polished = prob.differentiable() ? run_lbfgs(prob, candidate, config)
                                                        : run_coordinate_descent(prob, candidate, config);
        if (polished.value < res.value) {
            res.value = polished.value;
            res.minimizer = std::move(polished.x);
            res.iterations = polished.iterations;
            res.grad_norm = polished.grad_norm;
        }
    }
    res.converged = true;
    return res;
}

}  // namespace latthom
