#include "latthom/homogenize.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "latthom/common.hpp"

namespace latthom {

namespace {

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> affine_map(const Eigen::MatrixXd& F) {
    return [F](const Eigen::VectorXd& x) -> Eigen::VectorXd { return F * x; };
}

void require_integer_box(const Region& region) {
    if (!region.aligned(1)) throw config_error("MisalignedRegion", "cell regions must be integer boxes");
}

}  // namespace

CellProblemResult cell_mF(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                          const Eigen::MatrixXd& F, const Region& region, const SolverConfig& config) {
    require_integer_box(region);
    CellProblem prob = CellProblem::dirichlet(lattice, weights, potential, affine_map(F), region, 1);
    CellProblemResult res;
    res.F = F;
    res.solve = minimize(prob, config);
    res.total = res.solve.value;
    res.value = res.total / region.volume();
    return res;
}

CellProblemResult whom_k(const Lattice& lattice, const Weights& weights, const PotentialSpec& potential,
                         const Eigen::MatrixXd& F, int k, const SolverConfig& config,
                         const std::vector<Eigen::VectorXd>& extra_starts) {
    CellProblem prob = CellProblem::periodic(lattice, weights, potential, F, k);
    CellProblemResult res;
    res.F = F;
    res.k = k;
    res.solve = minimize(prob, config, extra_starts);
    res.total = res.solve.value;
    res.value = res.total / std::pow(static_cast<double>(k), lattice.d());
    return res;
}

namespace {

// Periodized Dirichlet minimizer as a start for the periodic problem: the
// corrector vanishes in the R-layer near the boundary of kY, so its periodic
// extension has the same energy as the Dirichlet competitor.
Eigen::VectorXd periodized_start(const Lattice& lattice, const CellProblem& periodic_prob,
                                 const CellProblem& dirichlet_prob, const Eigen::VectorXd& dirichlet_x,
                                 const Eigen::MatrixXd& F, int k) {
    Field total = dirichlet_prob.extract_field(dirichlet_x);
    Field corr = Field::periodic(lattice, k);
    corr.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
        const Eigen::VectorXd pos = lattice.node_position(1, cell, off);
        const Eigen::VectorXd u = total.value_vec(cell, off);
        const Eigen::VectorXd phi = u - F * pos;
        double* dst = corr.value(node);
        for (int c = 0; c < corr.n(); ++c) dst[c] = phi[c];
    });
    return periodic_prob.dofs_from_field(corr);
}

}  // namespace

WhomEstimate estimate_W0(const Lattice& lattice, const EnvironmentSpec& env, const PotentialSpec& potential,
                         const Eigen::MatrixXd& F, const std::vector<int>& k_schedule, long samples_per_k,
                         const SolverConfig& config, const EstimateOptions& opts) {
    if (k_schedule.empty()) throw config_error("ConfigInvalid", "k schedule must not be empty");
    for (std::size_t i = 1; i < k_schedule.size(); ++i)
        if (k_schedule[i] <= k_schedule[i - 1]) throw config_error("ConfigInvalid", "k schedule must increase");
    if (samples_per_k < 1) throw config_error("ConfigInvalid", "need at least one sample per k");
    env.check(lattice);
    auto holder = std::make_shared<const EnvironmentSpec>(env);

    WhomEstimate est;
    est.F = F;
    est.k_schedule = k_schedule;
    est.samples_per_k = samples_per_k;
    est.upper_bound_only = !potential.is_convex();

    const std::size_t total_runs = k_schedule.size() * static_cast<std::size_t>(samples_per_k);
    est.records.resize(total_runs);
    parallel_for_indexed(total_runs, opts.threads, [&](std::size_t idx) {
        const int k = k_schedule[idx / static_cast<std::size_t>(samples_per_k)];
        const long s = static_cast<long>(idx % static_cast<std::size_t>(samples_per_k));
        EnvironmentSample sample(holder, static_cast<std::uint64_t>(s));
        WhomSampleRecord rec;
        rec.k = k;
        rec.sample = s;
        if (opts.with_sandwich) {
            const Region cell = Region::cube(lattice.d(), 0.0, static_cast<double>(k));
            CellProblem dprob = CellProblem::dirichlet(lattice, sample, potential, affine_map(F), cell, 1);
            SolveResult dres = minimize(dprob, config);
            rec.m_f_value = dres.value / cell.volume();

            CellProblem pprob = CellProblem::periodic(lattice, sample, potential, F, k);
            std::vector<Eigen::VectorXd> extra;
            if (!potential.is_quadratic())
                extra.push_back(periodized_start(lattice, pprob, dprob, dres.minimizer, F, k));
            SolveResult pres = minimize(pprob, config, extra);
            rec.value = pres.value / std::pow(static_cast<double>(k), lattice.d());
            rec.iterations = pres.iterations;
            rec.sandwich_ok = rec.value <= rec.m_f_value + opts.sandwich_slack;
        } else {
            CellProblemResult r = whom_k(lattice, sample, potential, F, k, config);
            rec.value = r.value;
            rec.iterations = r.solve.iterations;
            rec.m_f_value = std::numeric_limits<double>::quiet_NaN();
        }
        est.records[idx] = rec;
    });

    est.mean.resize(k_schedule.size());
    est.standard_error.resize(k_schedule.size());
    for (std::size_t ki = 0; ki < k_schedule.size(); ++ki) {
        double mean = 0.0;
        for (long s = 0; s < samples_per_k; ++s)
            mean += est.records[ki * static_cast<std::size_t>(samples_per_k) + static_cast<std::size_t>(s)].value;
        mean /= static_cast<double>(samples_per_k);
        double var = 0.0;
        for (long s = 0; s < samples_per_k; ++s) {
            const double dv =
                est.records[ki * static_cast<std::size_t>(samples_per_k) + static_cast<std::size_t>(s)].value - mean;
            var += dv * dv;
        }
        est.mean[ki] = mean;
        est.standard_error[ki] =
            samples_per_k > 1 ? std::sqrt(var / (static_cast<double>(samples_per_k) * (samples_per_k - 1.0))) : 0.0;
    }
    est.estimate = est.mean.back();
    double increment = 0.0;
    if (k_schedule.size() >= 2) increment = std::abs(est.mean.back() - est.mean[k_schedule.size() - 2]);
    est.uncertainty = std::max(est.standard_error.back(), increment);
    return est;
}

GrowthCertificate growth_bounds_check(const WhomEstimate& estimate, const std::vector<double>& lambda_means, double p,
                                      double c1, bool throw_on_violation) {
    GrowthCertificate cert;
    cert.estimate = estimate.estimate;
    const double Fp = std::pow(estimate.F.norm(), p);
    double envelope = 0.0;
    for (double mean : lambda_means) envelope += c1 * (1.0 + mean * (Fp + 1.0));
    cert.upper_envelope = envelope;
    cert.upper_ok = cert.estimate <= envelope + 1e-9 * (1.0 + envelope);
    cert.positive_ok = estimate.F.norm() < 1e-12 || cert.estimate > 0.0;
    if (throw_on_violation && (!cert.upper_ok || !cert.positive_ok))
        throw property_error("BoundViolated", "W0 estimate escapes the moment envelope");
    return cert;
}

HomTensor extract_tensor(const Lattice& lattice, const EnvironmentSpec& env, const PotentialSpec& potential, int k,
                         long samples, const SolverConfig& config, int threads) {
    if (!potential.is_quadratic()) throw config_error("NotQuadratic", "tensor extraction needs a quadratic family");
    const int n = lattice.n(), d = lattice.d();
    const int nd = n * d;
    auto basis = [&](int a) {
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, d);
        E(a / d, a % d) = 1.0;
        return E;
    };
    EstimateOptions opts;
    opts.with_sandwich = false;
    opts.threads = threads;
    auto density = [&](const Eigen::MatrixXd& F) {
        return estimate_W0(lattice, env, potential, F, {k}, samples, config, opts).estimate;
    };

    Eigen::VectorXd w(nd);
    for (int a = 0; a < nd; ++a) w[a] = density(basis(a));
    HomTensor tensor;
    tensor.k = k;
    tensor.samples = samples;
    tensor.L.setZero(nd, nd);
    for (int a = 0; a < nd; ++a) tensor.L(a, a) = 2.0 * w[a];
    for (int a = 0; a < nd; ++a) {
        for (int b = a + 1; b < nd; ++b) {
            const double wab = density(basis(a) + basis(b));
            const double off = wab - w[a] - w[b];
            tensor.L(a, b) = off;
            tensor.L(b, a) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tensor.L);
    tensor.eigenvalues = eig.eigenvalues();
    tensor.min_eigenvalue = tensor.eigenvalues.minCoeff();
    return tensor;
}

// ---------------------------------------------------------------------------
// Constant-coefficient reference problem for the Gamma-gap experiment:
// eps^d sum_z  Du(z) : L : Du(z) / 2  -  F_eps(u)  over A^eps_g(A),
// with Du built from the axis forward differences.

namespace {

class GammaReferenceProblem final : public Objective {
public:
    GammaReferenceProblem(const Lattice& lattice, const Eigen::MatrixXd& L,
                          const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g, const BodyForce& force,
                          const Region& region, int eps_den)
        : n_(lattice.n()), d_(lattice.d()), L_(L) {
        if (!lattice.has_unit_edges())
            throw config_error("ConfigInvalid", "the reference problem needs a lattice with unit axis edges");
        if (d_ + 1 > 8) throw config_error("ConfigInvalid", "the reference problem supports d <= 7");
        eps_d_ = std::pow(1.0 / static_cast<double>(eps_den), d_);
        inv_eps_ = static_cast<double>(eps_den);

        field_ = Field::over_region(lattice, eps_den, region);
        sample_onto_field(lattice, field_, g);
        mark_dirichlet_free_nodes(lattice, field_, region);

        node_slot_.assign(static_cast<std::size_t>(field_.num_nodes()), -1);
        field_.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) {
            if (field_.is_free(node)) {
                node_slot_[static_cast<std::size_t>(node)] = num_slots_;
                slot_to_node_.push_back(node);
                ++num_slots_;
            }
        });
        start_.resize(num_slots_ * n_);
        for (int s = 0; s < num_slots_; ++s) {
            const double* v = field_.value(slot_to_node_[static_cast<std::size_t>(s)]);
            for (int c = 0; c < n_; ++c) start_[s * n_ + c] = v[c];
        }

        Eigen::VectorXi clo, chi;
        region.cell_window(eps_den, clo, chi);
        CellWindow window{clo, chi};
        window.for_each([&](const Eigen::VectorXi& z) {
            Anchor a;
            a.node[0] = field_.node_index(z, 0);
            for (int i = 0; i < d_; ++i) {
                Eigen::VectorXi zn = z;
                zn[i] += 1;
                a.node[1 + i] = field_.node_index(zn, 0);
            }
            anchors_.push_back(a);
        });

        linear_.assign(static_cast<std::size_t>(num_slots_ * n_), 0.0);
        KahanSum fixed_part;
        lattice.for_each_node(eps_den, region, [&](const Eigen::VectorXi& cell, int off) {
            const std::int64_t node = field_.node_index(cell, off);
            const Eigen::VectorXd fv = force.f(lattice.node_position(eps_den, cell, off));
            const std::int32_t slot = node_slot_[static_cast<std::size_t>(node)];
            if (slot >= 0) {
                for (int c = 0; c < n_; ++c) linear_[static_cast<std::size_t>(slot) * n_ + c] += eps_d_ * fv[c];
            } else {
                const double* v = field_.value(node);
                double dot = 0.0;
                for (int c = 0; c < n_; ++c) dot += fv[c] * v[c];
                fixed_part.add(eps_d_ * dot);
            }
        });
        linear_const_ = fixed_part.value();
    }

    int num_dof() const override { return num_slots_ * n_; }
    int components() const override { return n_; }
    bool quadratic() const override { return true; }
    Eigen::VectorXd start() const override { return start_; }

    double eval(const Eigen::VectorXd& x) const override {
        KahanSum sum;
        Eigen::VectorXd D(n_ * d_);
        for (const Anchor& a : anchors_) {
            load_gradient(a, x, D);
            sum.add(0.5 * D.dot(L_ * D));
        }
        double e = eps_d_ * sum.value();
        KahanSum lin;
        for (int i = 0; i < num_dof(); ++i) lin.add(linear_[static_cast<std::size_t>(i)] * x[i]);
        return e - lin.value() - linear_const_;
    }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override {
        g.setZero(num_dof());
        Eigen::VectorXd D(n_ * d_), LD(n_ * d_);
        for (const Anchor& a : anchors_) {
            load_gradient(a, x, D);
            LD = L_ * D;
            // dD[(c,i)]/du = inv_eps * (delta_{node_i} - delta_{node_self})
            const std::int32_t slot_self = node_slot_[static_cast<std::size_t>(a.node[0])];
            for (int i = 0; i < d_; ++i) {
                const std::int32_t slot_nb = node_slot_[static_cast<std::size_t>(a.node[1 + i])];
                for (int c = 0; c < n_; ++c) {
                    const double v = eps_d_ * inv_eps_ * LD[c * d_ + i];
                    if (slot_nb >= 0) g[slot_nb * n_ + c] += v;
                    if (slot_self >= 0) g[slot_self * n_ + c] -= v;
                }
            }
        }
        for (int i = 0; i < num_dof(); ++i) g[i] -= linear_[static_cast<std::size_t>(i)];
    }

    void jacobi_diagonal(Eigen::VectorXd& diag) const override {
        diag.setZero(num_dof());
        const double w = eps_d_ * inv_eps_ * inv_eps_;
        for (const Anchor& a : anchors_) {
            const std::int32_t slot_self = node_slot_[static_cast<std::size_t>(a.node[0])];
            for (int c = 0; c < n_; ++c) {
                double self_acc = 0.0;
                for (int i = 0; i < d_; ++i) {
                    const std::int32_t slot_nb = node_slot_[static_cast<std::size_t>(a.node[1 + i])];
                    if (slot_nb >= 0) diag[slot_nb * n_ + c] += w * L_(c * d_ + i, c * d_ + i);
                    for (int j = 0; j < d_; ++j) self_acc += L_(c * d_ + i, c * d_ + j);
                }
                if (slot_self >= 0) diag[slot_self * n_ + c] += w * self_acc;
            }
        }
        for (int i = 0; i < num_dof(); ++i)
            if (diag[i] <= 0.0) diag[i] = 1.0;
    }

private:
    struct Anchor {
        std::array<std::int64_t, 8> node{};  // [self, self+e_1, ..., self+e_d]
    };

    void load_gradient(const Anchor& a, const Eigen::VectorXd& x, Eigen::VectorXd& D) const {
        const auto value_at = [&](std::int64_t node, int c) -> double {
            const std::int32_t slot = node_slot_[static_cast<std::size_t>(node)];
            return slot >= 0 ? x[slot * n_ + c] : field_.value(node)[c];
        };
        for (int c = 0; c < n_; ++c) {
            const double self = value_at(a.node[0], c);
            for (int i = 0; i < d_; ++i) D[c * d_ + i] = inv_eps_ * (value_at(a.node[1 + i], c) - self);
        }
    }

    int n_, d_;
    Eigen::MatrixXd L_;
    double eps_d_ = 1.0, inv_eps_ = 1.0;
    Field field_;
    std::vector<std::int32_t> node_slot_;
    std::vector<std::int64_t> slot_to_node_;
    int num_slots_ = 0;
    Eigen::VectorXd start_;
    std::vector<Anchor> anchors_;
    std::vector<double> linear_;
    double linear_const_ = 0.0;
};

}  // namespace

std::vector<GammaGapRow> gamma_gap_experiment(const Lattice& lattice, const Weights& weights,
                                              const PotentialSpec& potential,
                                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                              const BodyForce& force, const Region& A,
                                              const std::vector<int>& eps_schedule, const HomTensor& tensor,
                                              const SolverConfig& config) {
    if (!potential.is_quadratic())
        throw config_error("NotQuadratic", "the gap experiment is defined for quadratic potentials");
    if (eps_schedule.empty()) throw config_error("ConfigInvalid", "eps schedule must not be empty");

    const int finest = *std::max_element(eps_schedule.begin(), eps_schedule.end());
    GammaReferenceProblem ref(lattice, tensor.L, g, force, A, finest);
    const double min_J_hom = minimize(ref, config).value;

    std::vector<GammaGapRow> rows;
    for (int m : eps_schedule) {
        CellProblem prob =
            CellProblem::dirichlet(lattice, weights, potential, g, A, m, SumConvention::EdgeContained, &force);
        const double min_J_eps = minimize(prob, config).value;
        rows.push_back({m, min_J_eps, min_J_hom, std::abs(min_J_eps - min_J_hom)});
    }
    return rows;
}

double layered_value_e1(const std::vector<double>& layer_weights, double ell, double p) {
    double acc = 0.0;
    for (double w : layer_weights) acc += std::pow(w, -1.0 / (p - 1.0));
    acc /= static_cast<double>(layer_weights.size());
    return std::pow(std::abs(ell), p) * std::pow(acc, -(p - 1.0));
}

double layered_value_transverse(const std::vector<double>& layer_weights, double ell) {
    double acc = 0.0;
    for (double w : layer_weights) acc += w;
    acc /= static_cast<double>(layer_weights.size());
    return ell * ell * acc;
}

std::vector<double> read_layer_weights(const Lattice& lattice, const Weights& weights, int k) {
    std::vector<double> vals(static_cast<std::size_t>(k));
    for (int x = 0; x < k; ++x) {
        Eigen::VectorXi z = Eigen::VectorXi::Zero(lattice.d());
        z[0] = x;
        vals[static_cast<std::size_t>(x)] = weights(z, 0);
    }
    return vals;
}

}  // namespace latthom
