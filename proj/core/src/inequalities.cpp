#include "latthom/inequalities.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "latthom/common.hpp"

namespace latthom {

namespace {

int axis_edge_index(const Lattice& lattice, int axis) {
    for (int b = 0; b < lattice.num_edges(); ++b) {
        const EdgeOffset& e = lattice.edge(b);
        if (e.x.norm() > 1e-9) continue;
        bool unit = std::abs(e.y[axis] - 1.0) < 1e-9;
        for (int c = 0; c < lattice.d() && unit; ++c)
            if (c != axis) unit = std::abs(e.y[c]) < 1e-9;
        if (unit) return b;
    }
    throw config_error("NotHypercubic", "lattice lacks the unit edge along the requested axis");
}

void require_hypercubic(const Lattice& lattice) {
    if (!lattice.is_hypercubic_nn())
        throw config_error("NotHypercubic", "this construction requires the hyper-cubic nearest-neighbour lattice");
}

}  // namespace

SumintResult sumint_check(const Lattice& lattice, const Field& field, const Region& region, double q) {
    if (q < 1.0) throw config_error("ConfigInvalid", "exponent q must be at least 1");
    const int d = lattice.d();
    const int n = field.n();
    const int eps_den = field.eps_den();
    const double eps_d = std::pow(field.eps(), d);

    std::vector<int> nn;
    for (int b = 0; b < lattice.num_edges(); ++b)
        if (lattice.is_nn(b)) nn.push_back(b);

    // Least-squares reconstruction of the gradient from nn directional
    // derivatives: D = (sum_b r_b dir_b') (sum_b dir_b dir_b')^{-1}.
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
    for (int b : nn) G += lattice.edge(b).dir * lattice.edge(b).dir.transpose();
    const Eigen::MatrixXd Ginv = G.inverse();

    SumintResult out;
    const double layer = lattice.range() / static_cast<double>(eps_den);
    if (2.0 * layer < region.min_side()) {
        const Region inner = region.shrink(layer);
        KahanSum lhs;
        Eigen::VectorXi clo, chi;
        inner.cell_window_padded(eps_den, clo, chi);
        CellWindow w{clo, chi};
        w.for_each([&](const Eigen::VectorXi& z) {
            const Eigen::VectorXd pos = z.cast<double>() / static_cast<double>(eps_den);
            if (!inner.contains(pos)) return;
            Eigen::MatrixXd lhs_mat = Eigen::MatrixXd::Zero(n, d);
            for (int b : nn) {
                const Eigen::VectorXd r = discrete_gradient(lattice, field, z, b);
                lhs_mat += r * lattice.edge(b).dir.transpose();
            }
            const Eigen::MatrixXd D = lhs_mat * Ginv;
            lhs.add(std::pow(D.norm(), q));
        });
        out.integral_lhs = eps_d * lhs.value();
    }

    KahanSum rhs;
    lattice.for_each_edge(eps_den, region, SumConvention::ZAnchored, [&](const Eigen::VectorXi& z, int b) {
        if (!lattice.is_nn(b)) return;
        const Eigen::VectorXd r = discrete_gradient(lattice, field, z, b);
        rhs.add(std::pow(r.norm(), q));
    });
    out.discrete_rhs = eps_d * rhs.value();
    out.ratio = out.discrete_rhs > 0.0 ? out.integral_lhs / out.discrete_rhs : 0.0;
    return out;
}

PoincareEntry poincare_check(const Lattice& lattice, const Weights& weights, const Field& field, const Region& Q,
                             double p, double q, double alpha, double beta) {
    const bool alpha_inf = std::isinf(alpha);
    const bool beta_inf = std::isinf(beta);
    if (!(alpha > 1.0)) throw config_error("ExponentViolation", "the weighted Poincare inequality needs alpha > 1");
    const double lhs_exp = (alpha_inf ? 1.0 : 1.0 - 1.0 / alpha) / q;
    const double rhs_exp = (beta_inf ? 1.0 : 1.0 + 1.0 / beta) / p - 1.0 / lattice.d();
    if (lhs_exp < rhs_exp - 1e-12)
        throw config_error("ExponentViolation", "(1 - 1/alpha)/q >= (1 + 1/beta)/p - 1/d fails");

    const int eps_den = field.eps_den();
    const int n = field.n();
    const double eps_d = std::pow(field.eps(), lattice.d());
    const double node_weight = eps_d / static_cast<double>(lattice.num_offsets());
    const double volQ = Q.volume();

    // Nodal mean of u over Q.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    lattice.for_each_node(eps_den, Q, [&](const Eigen::VectorXi& cell, int off) {
        const double* v = field.value(field.node_index(cell, off));
        for (int c = 0; c < n; ++c) mean[c] += v[c];
    });
    {
        long count = 0;
        lattice.for_each_node(eps_den, Q, [&](const Eigen::VectorXi&, int) { ++count; });
        if (count == 0) throw config_error("ConfigInvalid", "Q contains no lattice nodes");
        mean /= static_cast<double>(count);
    }

    // LHS: weighted L^q oscillation.
    KahanSum osc;
    lattice.for_each_node(eps_den, Q, [&](const Eigen::VectorXi& cell, int off) {
        const double* v = field.value(field.node_index(cell, off));
        double diff2 = 0.0;
        for (int c = 0; c < n; ++c) diff2 += (v[c] - mean[c]) * (v[c] - mean[c]);
        double lam_sum = 0.0;
        for (int b = 0; b < lattice.num_edges(); ++b) lam_sum += weights(cell, b);
        osc.add(std::pow(diff2, 0.5 * q) * lam_sum);
    });
    const double lhs = std::pow(node_weight * osc.value() / volQ, 1.0 / q);

    // Moment factor over Q (all edge offsets).
    double m_alpha;
    Eigen::VectorXi clo, chi;
    Q.cell_window(eps_den, clo, chi);
    CellWindow cells{clo, chi};
    if (alpha_inf) {
        std::vector<double> sup(static_cast<std::size_t>(lattice.num_edges()), 0.0);
        cells.for_each([&](const Eigen::VectorXi& z) {
            for (int b = 0; b < lattice.num_edges(); ++b)
                sup[static_cast<std::size_t>(b)] = std::max(sup[static_cast<std::size_t>(b)], weights(z, b));
        });
        m_alpha = 0.0;
        for (double s : sup) m_alpha += s;
    } else {
        KahanSum acc;
        cells.for_each([&](const Eigen::VectorXi& z) {
            for (int b = 0; b < lattice.num_edges(); ++b) acc.add(std::pow(weights(z, b), alpha));
        });
        m_alpha = std::pow(eps_d * acc.value() / volQ, 1.0 / alpha);
    }

    // Inverse-moment factor and weighted gradient sum over the grown cube.
    const Region Qgrown = Q.grow(lattice.range() / static_cast<double>(eps_den));
    Eigen::VectorXi glo, ghi;
    Qgrown.cell_window_padded(eps_den, glo, ghi);
    CellWindow grown{glo, ghi};
    double m_beta;
    KahanSum grad_sum;
    std::vector<double> sup_inv(static_cast<std::size_t>(lattice.num_edges()), 0.0);
    KahanSum inv_acc;
    grown.for_each([&](const Eigen::VectorXi& z) {
        const Eigen::VectorXd pos = z.cast<double>() / static_cast<double>(eps_den);
        if (!Qgrown.contains(pos)) return;
        for (int b = 0; b < lattice.num_edges(); ++b) {
            if (!lattice.is_nn(b)) continue;
            const double lam = weights(z, b);
            if (beta_inf) {
                sup_inv[static_cast<std::size_t>(b)] = std::max(sup_inv[static_cast<std::size_t>(b)], 1.0 / lam);
            } else {
                inv_acc.add(std::pow(lam, -beta));
            }
            const Eigen::VectorXd r = discrete_gradient(lattice, field, z, b);
            grad_sum.add(lam * std::pow(r.norm(), p));
        }
    });
    if (beta_inf) {
        m_beta = 0.0;
        for (double s : sup_inv) m_beta += s;
    } else {
        m_beta = std::pow(eps_d * inv_acc.value() / volQ, 1.0 / beta);
    }
    const double grad_factor = std::pow(eps_d * grad_sum.value() / volQ, 1.0 / p);

    PoincareEntry entry;
    entry.eps_den = eps_den;
    entry.lhs = lhs;
    entry.m_alpha = m_alpha;
    entry.m_beta = m_beta;
    entry.rhs_without_C =
        std::pow(volQ, 1.0 / lattice.d()) * std::pow(m_alpha, 1.0 / q) * std::pow(m_beta, 1.0 / p) * grad_factor;
    entry.implied_C = entry.rhs_without_C > 0.0 ? entry.lhs / entry.rhs_without_C : 0.0;
    return entry;
}

CoercivityResult coercivity_diagnostic(const Lattice& lattice, const Weights& weights, const Field& field,
                                       const Region& region, double p, double beta) {
    if (std::isinf(beta)) throw config_error("ConfigInvalid", "the diagnostic needs beta < infinity");
    const double eps_d = std::pow(field.eps(), lattice.d());
    KahanSum s_mixed, s_inv, s_weighted;
    lattice.for_each_edge(field.eps_den(), region, SumConvention::ZAnchored, [&](const Eigen::VectorXi& z, int b) {
        if (!lattice.is_nn(b)) return;
        const double lam = weights(z, b);
        const double r = discrete_gradient(lattice, field, z, b).norm();
        s_mixed.add(std::pow(r, beta * p / (beta + 1.0)));
        s_inv.add(std::pow(lam, -beta));
        s_weighted.add(lam * std::pow(r, p));
    });
    CoercivityResult res;
    res.lhs = std::pow(eps_d * s_mixed.value(), (beta + 1.0) / beta);
    res.rhs = std::pow(eps_d * s_inv.value(), 1.0 / beta) * (eps_d * s_weighted.value());
    res.ok = res.lhs <= res.rhs * (1.0 + 1e-12) + 1e-300;
    return res;
}

std::vector<Path> canonical_path_family(int d, int i, const Eigen::VectorXi& z) {
    if (d < 2) throw config_error("NotHypercubic", "path families need d >= 2");
    if (i < 0 || i >= d) throw config_error("ConfigInvalid", "direction index out of range");
    auto at = [&](const Eigen::VectorXi& base, int axis_a, int sa, int axis_b, int sb) {
        Eigen::VectorXi w = base;
        w[axis_a] += sa;
        if (axis_b >= 0) w[axis_b] += sb;
        return w;
    };

    std::vector<Path> family;
    family.push_back({GridEdge{z, i}});  // direct edge
    for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        // staple through +e_j: z -> z+e_j -> z+e_j+e_i -> z+e_i
        family.push_back({GridEdge{z, j}, GridEdge{at(z, j, 1, -1, 0), i}, GridEdge{at(z, i, 1, -1, 0), j}});
        // staple through -e_j: z -> z-e_j -> z-e_j+e_i -> z+e_i
        family.push_back(
            {GridEdge{at(z, j, -1, -1, 0), j}, GridEdge{at(z, j, -1, -1, 0), i}, GridEdge{at(z, i, 1, j, -1), j}});
    }
    // 9-edge loop exiting through -e_i, using the lane at offset 2 e_j0.
    const int j0 = (i == 0) ? 1 : 0;
    Path loop;
    loop.push_back({at(z, i, -1, -1, 0), i});   // {z-e_i, z}
    loop.push_back({at(z, i, -1, -1, 0), j0});  // {z-e_i, z-e_i+e_j}
    loop.push_back({at(z, i, -1, j0, 1), j0});  // {z-e_i+e_j, z-e_i+2e_j}
    loop.push_back({at(z, i, -1, j0, 2), i});   // {z-e_i+2e_j, z+2e_j}
    loop.push_back({at(z, j0, 2, -1, 0), i});   // {z+2e_j, z+e_i+2e_j}
    loop.push_back({at(z, i, 1, j0, 2), i});    // {z+e_i+2e_j, z+2e_i+2e_j}
    loop.push_back({at(z, i, 2, j0, 1), j0});   // {z+2e_i+2e_j, z+2e_i+e_j}
    loop.push_back({at(z, i, 2, -1, 0), j0});   // {z+2e_i+e_j, z+2e_i}
    loop.push_back({at(z, i, 1, -1, 0), i});    // {z+2e_i, z+e_i}
    family.push_back(loop);
    return family;
}

PathWeight iid_mu(const Lattice& lattice, const Weights& weights, const Eigen::VectorXi& z, int direction, double p) {
    require_hypercubic(lattice);
    PathWeight pw;
    pw.z = z;
    pw.direction = direction;
    pw.paths = canonical_path_family(lattice.d(), direction, z);
    const double inv_exp = 1.0 / (p - 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t pi = 0; pi < pw.paths.size(); ++pi) {
        double acc = 0.0;
        for (const GridEdge& e : pw.paths[pi]) acc += std::pow(weights(e.z, axis_edge_index(lattice, e.axis)), -inv_exp);
        if (acc < best) {
            best = acc;
            pw.min_index = static_cast<int>(pi);
        }
    }
    pw.mu = std::pow(best, -(p - 1.0) / p);
    return pw;
}

MuEdgeCheckResult mu_edge_inequality_check(const Lattice& lattice, const Weights& weights, const Field& field,
                                           const Region& region, double p) {
    require_hypercubic(lattice);
    MuEdgeCheckResult res;
    res.worst_slack = std::numeric_limits<double>::infinity();
    const double inv_eps = static_cast<double>(field.eps_den());

    auto grad_on = [&](const GridEdge& e) -> double {
        Eigen::VectorXi head = e.z;
        head[e.axis] += 1;
        const double* a = field.value(field.node_index(e.z, 0));
        const double* b = field.value(field.node_index(head, 0));
        double acc = 0.0;
        for (int c = 0; c < field.n(); ++c) acc += (b[c] - a[c]) * (b[c] - a[c]);
        return std::sqrt(acc) * inv_eps;
    };

    std::vector<int> edge_axis(static_cast<std::size_t>(lattice.num_edges()));
    for (int b = 0; b < lattice.num_edges(); ++b) {
        int axis = -1;
        for (int c = 0; c < lattice.d(); ++c)
            if (std::abs(lattice.edge(b).y[c] - 1.0) < 1e-9) axis = c;
        edge_axis[static_cast<std::size_t>(b)] = axis;
    }
    lattice.for_each_edge(field.eps_den(), region, SumConvention::ZAnchored, [&](const Eigen::VectorXi& z, int b) {
        const int axis = edge_axis[static_cast<std::size_t>(b)];
        PathWeight pw = iid_mu(lattice, weights, z, axis, p);
        const double lhs = grad_on(GridEdge{z, axis});
        KahanSum acc;
        for (const GridEdge& e : pw.paths[static_cast<std::size_t>(pw.min_index)])
            acc.add(weights(e.z, axis_edge_index(lattice, e.axis)) * std::pow(grad_on(e), p));
        const double rhs = (1.0 / pw.mu) * std::pow(acc.value(), 1.0 / p);
        const double slack = rhs - lhs;
        if (slack < res.worst_slack) res.worst_slack = slack;
        if (lhs > rhs * (1.0 + 1e-12) + 1e-300) res.ok = false;
        ++res.edges_checked;
    });
    return res;
}

MuMomentEstimate mu_moment_estimate(const Lattice& lattice, const EnvironmentSpec& env, double p, double beta,
                                    double gamma, long n_samples, int threads) {
    require_hypercubic(lattice);
    const double two_d_gamma = 2.0 * lattice.d() * gamma;
    if (!(gamma > 1.0 / (2.0 * lattice.d() * (p - 1.0))))
        throw config_error("HypothesisViolation", "gamma must exceed 1/(2d(p-1))");
    if (!(beta >= 1.0 / (p - 1.0) && beta < two_d_gamma))
        throw config_error("HypothesisViolation", "beta must lie in [1/(p-1), 2 d gamma)");
    if (n_samples < 2) throw config_error("ConfigInvalid", "need at least two samples");
    env.check(lattice);
    auto holder = std::make_shared<const EnvironmentSpec>(env);

    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    parallel_for_indexed(static_cast<std::size_t>(n_samples), threads, [&](std::size_t s) {
        EnvironmentSample sample(holder, static_cast<std::uint64_t>(s));
        const PathWeight pw = iid_mu(lattice, sample, Eigen::VectorXi::Zero(lattice.d()), 0, p);
        vals[s] = std::pow(pw.mu, -beta * p);
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    MuMomentEstimate est;
    est.mean = mean;
    est.standard_error = std::sqrt(var / (static_cast<double>(n_samples) * (n_samples - 1.0)));
    est.samples = n_samples;
    est.heavy_tail = est.standard_error > 0.25 * std::abs(mean);
    return est;
}

}  // namespace latthom
