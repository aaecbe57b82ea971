// Acceptance suite: every release criterion as one pass/fail line, with the
// tolerance pinned in code next to the check. Exits nonzero if any line fails.

#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "latthom/gluing.hpp"
#include "latthom/inequalities.hpp"

using namespace latthom;
using namespace test_support;

namespace {

Eigen::MatrixXd row2(double a, double b) {
    Eigen::MatrixXd F(1, 2);
    F << a, b;
    return F;
}

std::string fmt(const char* pattern, double v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

// --------------------------------------------------------------------- 1
bool layered_closed_forms(std::string& detail) {
    Lattice lat = zd_nn();
    const PotentialSpec quad = PotentialSpec::quadratic();
    SolverConfig cfg;
    double max_err = 0.0;

    auto check_sample = [&](const Weights& w, int k) {
        const auto layers = read_layer_weights(lat, w, k);
        const double v1 = whom_k(lat, w, quad, row2(1, 0), k, cfg).value;
        const double v2 = whom_k(lat, w, quad, row2(0, 1), k, cfg).value;
        max_err = std::max(max_err, std::abs(v1 - layered_value_e1(layers, 1.0, 2.0)));
        max_err = std::max(max_err, std::abs(v2 - layered_value_transverse(layers, 1.0)));
    };

    EnvironmentSample fixture(env_spec(Distribution::cycle({1.0, 4.0}), CorrelationMode::LayeredE1, 0), 0);
    check_sample(fixture, 2);
    const double v1 = whom_k(lat, fixture, quad, row2(1, 0), 2, cfg).value;
    const double v2 = whom_k(lat, fixture, quad, row2(0, 1), 2, cfg).value;
    if (std::abs(v1 - 1.6) > 1e-8 || std::abs(v2 - 2.5) > 1e-8) {
        detail = "fixture (1,4) mismatch";
        return false;
    }

    auto spec = env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::LayeredE1, 2026);
    for (int k : {2, 4, 16, 64})
        for (std::uint64_t s = 0; s < 20; ++s) check_sample(EnvironmentSample(spec, s), k);

    detail = fmt("max |solver - closed form| = %.3g (tol 1e-8)", max_err);
    return max_err <= 1e-8;
}

// --------------------------------------------------------------------- 2
bool layered_p4_upper_bound(std::string& detail) {
    Lattice lat = zd_nn();
    const PotentialSpec p4 = PotentialSpec::p_power(4.0);
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    double worst = -1e9;

    auto check_sample = [&](const Weights& w, int k) {
        const auto layers = read_layer_weights(lat, w, k);
        const double bound = layered_value_e1(layers, 1.0, 4.0);
        const double value = whom_k(lat, w, p4, row2(1, 0), k, cfg).value;
        worst = std::max(worst, value - bound);
    };

    EnvironmentSample fixture(env_spec(Distribution::cycle({1.0, 8.0}), CorrelationMode::LayeredE1, 0), 0);
    const auto fixture_layers = read_layer_weights(lat, fixture, 2);
    if (std::abs(layered_value_e1(fixture_layers, 1.0, 4.0) - 64.0 / 27.0) > 1e-12) {
        detail = "fixture bound is not 64/27";
        return false;
    }
    check_sample(fixture, 2);

    auto spec = env_spec(Distribution::two_point(1.0, 8.0, 0.5), CorrelationMode::LayeredE1, 515);
    for (int k : {2, 4, 8})
        for (std::uint64_t s = 0; s < 10; ++s) check_sample(EnvironmentSample(spec, s), k);

    detail = fmt("max (value - bound) = %.3g (tol 1e-6)", worst);
    return worst <= 1e-6;
}

// --------------------------------------------------------------------- 3
bool constant_coefficient_exactness(std::string& detail) {
    Lattice lat = zd_nn();
    EnvironmentSample env = constant_env(1.3);
    SolverConfig cfg;
    CounterRng rng(33);
    double max_err = 0.0;
    for (const auto& pot : {PotentialSpec::quadratic(), PotentialSpec::p_power(3.0), PotentialSpec::p_power(4.0)}) {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd F = row2(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
            double expected = 0.0;
            for (int b = 0; b < lat.num_edges(); ++b)
                expected += 1.3 * std::pow(std::abs((F * lat.edge(b).dir)(0, 0)), pot.p);
            for (int k : {1, 2, 4})
                max_err = std::max(max_err, std::abs(whom_k(lat, env, pot, F, k, cfg).value - expected));
        }
    }
    detail = fmt("max |whom_k - sum_b lambda |F e_b|^p| = %.3g (tol 1e-10)", max_err);
    return max_err <= 1e-10;
}

// --------------------------------------------------------------------- 4
bool sandwich_inequality(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    CounterRng rng(44);
    double worst = -1e9;
    long violations = 0;

    auto run = [&](const PotentialSpec& pot, const Weights& w, const Eigen::MatrixXd& F, int k) {
        const Region cell = Region::cube(2, 0.0, k);
        CellProblem dprob = CellProblem::dirichlet(
            lat, w, pot, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return F * x; }, cell, 1);
        SolveResult dres = minimize(dprob, cfg);
        const double mf = dres.value / cell.volume();

        CellProblem pprob = CellProblem::periodic(lat, w, pot, F, k);
        std::vector<Eigen::VectorXd> extra;
        if (!pot.is_quadratic()) {
            Field total = dprob.extract_field(dres.minimizer);
            Field corr = Field::periodic(lat, k);
            corr.for_each_stored_node([&](const Eigen::VectorXi& cellz, int off, std::int64_t node) {
                const Eigen::VectorXd pos = lat.node_position(1, cellz, off);
                corr.value(node)[0] = total.value_vec(cellz, off)[0] - (F * pos)(0, 0);
            });
            extra.push_back(pprob.dofs_from_field(corr));
        }
        const double whom = minimize(pprob, cfg, extra).value / cell.volume();
        worst = std::max(worst, whom - mf);
        if (whom > mf + 2e-8) ++violations;
    };

    auto spec = env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::IidPerEdge, 616);
    const int ks[3] = {2, 4, 8};
    for (int trial = 0; trial < 100; ++trial) {
        EnvironmentSample env(spec, static_cast<std::uint64_t>(trial));
        const Eigen::MatrixXd F = row2(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        run(PotentialSpec::quadratic(), env, F, ks[trial % 3]);
    }
    auto dw_spec = env_spec(Distribution::uniform(0.5, 2.0), CorrelationMode::IidPerEdge, 617);
    for (int trial = 0; trial < 15; ++trial) {
        EnvironmentSample env(dw_spec, static_cast<std::uint64_t>(trial));
        const Eigen::MatrixXd F = row2(1.5 * rng.uniform(), 1.5 * rng.uniform() - 0.75);
        run(PotentialSpec::double_well(), env, F, ks[trial % 3]);
    }
    detail = fmt("max (whom - m_F/k^d) = %.3g (tol 2e-8), ", worst) + std::to_string(violations) + " violations";
    return violations == 0;
}

// --------------------------------------------------------------------- 5
bool subadditive_doubling(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    CounterRng rng(55);
    const PotentialSpec quad = PotentialSpec::quadratic();
    double worst = -1e9;
    long violations = 0;
    auto spec = env_spec(Distribution::lognormal(0.0, 0.5), CorrelationMode::IidPerEdge, 717);
    for (int trial = 0; trial < 50; ++trial) {
        EnvironmentSample env(spec, static_cast<std::uint64_t>(trial));
        const int k = (trial % 2 == 0) ? 2 : 4;
        const Eigen::MatrixXd F = row2(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        double parts = 0.0;
        for (int sx = 0; sx < 2; ++sx)
            for (int sy = 0; sy < 2; ++sy) {
                const Eigen::Vector2d lo(sx * k, sy * k);
                parts += cell_mF(lat, env, quad, F, Region(lo, lo + Eigen::Vector2d(k, k)), cfg).total;
            }
        const double whole = cell_mF(lat, env, quad, F, Region::cube(2, 0.0, 2.0 * k), cfg).total;
        worst = std::max(worst, whole - parts);
        if (whole > parts + 8.0 * 1e-8) ++violations;
    }
    detail = fmt("max (m_F(2kY) - sum translates) = %.3g (tol 8e-8)", worst);
    return violations == 0;
}

// --------------------------------------------------------------------- 6
bool gradient_correctness(std::string& detail) {
    SolverConfig cfg;
    double max_rel = 0.0;
    const Region box = Region::cube(2, 0.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        for (int fam = 0; fam < 4; ++fam) {
            const bool vector_fam = (fam == 3);
            Lattice lat = vector_fam ? Lattice::validate(lattice_preset("zd-diag")) : zd_nn();
            const PotentialSpec pot = fam == 0   ? PotentialSpec::quadratic()
                                      : fam == 1 ? PotentialSpec::p_power(4.0)
                                      : fam == 2 ? PotentialSpec::double_well()
                                                 : PotentialSpec::vector_well();
            auto spec = env_spec(Distribution::uniform(0.5, 2.0), CorrelationMode::IidPerEdge,
                                 9000 + trial * 7 + fam);
            EnvironmentSample env(spec, 0);
            Field u = Field::over_region(lat, 1, box);
            randomize_field(u, 1300 + trial * 11 + fam);
            u.for_each_stored_node([&](const Eigen::VectorXi&, int, std::int64_t node) { u.set_free(node, true); });
            auto grad = energy_gradient(lat, env, pot, u, box, SumConvention::ZAnchored);

            CounterRng rng(31 + trial);
            for (int probe = 0; probe < 4; ++probe) {
                const std::int64_t node =
                    static_cast<std::int64_t>(rng.next() % static_cast<std::uint64_t>(u.num_nodes()));
                const int comp = static_cast<int>(rng.next() % static_cast<std::uint64_t>(lat.n()));
                const double h = 1e-5;
                double& slot = u.value(node)[comp];
                const double saved = slot;
                slot = saved + h;
                const double ep = assemble_energy(lat, env, pot, u, box, SumConvention::ZAnchored);
                slot = saved - h;
                const double em = assemble_energy(lat, env, pot, u, box, SumConvention::ZAnchored);
                slot = saved;
                const double fd = (ep - em) / (2.0 * h);
                const double an = grad[static_cast<std::size_t>(node) * lat.n() + comp];
                max_rel = std::max(max_rel, std::abs(an - fd) / (1.0 + std::abs(fd)));
            }
        }
    }
    detail = fmt("max relative gradient error = %.3g (tol 1e-5)", max_rel);
    return max_rel <= 1e-5;
}

// --------------------------------------------------------------------- 7
bool oracle_equivalence(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    CounterRng rng(77);
    double max_gap = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        auto spec = env_spec(Distribution::lognormal(0.0, 0.6), CorrelationMode::IidPerEdge, 7100 + trial);
        EnvironmentSample env(spec, 0);
        const Eigen::MatrixXd F = row2(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        const int k = (trial == 0) ? 64 : 2 + static_cast<int>(rng.next() % 15);  // up to 4096 unknowns
        CellProblem prob = CellProblem::periodic(lat, env, PotentialSpec::quadratic(), F, k);
        const double cg = minimize(prob, cfg).value;
        const double dense = oracle_dense(prob).value;
        max_gap = std::max(max_gap, std::abs(cg - dense) / (1.0 + std::abs(dense)));
    }
    bool grid_ok = true;
    double grid_gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = env_spec(Distribution::uniform(0.5, 2.0), CorrelationMode::IidPerEdge, 7300 + trial);
        EnvironmentSample env(spec, 0);
        const Eigen::MatrixXd F = row2(1.2 * rng.uniform(), 1.2 * rng.uniform() - 0.6);
        CellProblem prob = CellProblem::periodic(lat, env, PotentialSpec::double_well(), F, 2);
        SolverConfig dcfg;
        dcfg.seed = 7400 + trial;
        dcfg.multistart = 24;
        const double descent = minimize(prob, dcfg).value;
        const double oracle = oracle_grid(prob, GridSpec{41, 2.5}, dcfg).value;
        grid_gap = std::max(grid_gap, std::abs(descent - oracle));
        // grid resolution in value terms: spacing h = 2*2.5/40, curvature-level slack h^2
        const double h = 2.0 * 2.5 / 40.0;
        if (descent < oracle - 1e-8 || descent > oracle + h * h) grid_ok = false;
    }
    detail = fmt("max CG/dense gap = %.3g (tol 1e-7); ", max_gap) + fmt("max descent/grid gap = %.3g", grid_gap);
    return max_gap <= 1e-7 && grid_ok;
}

// --------------------------------------------------------------------- 8
bool exact_inequality_suites(std::string& detail) {
    Lattice lat = zd_nn();
    const Region small = Region::cube(2, 0.0, 3.0);
    long violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        auto spec = env_spec(Distribution::lognormal(0.0, 0.9), CorrelationMode::IidPerEdge, 8000 + trial);
        EnvironmentSample env(spec, 0);
        Field u = Field::over_region(lat, 1, small);
        randomize_field(u, 8100 + trial);
        const double p = 2.0 + (trial % 3);
        const double beta = 0.75 + 0.5 * (trial % 4);
        if (!coercivity_diagnostic(lat, env, u, small, p, beta).ok) ++violations;
    }
    for (int trial = 0; trial < 1000; ++trial) {
        auto spec = env_spec(Distribution::lognormal(0.0, 0.9), CorrelationMode::IidPerEdge, 8500 + trial);
        EnvironmentSample env(spec, 0);
        Field u = Field::over_region(lat, 1, small);
        randomize_field(u, 8600 + trial);
        if (!mu_edge_inequality_check(lat, env, u, small, 2.0 + (trial % 2)).ok) ++violations;
    }
    detail = std::to_string(violations) + " violations over 2000 trials (tol 0)";
    return violations == 0;
}

// --------------------------------------------------------------------- 9
bool path_family_structure(std::string& detail) {
    for (int d : {2, 3}) {
        for (int dir = 0; dir < d; ++dir) {
            auto family = canonical_path_family(d, dir, Eigen::VectorXi::Zero(d));
            if (family.size() != static_cast<std::size_t>(2 * d)) {
                detail = "family size mismatch";
                return false;
            }
            std::set<std::vector<int>> seen;
            for (const auto& path : family) {
                if (path.size() > 9) {
                    detail = "path longer than 9";
                    return false;
                }
                for (const auto& e : path) {
                    std::vector<int> key(e.z.data(), e.z.data() + e.z.size());
                    key.push_back(e.axis);
                    if (!seen.insert(key).second) {
                        detail = "paths share an edge";
                        return false;
                    }
                }
            }
        }
    }
    Lattice lat = zd_nn();
    FunctionWeights ones([](const Eigen::VectorXi&, int) { return 1.0; });
    if (std::abs(iid_mu(lat, ones, Eigen::VectorXi::Zero(2), 0, 2.0).mu - 1.0) > 1e-14) {
        detail = "mu(omega == 1) != 1";
        return false;
    }
    FunctionWeights expensive(
        [](const Eigen::VectorXi& z, int b) { return (b == 0 && z[0] == 0 && z[1] == 0) ? 16.0 : 1.0; });
    if (std::abs(iid_mu(lat, expensive, Eigen::VectorXi::Zero(2), 0, 2.0).mu - 4.0) > 1e-14) {
        detail = "weight-16 fixture: mu != 4";
        return false;
    }
    detail = "2d disjoint paths, lengths <= 9 (d = 2, 3); mu fixtures 1 and 4 exact";
    return true;
}

// --------------------------------------------------------------------- 10
bool degeneracy_trend(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    auto spec = env_spec(Distribution::pareto_inverse(1.0), CorrelationMode::LayeredE1, 1010);
    const PotentialSpec quad = PotentialSpec::quadratic();
    std::vector<double> v4, v32;
    long decreasing = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        EnvironmentSample env(spec, s);
        v4.push_back(whom_k(lat, env, quad, row2(1, 0), 4, cfg).value);
        v32.push_back(whom_k(lat, env, quad, row2(1, 0), 32, cfg).value);
        if (v32.back() < v4.back()) ++decreasing;
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return 0.5 * (v[v.size() / 2] + v[(v.size() - 1) / 2]);
    };
    const double m4 = median(v4), m32 = median(v32);
    detail = std::to_string(decreasing) + "/50 seeds decreasing (need 45); median " + fmt("%.3g", m32) + " vs " +
             fmt("0.5 * %.3g", m4);
    return decreasing >= 45 && m32 < 0.5 * m4;
}

// --------------------------------------------------------------------- 11
bool gamma_gap_trend(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    EnvironmentSpec env;
    env.distributions = {Distribution::lognormal(0.0, 0.5)};
    env.mode = CorrelationMode::IidPerEdge;
    env.seed = 1111;
    HomTensor tensor = extract_tensor(lat, env, PotentialSpec::quadratic(), 16, 16, cfg);

    auto g = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    const BodyForce force = BodyForce::constant(Eigen::VectorXd::Ones(1));
    const Region A = Region::cube(2, 0.0, 1.0);
    auto holder = std::make_shared<const EnvironmentSpec>(env);
    long improving = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        EnvironmentSample sample(holder, s);
        auto rows = gamma_gap_experiment(lat, sample, PotentialSpec::quadratic(), g, force, A, {8, 32}, tensor, cfg);
        if (rows[1].gap < rows[0].gap) ++improving;
    }
    detail = std::to_string(improving) + "/50 seeds with gap(1/32) < gap(1/8) (need 45)";
    return improving >= 45;
}

// --------------------------------------------------------------------- 12
bool gluing_contracts(std::string& detail) {
    Lattice lat = zd_nn();
    const PotentialSpec quad = PotentialSpec::quadratic();
    long violations = 0;

    for (int trial = 0; trial < 200; ++trial) {
        auto spec = env_spec(Distribution::uniform(0.5, 2.0), CorrelationMode::IidPerEdge, 12000 + trial);
        EnvironmentSample env(spec, 0);
        const Region A = Region::cube(2, 0.0, 768.0);
        Field u = Field::over_region(lat, 1, A);
        CounterRng rng(12100 + trial);
        const double slope = 0.5 * rng.uniform();
        sample_onto_field(lat, u, [&](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, slope * (x[0] - x[1]));
        });
        for (double& v : u.raw_values()) v += 0.5 * (2.0 * rng.uniform() - 1.0);
        auto ubar = [slope](const Eigen::VectorXd& x) {
            return Eigen::VectorXd::Constant(1, slope * (x[0] - x[1]));
        };
        GlueParams params{288.0, 1 + trial % 3, 0.3};
        const bool truncate = (trial % 2 == 1);
        auto [v, rep] = truncate ? glue_truncate(lat, env, quad, u, ubar, A, params)
                                 : glue_cutoff(lat, env, quad, u, ubar, A, params);
        Field ubf = u;
        sample_onto_field(lat, ubf, ubar);
        v.for_each_stored_node([&](const Eigen::VectorXi& cell, int off, std::int64_t node) {
            const Eigen::VectorXd pos = lat.node_position(1, cell, off);
            if (A.boundary_distance(pos) <= params.delta / 4.0 && v.value(node)[0] != ubf.value(node)[0]) ++violations;
            // non-expansive up to the ulp of forming ubar + phi (u - ubar)
            const double ulp_slack = 1e-13 * (1.0 + std::abs(ubf.value(node)[0]));
            if (std::abs(v.value(node)[0] - ubf.value(node)[0]) >
                std::abs(u.value(node)[0] - ubf.value(node)[0]) + ulp_slack)
                ++violations;
        });
        if (truncate && !truncation_factor_check(lat, u, ubar, params.s, A).ok) ++violations;
    }

    // Energy-increment trend over m in {2, 4, 8}. Pilot (seed 53, delta 728,
    // L 2048, two-point weights): increments decrease strictly; slack 5%.
    auto spec = env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::IidPerEdge, 51);
    EnvironmentSample env(spec, 0);
    const Region A = Region::cube(2, 0.0, 2048.0);
    Field u = Field::over_region(lat, 1, A);
    CounterRng rng(53);
    sample_onto_field(lat, u, [&](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, 0.25 * (x[0] + x[1]));
    });
    for (double& v : u.raw_values()) v += 0.4 * (2.0 * rng.uniform() - 1.0);
    auto ubar = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, 0.25 * (x[0] + x[1])); };
    const double e_orig = assemble_energy(lat, env, quad, u, A, SumConvention::ZAnchored);
    double prev = 0.0;
    bool first = true, trend_ok = true;
    for (int m : {2, 4, 8}) {
        GlueParams params{728.0, m, 1.0};
        auto [v, rep] = glue_cutoff(lat, env, quad, u, ubar, A, params);
        const double inc = rep.chosen_energy - e_orig;
        // pilot slack: 5% of the increment scale
        if (!first && inc > prev + 0.05 * (std::abs(prev) + 1.0)) trend_ok = false;
        prev = inc;
        first = false;
    }

    detail = std::to_string(violations) + " exactness violations; trend " + (trend_ok ? "non-increasing" : "BROKEN");
    return violations == 0 && trend_ok;
}

// --------------------------------------------------------------------- 13
bool poincare_suite(std::string& detail) {
    // Pilot (the pinned-seed suite below, 1000 trials): max implied C =
    // 0.04653; the suite asserts no regression beyond 10%.
    constexpr double kPilotC = 0.04653;
    Lattice lat = zd_nn();
    const Region master = Region::cube(2, -1.0, 3.0);
    struct ExponentSet {
        double p, q, alpha, beta;
    };
    const ExponentSet sets[3] = {{2, 2, 2, 2}, {2, 1, 2, 1}, {4, 2, 3, 1}};
    double max_c = 0.0;
    double scale_dev = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const bool lognormal = (trial % 2 == 1);
        auto spec = lognormal
                        ? env_spec(Distribution::lognormal(0.0, 0.5), CorrelationMode::IidPerEdge, 13000 + trial)
                        : env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::IidPerEdge, 13000 + trial);
        EnvironmentSample env(spec, 0);
        CounterRng rng(13100 + trial);
        const int eps_choices[4] = {4, 8, 16, 32};
        const int m = eps_choices[rng.next() % 4];
        const ExponentSet& ex = sets[trial % 3];
        // random cube in Q_eps inside [0,2)^2
        const int max_cells = 2 * m;
        const int side = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_cells / 2));
        Eigen::Vector2d lo, hi;
        for (int c = 0; c < 2; ++c) {
            const int start = static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_cells - side + 1));
            lo[c] = static_cast<double>(start) / m;
            hi[c] = static_cast<double>(start + side) / m;
        }
        const Region Q(lo, hi);
        Field u = Field::over_region(lat, m, master);
        randomize_field(u, 13200 + trial);
        PoincareEntry e = poincare_check(lat, env, u, Q, ex.p, ex.q, ex.alpha, ex.beta);
        max_c = std::max(max_c, e.implied_C);
        if (trial % 20 == 0) {
            ScaledWeights scaled(env, 41.5);
            PoincareEntry es = poincare_check(lat, scaled, u, Q, ex.p, ex.q, ex.alpha, ex.beta);
            scale_dev = std::max(scale_dev, std::abs(es.implied_C - e.implied_C) / (1.0 + e.implied_C));
        }
    }
    detail = fmt("max implied C = %.4g", max_c) + fmt(" (pilot %.4g * 1.1); ", kPilotC) +
             fmt("scaling deviation %.2g (tol 1e-12)", scale_dev);
    return max_c <= kPilotC * 1.1 && max_c > 0.0 && scale_dev <= 1e-12;
}

// --------------------------------------------------------------------- 14
bool growth_bounds(std::string& detail) {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    EstimateOptions opts;
    opts.with_sandwich = false;

    struct Case {
        EnvironmentSpec env;
        double mean;  // E[lambda]
    };
    std::vector<Case> cases;
    {
        EnvironmentSpec c1;
        c1.distributions = {Distribution::constant(1.0)};
        cases.push_back({c1, 1.0});
        EnvironmentSpec c2;
        c2.distributions = {Distribution::two_point(1.0, 4.0, 0.5)};
        c2.mode = CorrelationMode::LayeredE1;
        c2.seed = 4;
        cases.push_back({c2, 2.5});
        EnvironmentSpec c3;
        c3.distributions = {Distribution::lognormal(0.0, 0.5)};
        c3.seed = 9;
        cases.push_back({c3, std::exp(0.125)});
    }
    bool all_ok = true;
    for (const auto& c : cases) {
        for (const auto& F : {row2(1, 0), row2(0.5, -0.5), row2(0, 0)}) {
            WhomEstimate est = estimate_W0(lat, c.env, PotentialSpec::quadratic(), F, {4, 8}, 8, cfg, opts);
            GrowthCertificate cert = growth_bounds_check(est, {c.mean, c.mean}, 2.0, 1.0, false);
            if (!cert.upper_ok || !cert.positive_ok) all_ok = false;
        }
    }
    detail = all_ok ? "every W0 estimate inside the moment envelope, positive for F != 0"
                    : "an estimate escaped the envelope";
    return all_ok;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        bool (*run)(std::string&);
    };
    const std::vector<Criterion> criteria = {
        {"layered closed forms (harmonic / arithmetic means)", layered_closed_forms},
        {"layered p=4 explicit competitor upper bound", layered_p4_upper_bound},
        {"constant-coefficient exactness", constant_coefficient_exactness},
        {"sandwich inequality whom_k <= m_F(kY)/k^d", sandwich_inequality},
        {"subadditive doubling of m_F", subadditive_doubling},
        {"gradient correctness vs central differences", gradient_correctness},
        {"oracle equivalence (CG/dense, descent/grid)", oracle_equivalence},
        {"exact inequality suites (coercivity, per-edge mu)", exact_inequality_suites},
        {"canonical path family structure and mu fixtures", path_family_structure},
        {"degeneracy trend for pareto-inverse layers", degeneracy_trend},
        {"gamma gap trend vs the homogenized reference", gamma_gap_trend},
        {"gluing contracts (exactness, truncation, trend)", gluing_contracts},
        {"weighted Poincare suite with pilot constant", poincare_suite},
        {"growth bounds from moment envelopes", growth_bounds},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%2zu/14] %s %s%s%s\n", i + 1, ok ? "PASS" : "FAIL", criteria[i].name,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
