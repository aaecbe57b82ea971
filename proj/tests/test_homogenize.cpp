#include <doctest.h>

#include "helpers.hpp"

using namespace latthom;
using namespace test_support;

namespace {

Eigen::MatrixXd row2(double a, double b) {
    Eigen::MatrixXd F(1, 2);
    F << a, b;
    return F;
}

EnvironmentSample layered_cycle(std::vector<double> layers) {
    return EnvironmentSample(env_spec(Distribution::cycle(std::move(layers)), CorrelationMode::LayeredE1, 0), 0);
}

}  // namespace

TEST_CASE("layered quadratic fixture: harmonic 1.6 along e1, arithmetic 2.5 across") {
    Lattice lat = zd_nn();
    EnvironmentSample env = layered_cycle({1.0, 4.0});
    SolverConfig cfg;
    const double v1 = whom_k(lat, env, PotentialSpec::quadratic(), row2(1, 0), 2, cfg).value;
    const double v2 = whom_k(lat, env, PotentialSpec::quadratic(), row2(0, 1), 2, cfg).value;
    CHECK(v1 == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(v2 == doctest::Approx(2.5).epsilon(1e-10));
    // closed-form helpers agree
    CHECK(layered_value_e1({1.0, 4.0}, 1.0, 2.0) == doctest::Approx(1.6));
    CHECK(layered_value_transverse({1.0, 4.0}, 1.0) == doctest::Approx(2.5));
}

TEST_CASE("layered p=4 fixture stays under the explicit competitor bound 64/27") {
    Lattice lat = zd_nn();
    EnvironmentSample env = layered_cycle({1.0, 8.0});
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    const double bound = layered_value_e1({1.0, 8.0}, 1.0, 4.0);
    CHECK(bound == doctest::Approx(64.0 / 27.0).epsilon(1e-12));
    const double value = whom_k(lat, env, PotentialSpec::p_power(4.0), row2(1, 0), 2, cfg).value;
    CHECK(value <= bound + 1e-6);
}

TEST_CASE("constant coefficients are exact for every convex family at k in {1,2,4}") {
    Lattice lat = zd_nn();
    EnvironmentSample env = constant_env(1.3);
    SolverConfig cfg;
    CounterRng rng(99);
    for (const auto& pot : {PotentialSpec::quadratic(), PotentialSpec::p_power(3.0), PotentialSpec::p_power(4.0)}) {
        const Eigen::MatrixXd F = row2(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        double expected = 0.0;
        for (int b = 0; b < lat.num_edges(); ++b)
            expected += 1.3 * std::pow(std::abs((F * lat.edge(b).dir)(0, 0)), pot.p);
        for (int k : {1, 2, 4}) {
            const double value = whom_k(lat, env, pot, F, k, cfg).value;
            CHECK(value == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("m_F with constant convex coefficients equals the affine energy") {
    Lattice lat = zd_nn();
    EnvironmentSample env = constant_env(1.0);
    SolverConfig cfg;
    const Eigen::MatrixXd F = row2(1.0, -0.5);
    // k = 16 has genuine interior freedom (16 > 2R); zero corrector stays optimal
    const Region region = Region::cube(2, 0.0, 16.0);
    CellProblemResult res = cell_mF(lat, env, PotentialSpec::quadratic(), F, region, cfg);
    const double expected = 1.0 * (1.0 + 0.25);
    CHECK(res.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("m_F is stationary: shifted environment equals shifted region") {
    Lattice lat = zd_nn();
    auto spec = env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::IidPerEdge, 42);
    EnvironmentSample base(spec, 0);
    Eigen::VectorXi shift(2);
    shift << 3, -2;
    FunctionWeights shifted([&](const Eigen::VectorXi& z, int b) { return base(Eigen::VectorXi(z + shift), b); });

    SolverConfig cfg;
    cfg.tolerance = 1e-11;
    const Eigen::MatrixXd F = row2(1.0, 0.0);
    const Region cell0 = Region::cube(2, 0.0, 14.0);
    const Region cell1(shift.cast<double>(), shift.cast<double>() + Eigen::Vector2d(14.0, 14.0));
    const double a = cell_mF(lat, shifted, PotentialSpec::quadratic(), F, cell0, cfg).total;
    const double b = cell_mF(lat, base, PotentialSpec::quadratic(), F, cell1, cfg).total;
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("subadditivity: the doubled cell costs at most the four translates") {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    const Eigen::MatrixXd F = row2(0.7, 0.4);
    for (int trial = 0; trial < 3; ++trial) {
        auto spec = env_spec(Distribution::lognormal(0.0, 0.6), CorrelationMode::IidPerEdge, 500 + trial);
        EnvironmentSample env(spec, 0);
        const int k = 16;
        const Region big = Region::cube(2, 0.0, 2.0 * k);
        double sum_parts = 0.0;
        for (int sx = 0; sx < 2; ++sx)
            for (int sy = 0; sy < 2; ++sy) {
                const Eigen::Vector2d lo(sx * k, sy * k);
                sum_parts +=
                    cell_mF(lat, env, PotentialSpec::quadratic(), F, Region(lo, lo + Eigen::Vector2d(k, k)), cfg).total;
            }
        const double whole = cell_mF(lat, env, PotentialSpec::quadratic(), F, big, cfg).total;
        CHECK(whole <= sum_parts + 8.0 * 1e-8);
    }
}

TEST_CASE("sandwich: whom_k never exceeds m_F(kY)/k^d") {
    Lattice lat = zd_nn();
    SolverConfig cfg;
    EstimateOptions opts;
    SUBCASE("quadratic at k = 16 (free interior)") {
        EnvironmentSpec env;
        env.distributions = {Distribution::two_point(1.0, 4.0, 0.5)};
        env.mode = CorrelationMode::IidPerEdge;
        env.seed = 7;
        WhomEstimate est = estimate_W0(lat, env, PotentialSpec::quadratic(), row2(1, 0), {16}, 4, cfg, opts);
        for (const auto& rec : est.records) CHECK(rec.sandwich_ok);
    }
    SUBCASE("double well with matched multistart seeds") {
        EnvironmentSpec env;
        env.distributions = {Distribution::uniform(0.5, 2.0)};
        env.mode = CorrelationMode::IidPerEdge;
        env.seed = 8;
        WhomEstimate est = estimate_W0(lat, env, PotentialSpec::double_well(), row2(1, 0), {16}, 3, cfg, opts);
        CHECK(est.upper_bound_only);
        for (const auto& rec : est.records) CHECK(rec.sandwich_ok);
    }
}

TEST_CASE("estimate_W0 on a constant environment is exact with zero uncertainty") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::constant(2.0)};
    env.mode = CorrelationMode::IidPerEdge;
    WhomEstimate est = estimate_W0(lat, env, PotentialSpec::quadratic(), row2(1, 0), {1, 2}, 2, SolverConfig{});
    CHECK(est.estimate == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(est.uncertainty <= 1e-10);
}

TEST_CASE("layered two-point estimates approach the harmonic mean limit") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::two_point(1.0, 4.0, 0.5)};
    env.mode = CorrelationMode::LayeredE1;
    env.seed = 2;
    SolverConfig cfg;
    WhomEstimate est = estimate_W0(lat, env, PotentialSpec::quadratic(), row2(1, 0), {4, 16}, 24, cfg);
    // E[(k^{-1} sum 1/omega)^{-1}] -> (E[1/omega])^{-1} = 1.6 as k grows
    CHECK(est.mean.back() == doctest::Approx(1.6).epsilon(0.15));
    // W0 estimate respects the growth envelope
    GrowthCertificate cert = growth_bounds_check(est, {2.5, 2.5}, 2.0, 1.0);
    CHECK(cert.upper_ok);
    CHECK(cert.positive_ok);
}

TEST_CASE("degenerate layered weights drive the e1 density toward zero") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::pareto_inverse(1.0)};
    env.mode = CorrelationMode::LayeredE1;
    env.seed = 77;
    SolverConfig cfg;
    EstimateOptions opts;
    opts.with_sandwich = false;
    WhomEstimate est = estimate_W0(lat, env, PotentialSpec::quadratic(), row2(1, 0), {4, 32}, 12, cfg, opts);
    CHECK(est.mean.back() < est.mean.front());
}

TEST_CASE("tensor of the unit-weight square lattice is twice the identity") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::constant(1.0)};
    env.mode = CorrelationMode::IidPerEdge;
    HomTensor t = extract_tensor(lat, env, PotentialSpec::quadratic(), 2, 1, SolverConfig{});
    CHECK(t.L.rows() == 2);
    CHECK(t.L(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(t.L(1, 1) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(t.L(0, 1)) < 1e-10);
    CHECK(t.min_eigenvalue == doctest::Approx(2.0).epsilon(1e-9));
    CHECK((t.L - t.L.transpose()).norm() == 0.0);  // symmetric by construction
}

TEST_CASE("tensor of the layered (1,4) medium is diag(3.2, 5)") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::cycle({1.0, 4.0})};
    env.mode = CorrelationMode::LayeredE1;
    HomTensor t = extract_tensor(lat, env, PotentialSpec::quadratic(), 2, 1, SolverConfig{});
    CHECK(t.L(0, 0) == doctest::Approx(3.2).epsilon(1e-9));
    CHECK(t.L(1, 1) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(std::abs(t.L(0, 1)) < 1e-8);
    CHECK(t.min_eigenvalue > 0.0);
}

TEST_CASE("relabelling the generating edges changes no value bit") {
    // Validation normalizes edges0 to a canonical order, so a permuted spec
    // yields bitwise-identical energies and cell-problem values.
    LatticeSpec base = lattice_preset("zd-diag");
    LatticeSpec shuffled = base;
    std::vector<std::size_t> perm = {5, 2, 7, 0, 3, 6, 1, 4};
    for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled.edges0[i] = base.edges0[perm[i]];
        shuffled.nn0_mask[i] = base.nn0_mask[perm[i]];
    }
    Lattice a = Lattice::validate(base);
    Lattice b = Lattice::validate(shuffled);
    REQUIRE(a.num_edges() == b.num_edges());
    for (int e = 0; e < a.num_edges(); ++e) {
        CHECK((a.edge(e).y - b.edge(e).y).norm() == 0.0);
        CHECK(a.is_nn(e) == b.is_nn(e));
    }
    auto spec = env_spec(Distribution::lognormal(0.0, 0.5), CorrelationMode::IidPerEdge, 77);
    EnvironmentSample env(spec, 0);
    Eigen::MatrixXd F(2, 2);
    F << 1.0, 0.25, -0.5, 0.75;
    SolverConfig cfg;
    const double va = whom_k(a, env, PotentialSpec::quadratic(), F, 3, cfg).value;
    const double vb = whom_k(b, env, PotentialSpec::quadratic(), F, 3, cfg).value;
    CHECK(va == vb);
}

TEST_CASE("tensor extraction rejects nonquadratic families") {
    Lattice lat = zd_nn();
    EnvironmentSpec env;
    env.distributions = {Distribution::constant(1.0)};
    CHECK_THROWS_WITH_AS(
        static_cast<void>(extract_tensor(lat, env, PotentialSpec::double_well(), 2, 1, SolverConfig{})),
        doctest::Contains("NotQuadratic"), Error);
}

TEST_CASE("gamma gap shrinks with eps for a constant environment") {
    Lattice lat = zd_nn();
    EnvironmentSample env = constant_env(1.0);
    EnvironmentSpec env_spec_obj;
    env_spec_obj.distributions = {Distribution::constant(1.0)};
    HomTensor tensor = extract_tensor(lat, env_spec_obj, PotentialSpec::quadratic(), 2, 1, SolverConfig{});

    auto g = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    BodyForce force = BodyForce::constant(const_vec(1, 1.0));
    const Region A = Region::cube(2, 0.0, 1.0);
    auto rows = gamma_gap_experiment(lat, env, PotentialSpec::quadratic(), g, force, A, {8, 16, 32}, tensor,
                                     SolverConfig{});
    REQUIRE(rows.size() == 3);
    // discretization-only gap decreases in 1/eps
    CHECK(rows[2].gap <= rows[0].gap + 1e-12);
    CHECK(rows[2].gap <= rows[1].gap + 1e-12);
}

TEST_CASE("dirichlet minima per volume approach W0 for affine data") {
    Lattice lat = zd_nn();
    auto spec = env_spec(Distribution::two_point(1.0, 4.0, 0.5), CorrelationMode::IidPerEdge, 3);
    EnvironmentSample env(spec, 0);
    SolverConfig cfg;
    const Eigen::MatrixXd F = row2(1.0, 0.0);
    // min over A^eps_g of E_eps / |A| at shrinking eps == m_F(1/eps Q)/|1/eps Q|
    const double coarse = cell_mF(lat, env, PotentialSpec::quadratic(), F, Region::cube(2, 0.0, 16.0), cfg).value;
    const double fine = cell_mF(lat, env, PotentialSpec::quadratic(), F, Region::cube(2, 0.0, 48.0), cfg).value;
    EnvironmentSpec espec;
    espec.distributions = {Distribution::two_point(1.0, 4.0, 0.5)};
    espec.seed = 3;
    EstimateOptions opts;
    opts.with_sandwich = false;
    const double w0 = estimate_W0(lat, espec, PotentialSpec::quadratic(), F, {32}, 16, cfg, opts).estimate;
    CHECK(std::abs(fine - w0) <= std::abs(coarse - w0) + 0.05);
}
