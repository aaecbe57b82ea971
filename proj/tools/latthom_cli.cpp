// latthom command-line driver: parses one JSON experiment config, dispatches
// to the library, and writes CSV/JSON results suitable for plotting and CI
// assertions. Outputs are deterministic in (config, seed) and written
// atomically. Exit codes: 0 success, 2 config error, 3 numerical failure,
// 4 property-check failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "latthom/gluing.hpp"
#include "latthom/homogenize.hpp"
#include "latthom/inequalities.hpp"
#include "latthom/io.hpp"

using nlohmann::json;
namespace lth = latthom;

namespace {

struct CliContext {
    json config;
    std::string hash;
    std::filesystem::path out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    bool trace = false;
    std::vector<std::string> trace_lines;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lth::config_error("ConfigInvalid", "cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw lth::config_error("ConfigInvalid", std::string("config is not valid JSON: ") + e.what());
    }
    return j;
}

lth::Lattice lattice_from_config(const json& cfg) {
    if (!cfg.contains("lattice")) throw lth::config_error("ConfigInvalid", "config lacks a lattice entry");
    const json& j = cfg.at("lattice");
    if (j.is_string()) return lth::Lattice::validate(lth::lattice_preset(j.get<std::string>()));
    if (j.contains("preset"))
        return lth::Lattice::validate(
            lth::lattice_preset(j.at("preset").get<std::string>(), j.value("d", 2), j.value("n", -1)));
    return lth::Lattice::validate(lth::lattice_from_json(j.dump()));
}

lth::EnvironmentSpec environment_from_config(const json& cfg, std::uint64_t seed_override) {
    if (!cfg.contains("environment")) throw lth::config_error("ConfigInvalid", "config lacks an environment entry");
    lth::EnvironmentSpec env = lth::environment_from_json(cfg.at("environment").dump());
    if (seed_override != 0) env.seed = seed_override;
    return env;
}

lth::PotentialSpec potential_from_config(const json& cfg) {
    if (!cfg.contains("potential")) throw lth::config_error("ConfigInvalid", "config lacks a potential entry");
    return lth::potential_from_json(cfg.at("potential").dump());
}

Eigen::MatrixXd matrix_from_json(const json& j, int n, int d) {
    Eigen::MatrixXd F(n, d);
    if (static_cast<int>(j.size()) != n) throw lth::config_error("ConfigInvalid", "F has wrong row count");
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) F(r, c) = j.at(r).at(c).get<double>();
    return F;
}

lth::Region region_from_json(const json& j) {
    const auto lo = j.at("lo").get<std::vector<double>>();
    const auto hi = j.at("hi").get<std::vector<double>>();
    return lth::Region(Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<int>(lo.size())),
                       Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<int>(hi.size())));
}

lth::SolverConfig solver_from_config(const CliContext& ctx) {
    lth::SolverConfig sc;
    if (ctx.config.contains("solver")) {
        const json& j = ctx.config.at("solver");
        sc.tolerance = j.value("tolerance", sc.tolerance);
        sc.max_iterations = j.value("max_iterations", sc.max_iterations);
        sc.multistart = j.value("multistart", sc.multistart);
        sc.seed = j.value("seed", sc.seed);
        sc.start_amplitude = j.value("start_amplitude", sc.start_amplitude);
    }
    sc.threads = 1;  // per-solve determinism; parallelism lives at the sample level
    return sc;
}

// Named cross-field validation: every rejection cites the violated constraint.
void validate_assumptions(const CliContext& ctx, const lth::Lattice& lattice, const lth::PotentialSpec& pot) {
    if (!ctx.config.contains("exponents")) return;
    const json& e = ctx.config.at("exponents");
    const double p = e.value("p", pot.p);
    const double alpha = e.value("alpha", 1.0);
    const double beta = e.value("beta", 1.0 / (p - 1.0));
    if (alpha < 1.0 || beta < 1.0 / (p - 1.0))
        throw lth::config_error("ConfigInvalid",
                                "Assumption 2.2 (moment exponents): requires alpha >= 1 and beta >= 1/(p-1)");
    const bool vectorial = lattice.n() > 1;
    if (vectorial && !pot.companion) {
        if (!(alpha > 1.0) || 1.0 / alpha + 1.0 / beta > p / static_cast<double>(lattice.d()) + 1e-12)
            throw lth::config_error("ConfigInvalid", "Assumption 2.3(A): 1/alpha + 1/beta > p/d");
    }
}

void write_summary(const CliContext& ctx, const std::string& command, json results) {
    json summary;
    summary["command"] = command;
    summary["config_hash"] = ctx.hash;
    summary["seed"] = ctx.seed;
    summary["results"] = std::move(results);
    lth::write_file_atomic(ctx.out_dir / "summary.json", summary.dump(2) + "\n");
}

void flush_trace(const CliContext& ctx) {
    if (!ctx.trace || ctx.trace_lines.empty()) return;
    std::string text;
    for (const auto& l : ctx.trace_lines) text += l + "\n";
    lth::write_file_atomic(ctx.out_dir / "trace.jsonl", text);
}

// ---------------------------------------------------------------------------

int cmd_moments(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    const json& e = ctx.config.value("exponents", json::object());
    const double p = e.value("p", 2.0);
    const double alpha = e.value("alpha", 1.0);
    const double beta = e.value("beta", 1.0 / (p - 1.0));
    const long samples = ctx.config.value("samples", 10000L);

    lth::MomentReport report = lth::estimate_moments(lattice, env, alpha, beta, p, samples, ctx.threads);
    lth::CsvWriter csv("moments", ctx.hash,
                       {"b_index", "alpha_moment", "alpha_se", "beta_moment", "beta_se", "divergent_flag"});
    for (const auto& entry : report.entries)
        csv.row(entry.b, entry.alpha_moment, entry.alpha_se, entry.beta_moment, entry.beta_se,
                entry.divergent ? 1 : 0);
    csv.save(ctx.out_dir / "moments.csv");

    json res;
    res["alpha"] = alpha;
    res["beta"] = beta;
    res["exponents_admissible"] = report.exponents_admissible;
    res["assumption_A"] = report.assumption_A;
    write_summary(ctx, "moments", res);
    return 0;
}

int cmd_cell(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    lth::PotentialSpec pot = potential_from_config(ctx.config);
    validate_assumptions(ctx, lattice, pot);
    env.check(lattice);
    lth::SolverConfig solver = solver_from_config(ctx);
    if (ctx.trace)
        solver.trace = [&](long it, double obj, double gn) {
            json line = {{"iteration", it}, {"objective", obj}, {"grad_norm", gn}};
            ctx.trace_lines.push_back(line.dump());
        };

    const int k = ctx.config.value("k", 4);
    lth::Region region = ctx.config.contains("region") ? region_from_json(ctx.config.at("region"))
                                                       : lth::Region::cube(lattice.d(), 0.0, k);
    Eigen::MatrixXd F = ctx.config.contains("F")
                            ? matrix_from_json(ctx.config.at("F"), lattice.n(), lattice.d())
                            : Eigen::MatrixXd::Identity(lattice.n(), lattice.d());
    const long samples = ctx.config.value("samples", 1L);
    auto holder = std::make_shared<const lth::EnvironmentSpec>(env);

    lth::CsvWriter csv("cell", ctx.hash,
                       {"sample", "total", "value_per_volume", "iterations", "grad_norm", "converged"});
    json res;
    for (long s = 0; s < samples; ++s) {
        lth::EnvironmentSample sample(holder, static_cast<std::uint64_t>(s));
        lth::CellProblemResult r = lth::cell_mF(lattice, sample, pot, F, region, solver);
        csv.row(s, r.total, r.value, r.solve.iterations, r.solve.grad_norm, r.solve.converged ? 1 : 0);
        if (s == 0) res["first_value_per_volume"] = r.value;
    }
    csv.save(ctx.out_dir / "cell.csv");
    write_summary(ctx, "cell", res);
    return 0;
}

int cmd_homogenize(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    lth::PotentialSpec pot = potential_from_config(ctx.config);
    validate_assumptions(ctx, lattice, pot);
    env.check(lattice);
    lth::SolverConfig solver = solver_from_config(ctx);

    std::vector<int> schedule = ctx.config.value("k_schedule", std::vector<int>{4, 8, 16, 32});
    const long samples = ctx.config.value("samples", 32L);
    Eigen::MatrixXd F = ctx.config.contains("F")
                            ? matrix_from_json(ctx.config.at("F"), lattice.n(), lattice.d())
                            : Eigen::MatrixXd::Identity(lattice.n(), lattice.d());

    lth::EstimateOptions opts;
    opts.threads = ctx.threads;
    lth::WhomEstimate est = lth::estimate_W0(lattice, env, pot, F, schedule, samples, solver, opts);

    std::string f_flat;
    for (int r = 0; r < F.rows(); ++r)
        for (int c = 0; c < F.cols(); ++c) f_flat += (f_flat.empty() ? "" : ";") + std::to_string(F(r, c));

    lth::CsvWriter csv("homogenize", ctx.hash,
                       {"F_flat", "k", "sample", "value", "m_F_value", "sandwich_ok", "iterations"});
    for (const auto& rec : est.records)
        csv.row(f_flat, rec.k, rec.sample, rec.value, rec.m_f_value, rec.sandwich_ok ? 1 : 0, rec.iterations);
    csv.save(ctx.out_dir / "homogenize.csv");

    // Growth certificate against the moment envelope.
    const json& e = ctx.config.value("exponents", json::object());
    lth::MomentReport moments = lth::estimate_moments(lattice, env, e.value("alpha", 1.0),
                                                      e.value("beta", 1.0 / (pot.p - 1.0)), pot.p, 20000, ctx.threads);
    std::vector<double> means;
    for (const auto& entry : moments.entries) means.push_back(entry.alpha_moment);
    lth::GrowthCertificate cert = lth::growth_bounds_check(est, means, pot.p, pot.c1);

    json res;
    res["estimate"] = est.estimate;
    res["uncertainty"] = est.uncertainty;
    res["upper_bound_only"] = est.upper_bound_only;
    res["per_k_mean"] = est.mean;
    res["per_k_se"] = est.standard_error;
    res["certificates"] = {{"growth_upper_envelope", cert.upper_envelope},
                           {"growth_upper_ok", cert.upper_ok},
                           {"positive_ok", cert.positive_ok}};
    bool all_sandwich = true;
    for (const auto& rec : est.records) all_sandwich = all_sandwich && rec.sandwich_ok;
    res["certificates"]["sandwich_ok"] = all_sandwich;
    write_summary(ctx, "homogenize", res);
    if (!all_sandwich) throw lth::property_error("SandwichViolated", "a sample violated whom_k <= m_F(kY)/k^d");
    return 0;
}

int cmd_tensor(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    lth::PotentialSpec pot = potential_from_config(ctx.config);
    env.check(lattice);
    lth::SolverConfig solver = solver_from_config(ctx);
    const int k = ctx.config.value("k", 8);
    const long samples = ctx.config.value("samples", 16L);

    lth::HomTensor tensor = lth::extract_tensor(lattice, env, pot, k, samples, solver, ctx.threads);

    lth::CsvWriter csv("tensor", ctx.hash, {"a", "b", "L_ab"});
    for (int a = 0; a < tensor.L.rows(); ++a)
        for (int b = 0; b < tensor.L.cols(); ++b) csv.row(a, b, tensor.L(a, b));
    csv.save(ctx.out_dir / "tensor.csv");

    json res;
    res["k"] = k;
    res["samples"] = samples;
    res["L"] = json::array();
    for (int a = 0; a < tensor.L.rows(); ++a) {
        json row = json::array();
        for (int b = 0; b < tensor.L.cols(); ++b) row.push_back(tensor.L(a, b));
        res["L"].push_back(row);
    }
    res["eigenvalues"] = std::vector<double>(tensor.eigenvalues.data(),
                                             tensor.eigenvalues.data() + tensor.eigenvalues.size());
    res["min_eigenvalue"] = tensor.min_eigenvalue;
    write_summary(ctx, "tensor", res);
    return 0;
}

int cmd_layered_verify(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::PotentialSpec pot = lth::PotentialSpec::quadratic();
    lth::SolverConfig solver = solver_from_config(ctx);
    if (!lattice.is_hypercubic_nn())
        throw lth::config_error("ConfigInvalid", "layered-verify runs on the hyper-cubic lattice");
    const int d = lattice.d();

    lth::CsvWriter csv("layered_verify", ctx.hash, {"direction", "k", "sample", "value", "oracle", "abs_err"});
    double max_err = 0.0;
    auto run_case = [&](const lth::Weights& w, int k, long s) {
        const std::vector<double> layers = lth::read_layer_weights(lattice, w, k);
        for (int dir = 0; dir < 2; ++dir) {
            Eigen::MatrixXd F = Eigen::MatrixXd::Zero(1, d);
            F(0, dir) = 1.0;
            const double value = lth::whom_k(lattice, w, pot, F, k, solver).value;
            const double oracle =
                dir == 0 ? lth::layered_value_e1(layers, 1.0, 2.0) : lth::layered_value_transverse(layers, 1.0);
            const double err = std::abs(value - oracle);
            max_err = std::max(max_err, err);
            csv.row(dir == 0 ? "e1" : "e2", k, s, value, oracle, err);
        }
    };

    // Deterministic fixture: layers (1,4) at k = 2 give 1.6 and 2.5 exactly.
    {
        auto fixture = std::make_shared<const lth::EnvironmentSpec>(
            lth::EnvironmentSpec{{lth::Distribution::cycle({1.0, 4.0})}, lth::CorrelationMode::LayeredE1, 0});
        run_case(lth::EnvironmentSample(fixture, 0), 2, -1);
    }
    // Random two-point layers across the schedule.
    lth::EnvironmentSpec env{{lth::Distribution::two_point(1.0, 4.0, 0.5)}, lth::CorrelationMode::LayeredE1, ctx.seed};
    env.check(lattice);
    auto holder = std::make_shared<const lth::EnvironmentSpec>(env);
    const std::vector<int> schedule = ctx.config.value("k_schedule", std::vector<int>{2, 4, 8});
    const long samples = ctx.config.value("samples", 5L);
    for (int k : schedule)
        for (long s = 0; s < samples; ++s) run_case(lth::EnvironmentSample(holder, static_cast<std::uint64_t>(s)), k, s);
    csv.save(ctx.out_dir / "layered_verify.csv");

    json res;
    res["max_abs_err"] = max_err;
    res["tolerance"] = 1e-8;
    write_summary(ctx, "layered-verify", res);
    if (max_err > 1e-8)
        throw lth::property_error("LayeredMismatch", "solver value deviates from the layered closed form");
    return 0;
}

int cmd_dirichlet(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    lth::PotentialSpec pot = potential_from_config(ctx.config);
    env.check(lattice);
    lth::SolverConfig solver = solver_from_config(ctx);

    lth::Region A = ctx.config.contains("region") ? region_from_json(ctx.config.at("region"))
                                                  : lth::Region::cube(lattice.d(), 0.0, 1.0);
    std::vector<int> eps_schedule = ctx.config.value("eps_schedule", std::vector<int>{8, 16, 32});

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(lattice.n(), lattice.d());
    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(lattice.n());
    if (ctx.config.contains("g")) {
        const json& gj = ctx.config.at("g");
        if (gj.contains("F")) G = matrix_from_json(gj.at("F"), lattice.n(), lattice.d());
        if (gj.contains("c")) {
            const auto c = gj.at("c").get<std::vector<double>>();
            g0 = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<int>(c.size()));
        }
    }
    auto g = [G, g0](const Eigen::VectorXd& x) -> Eigen::VectorXd { return G * x + g0; };

    lth::BodyForce force = lth::BodyForce::zero(lattice.n());
    if (ctx.config.contains("force")) {
        const json& fj = ctx.config.at("force");
        if (fj.value("kind", "zero") == "constant") {
            const auto v = fj.at("value").get<std::vector<double>>();
            force = lth::BodyForce::constant(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size())));
        }
    }

    const int tensor_k = ctx.config.value("tensor_k", 16);
    const long tensor_samples = ctx.config.value("tensor_samples", 16L);
    lth::HomTensor tensor = lth::extract_tensor(lattice, env, pot, tensor_k, tensor_samples, solver, ctx.threads);

    lth::EnvironmentSample sample(std::make_shared<const lth::EnvironmentSpec>(env), 0);
    auto rows = lth::gamma_gap_experiment(lattice, sample, pot, g, force, A, eps_schedule, tensor, solver);

    lth::CsvWriter csv("dirichlet_gap", ctx.hash, {"eps_den", "min_J_eps", "min_J_hom", "gap"});
    for (const auto& r : rows) csv.row(r.eps_den, r.min_J_eps, r.min_J_hom, r.gap);
    csv.save(ctx.out_dir / "dirichlet.csv");

    json res;
    res["rows"] = json::array();
    for (const auto& r : rows)
        res["rows"].push_back({{"eps_den", r.eps_den}, {"gap", r.gap}});
    res["min_J_hom"] = rows.empty() ? 0.0 : rows.front().min_J_hom;
    write_summary(ctx, "dirichlet", res);
    return 0;
}

int cmd_poincare(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    env.check(lattice);
    const json& e = ctx.config.value("exponents", json::object());
    const double p = e.value("p", 2.0);
    const double q = e.value("q", 2.0);
    const double alpha = e.value("alpha", 2.0);
    const double beta = e.value("beta", 2.0);
    const long trials = ctx.config.value("samples", 100L);
    const std::vector<int> eps_schedule = ctx.config.value("eps_schedule", std::vector<int>{4, 8, 16, 32});

    auto holder = std::make_shared<const lth::EnvironmentSpec>(env);
    lth::CsvWriter csv("poincare", ctx.hash,
                       {"trial", "eps_den", "q_lo", "q_side", "lhs", "rhs_without_C", "implied_C", "m_alpha", "m_beta"});
    double max_c = 0.0;
    for (long t = 0; t < trials; ++t) {
        lth::CounterRng rng(lth::hash_combine(ctx.seed, 0x706f69ULL + static_cast<std::uint64_t>(t)));
        const int m = eps_schedule[static_cast<std::size_t>(rng.next() % eps_schedule.size())];
        // Random eps-aligned cube inside [0,2)^d.
        const int max_cells = 2 * m;
        const int side = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::max(1, max_cells / 2)));
        Eigen::VectorXd lo(lattice.d()), hi(lattice.d());
        for (int c = 0; c < lattice.d(); ++c) {
            const int start = static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_cells - side + 1));
            lo[c] = static_cast<double>(start) / m;
            hi[c] = static_cast<double>(start + side) / m;
        }
        lth::Region Q(lo, hi);
        lth::Region master = lth::Region::cube(lattice.d(), -1.0, 3.0);
        lth::Field field = lth::Field::over_region(lattice, m, master);
        const std::uint64_t fs = rng.next();
        lth::sample_onto_field(lattice, field, [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd v(lattice.n());
            for (int c = 0; c < lattice.n(); ++c) {
                const std::uint64_t h = lth::hash_combine(
                    lth::hash_combine(fs, static_cast<std::uint64_t>(c)),
                    lth::hash_combine(static_cast<std::uint64_t>(std::llround(x[0] * 4096)),
                                      static_cast<std::uint64_t>(std::llround(x[1 % x.size()] * 4096))));
                v[c] = 0.5 * x.sum() + lth::normal_quantile(lth::to_unit_open(h));
            }
            return v;
        });
        lth::EnvironmentSample sample(holder, static_cast<std::uint64_t>(t));
        lth::PoincareEntry entry = lth::poincare_check(lattice, sample, field, Q, p, q, alpha, beta);
        max_c = std::max(max_c, entry.implied_C);
        csv.row(t, entry.eps_den, lo[0], hi[0] - lo[0], entry.lhs, entry.rhs_without_C, entry.implied_C, entry.m_alpha,
                entry.m_beta);
    }
    csv.save(ctx.out_dir / "poincare.csv");

    json res;
    res["max_implied_C"] = max_c;
    res["trials"] = trials;
    write_summary(ctx, "poincare", res);
    return 0;
}

int cmd_mu(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    env.check(lattice);
    const json& e = ctx.config.value("exponents", json::object());
    const double p = e.value("p", 2.0);
    const double beta = e.value("beta", 1.0 / (p - 1.0));
    const double gamma = e.value("gamma", 1.0);
    const long samples = ctx.config.value("samples", 10000L);

    // Canonical path families for documentation rendering.
    json paths_doc;
    paths_doc["d"] = lattice.d();
    paths_doc["families"] = json::array();
    for (int dir = 0; dir < lattice.d(); ++dir) {
        json fam;
        fam["direction"] = dir;
        fam["paths"] = json::array();
        for (const auto& path : lth::canonical_path_family(lattice.d(), dir, Eigen::VectorXi::Zero(lattice.d()))) {
            json pj = json::array();
            for (const auto& edge : path) {
                json ej;
                ej["z"] = std::vector<int>(edge.z.data(), edge.z.data() + edge.z.size());
                ej["axis"] = edge.axis;
                pj.push_back(ej);
            }
            fam["paths"].push_back(pj);
        }
        paths_doc["families"].push_back(fam);
    }
    lth::write_file_atomic(ctx.out_dir / "mu_paths.json", paths_doc.dump(2) + "\n");

    auto holder = std::make_shared<const lth::EnvironmentSpec>(env);
    lth::CsvWriter csv("mu", ctx.hash, {"sample", "direction", "mu", "min_path_index"});
    const long shown = std::min<long>(samples, 64);
    for (long s = 0; s < shown; ++s) {
        lth::EnvironmentSample sample(holder, static_cast<std::uint64_t>(s));
        for (int dir = 0; dir < lattice.d(); ++dir) {
            lth::PathWeight pw = lth::iid_mu(lattice, sample, Eigen::VectorXi::Zero(lattice.d()), dir, p);
            csv.row(s, dir, pw.mu, pw.min_index);
        }
    }
    csv.save(ctx.out_dir / "mu.csv");

    lth::MuMomentEstimate est = lth::mu_moment_estimate(lattice, env, p, beta, gamma, samples, ctx.threads);
    json res;
    res["moment_mean"] = est.mean;
    res["moment_se"] = est.standard_error;
    res["samples"] = est.samples;
    res["heavy_tail"] = est.heavy_tail;
    write_summary(ctx, "mu", res);
    return 0;
}

int cmd_glue_demo(CliContext& ctx) {
    lth::Lattice lattice = lattice_from_config(ctx.config);
    lth::EnvironmentSpec env = environment_from_config(ctx.config, ctx.seed);
    lth::PotentialSpec pot = potential_from_config(ctx.config);
    env.check(lattice);

    const json& gj = ctx.config.value("glue", json::object());
    lth::GlueParams params;
    const int eps_den = ctx.config.value("eps_den", 512);
    params.delta = gj.value("delta", 0.45);
    params.m = gj.value("m", 2);
    params.s = gj.value("s", 0.5);
    lth::Region A = lth::Region::cube(lattice.d(), 0.0, 1.0);

    lth::EnvironmentSample sample(std::make_shared<const lth::EnvironmentSpec>(env), 0);
    lth::Field u = lth::Field::over_region(lattice, eps_den, A);
    lth::sample_onto_field(lattice, u, [&](const Eigen::VectorXd& x) {
        // Affine trend plus a smooth interior bump.
        Eigen::VectorXd v = Eigen::VectorXd::Constant(lattice.n(), 0.3 * x.sum());
        double bump = 1.0;
        for (int c = 0; c < lattice.d(); ++c) bump *= std::sin(M_PI * std::clamp(x[c], 0.0, 1.0));
        v.array() += bump * bump;
        return v;
    });
    auto ubar = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(lattice.n(), 0.3 * x.sum()); };

    auto [v_cut, rep_cut] = lth::glue_cutoff(lattice, sample, pot, u, ubar, A, params);
    lth::CsvWriter csv("glue", ctx.hash, {"construction", "k", "energy", "boundary_nodes_changed", "clamp_active_fraction"});
    for (const auto& c : rep_cut.candidates)
        csv.row("cutoff", c.k, c.energy, c.boundary_nodes_changed, c.clamp_active_fraction);
    json res;
    res["cutoff"] = {{"chosen_k", rep_cut.chosen_k},
                     {"chosen_energy", rep_cut.chosen_energy},
                     {"original_energy", rep_cut.original_energy}};
    if (lattice.n() == 1) {
        auto [v_tr, rep_tr] = lth::glue_truncate(lattice, sample, pot, u, ubar, A, params);
        for (const auto& c : rep_tr.candidates)
            csv.row("truncate", c.k, c.energy, c.boundary_nodes_changed, c.clamp_active_fraction);
        res["truncate"] = {{"chosen_k", rep_tr.chosen_k},
                           {"chosen_energy", rep_tr.chosen_energy},
                           {"original_energy", rep_tr.original_energy}};
    }
    csv.save(ctx.out_dir / "glue.csv");
    write_summary(ctx, "glue-demo", res);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latthom: discrete lattice energies, cell problems, and homogenized densities"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir_override;
    std::uint64_t seed_override = 0;
    long samples_override = -1;
    int threads = 1;
    bool trace = false;
    app.add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--samples", samples_override, "override the sample count");
    app.add_option("--out-dir", out_dir_override, "override the output directory");
    app.add_option("--threads", threads, "worker pool size for sample-level parallelism");
    app.add_flag("--trace", trace, "emit JSON-lines solver traces");

    const std::vector<std::pair<std::string, int (*)(CliContext&)>> commands = {
        {"cell", cmd_cell},           {"homogenize", cmd_homogenize},
        {"tensor", cmd_tensor},       {"layered-verify", cmd_layered_verify},
        {"dirichlet", cmd_dirichlet}, {"poincare", cmd_poincare},
        {"mu", cmd_mu},               {"glue-demo", cmd_glue_demo},
        {"moments", cmd_moments},
    };
    for (const auto& [name, fn] : commands) app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);

    try {
        CliContext ctx;
        ctx.config = load_config(config_path);
        if (samples_override >= 0) ctx.config["samples"] = samples_override;
        ctx.seed = seed_override != 0 ? seed_override : ctx.config.value("seed", 1ULL);
        ctx.config["seed"] = ctx.seed;
        ctx.threads = threads > 0 ? threads : 1;
        ctx.trace = trace;
        ctx.hash = lth::config_hash(ctx.config.dump());
        ctx.out_dir = out_dir_override.empty() ? ctx.config.value("out_dir", std::string("out")) : out_dir_override;

        int rc = 0;
        for (const auto& [name, fn] : commands) {
            if (app.get_subcommand(name)->parsed()) {
                rc = fn(ctx);
                break;
            }
        }
        flush_trace(ctx);
        return rc;
    } catch (const lth::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        switch (err.kind()) {
            case lth::ErrorKind::Config:
                return 2;
            case lth::ErrorKind::Numerical:
                return 3;
            case lth::ErrorKind::Property:
                return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
