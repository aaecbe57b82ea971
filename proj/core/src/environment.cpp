#include "latthom/environment.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "latthom/common.hpp"

namespace latthom {

void Distribution::check() const {
    switch (kind) {
        case Kind::Constant:
            if (!(a > 0.0)) throw config_error("ConfigInvalid", "constant weight must be positive");
            break;
        case Kind::TwoPoint:
            if (!(a > 0.0 && b > 0.0)) throw config_error("ConfigInvalid", "two-point values must be positive");
            if (!(c >= 0.0 && c <= 1.0)) throw config_error("ConfigInvalid", "two-point probability must be in [0,1]");
            break;
        case Kind::Lognormal:
            if (!(b > 0.0)) throw config_error("ConfigInvalid", "lognormal sigma must be positive");
            break;
        case Kind::ParetoInverse:
            if (!(a > 0.0) || !(b > 0.0))
                throw config_error("ConfigInvalid", "pareto-inverse exponent and scale must be positive");
            break;
        case Kind::Uniform:
            if (!(0.0 < a && a < b)) throw config_error("ConfigInvalid", "uniform support must satisfy 0 < lo < hi");
            break;
        case Kind::Cycle:
            if (values.empty()) throw config_error("ConfigInvalid", "cycle needs at least one value");
            for (double v : values)
                if (!(v > 0.0)) throw config_error("ConfigInvalid", "cycle values must be positive");
            break;
    }
}

double Distribution::quantile(double u) const {
    switch (kind) {
        case Kind::Constant:
            return a;
        case Kind::TwoPoint:
            return (u < 1.0 - c) ? a : b;
        case Kind::Lognormal:
            return std::exp(a + b * normal_quantile(u));
        case Kind::ParetoInverse:
            return b * std::pow(u, 1.0 / a);
        case Kind::Uniform:
            return a + (b - a) * u;
        case Kind::Cycle:
            throw config_error("ConfigInvalid", "cycle distribution has no quantile; layered mode indexes layers");
    }
    return a;
}

std::optional<double> Distribution::moment(double e) const {
    switch (kind) {
        case Kind::Constant:
            return std::pow(a, e);
        case Kind::TwoPoint:
            return (1.0 - c) * std::pow(a, e) + c * std::pow(b, e);
        case Kind::Uniform: {
            if (std::abs(e + 1.0) < 1e-12) return std::log(b / a) / (b - a);
            return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / ((e + 1.0) * (b - a));
        }
        case Kind::Lognormal:
            return std::exp(a * e + 0.5 * b * b * e * e);
        case Kind::ParetoInverse:
            // lambda = scale * U^{1/a}: E[lambda^e] = scale^e * a/(a+e), finite iff e > -a.
            if (e <= -a) return std::nullopt;
            return std::pow(b, e) * (a / (a + e));
        case Kind::Cycle: {
            double s = 0.0;
            for (double v : values) s += std::pow(v, e);
            return s / static_cast<double>(values.size());
        }
    }
    return std::nullopt;
}

bool Distribution::moment_divergent(double e) const {
    return kind == Kind::ParetoInverse && e <= -a;
}

void EnvironmentSpec::check(const Lattice& lattice) const {
    if (distributions.empty()) throw config_error("ConfigInvalid", "environment needs a distribution");
    if (distributions.size() != 1 && distributions.size() != static_cast<std::size_t>(lattice.num_edges()))
        throw config_error("ConfigInvalid", "per-edge distribution list length must match edges0");
    for (const auto& d : distributions) d.check();
    if (mode == CorrelationMode::LayeredE1) {
        if (!lattice.has_unit_edges() || lattice.num_offsets() != 1)
            throw config_error("ConfigInvalid", "layered-e1 weights require the hyper-cubic lattice preset");
        if (distributions.size() != 1)
            throw config_error("ConfigInvalid", "layered-e1 weights are shared across edge offsets");
    }
    for (const auto& d : distributions)
        if (d.kind == Distribution::Kind::Cycle && mode != CorrelationMode::LayeredE1)
            throw config_error("ConfigInvalid", "cycle values are only meaningful in layered-e1 mode");
}

double EnvironmentSample::operator()(const Eigen::VectorXi& z, int b) const {
    const EnvironmentSpec& s = *spec_;
    if (s.mode == CorrelationMode::LayeredE1) {
        const Distribution& dist = s.distributions[0];
        const std::int64_t layer = z[0];
        if (dist.kind == Distribution::Kind::Cycle) {
            const std::int64_t m = static_cast<std::int64_t>(dist.values.size());
            return dist.values[static_cast<std::size_t>(((layer % m) + m) % m)];
        }
        std::uint64_t h = hash_combine(s.seed, 0x6c61796572ULL);  // mode tag
        h = hash_combine(h, sample_);
        h = hash_combine(h, static_cast<std::uint64_t>(layer));
        return dist.quantile(to_unit_open(h));
    }
    std::uint64_t h = hash_combine(s.seed, 0x696964ULL);
    h = hash_combine(h, sample_);
    for (int c = 0; c < z.size(); ++c) h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(z[c])));
    h = hash_combine(h, static_cast<std::uint64_t>(b));
    return s.dist_for(b).quantile(to_unit_open(h));
}

namespace {

struct OnlineMean {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double standard_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / (static_cast<double>(n) * static_cast<double>(n - 1)));
    }
};

}  // namespace

MomentReport estimate_moments(const Lattice& lattice, const EnvironmentSpec& spec, double alpha, double beta, double p,
                              long n_samples, int threads) {
    if (n_samples < 1) throw config_error("ConfigInvalid", "moment estimation needs at least one sample");
    spec.check(lattice);
    auto holder = std::make_shared<const EnvironmentSpec>(spec);

    MomentReport report;
    report.alpha = alpha;
    report.beta = beta;
    report.p = p;
    report.d = lattice.d();
    report.exponents_admissible = alpha >= 1.0 && beta >= 1.0 / (p - 1.0);
    report.assumption_A =
        alpha > 1.0 && (1.0 / alpha + 1.0 / beta) <= p / static_cast<double>(lattice.d()) + 1e-12;

    const Eigen::VectorXi origin = Eigen::VectorXi::Zero(lattice.d());
    for (int b = 0; b < lattice.num_edges(); ++b) {
        const Distribution& dist = spec.dist_for(b);
        MomentEntry entry;
        entry.b = b;
        entry.divergent = dist.moment_divergent(-beta);
        auto plus = dist.moment(alpha);
        auto minus = dist.moment(-beta);
        const bool closed_form = dist.kind == Distribution::Kind::Constant ||
                                 dist.kind == Distribution::Kind::TwoPoint ||
                                 dist.kind == Distribution::Kind::Uniform || dist.kind == Distribution::Kind::Cycle;
        if (closed_form && plus && minus) {
            entry.analytic = true;
            entry.alpha_moment = *plus;
            entry.beta_moment = *minus;
            entry.samples = 0;
        } else if (entry.divergent) {
            entry.alpha_moment = plus.value_or(std::numeric_limits<double>::infinity());
            entry.beta_moment = std::numeric_limits<double>::infinity();
            entry.samples = 0;
        } else {
            // Deterministic reduction: per-sample statistics land in indexed
            // slots and are merged in index order.
            std::vector<double> wa(static_cast<std::size_t>(n_samples)), wb(static_cast<std::size_t>(n_samples));
            parallel_for_indexed(static_cast<std::size_t>(n_samples), threads, [&](std::size_t s) {
                EnvironmentSample sample(holder, static_cast<std::uint64_t>(s));
                const double lam = sample(origin, b);
                wa[s] = std::pow(lam, alpha);
                wb[s] = std::pow(lam, -beta);
            });
            OnlineMean ma, mb;
            for (long s = 0; s < n_samples; ++s) {
                ma.add(wa[static_cast<std::size_t>(s)]);
                mb.add(wb[static_cast<std::size_t>(s)]);
            }
            entry.alpha_moment = ma.mean;
            entry.alpha_se = ma.standard_error();
            entry.beta_moment = mb.mean;
            entry.beta_se = mb.standard_error();
            entry.samples = n_samples;
        }
        report.entries.push_back(entry);
    }
    return report;
}

std::vector<BirkhoffPoint> birkhoff_average(const Weights&, const Region& region, const std::vector<int>& eps_schedule,
                                            const std::function<double(const Eigen::VectorXi&)>& f,
                                            double expectation) {
    std::vector<BirkhoffPoint> out;
    for (int m : eps_schedule) {
        Eigen::VectorXi clo, chi;
        region.cell_window(m, clo, chi);
        CellWindow w{clo, chi};
        KahanSum sum;
        w.for_each([&](const Eigen::VectorXi& z) { sum.add(f(z)); });
        const double eps_d = std::pow(1.0 / static_cast<double>(m), region.dim());
        out.push_back({m, eps_d * sum.value(), region.volume() * expectation});
    }
    return out;
}

namespace {

Distribution distribution_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return Distribution::constant(j.at("value").get<double>());
    if (kind == "two_point")
        return Distribution::two_point(j.at("v1").get<double>(), j.at("v2").get<double>(), j.at("prob").get<double>());
    if (kind == "lognormal") return Distribution::lognormal(j.at("mu").get<double>(), j.at("sigma").get<double>());
    if (kind == "pareto_inverse")
        return Distribution::pareto_inverse(j.at("exponent").get<double>(), j.value("scale", 1.0));
    if (kind == "uniform") return Distribution::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    if (kind == "cycle") return Distribution::cycle(j.at("values").get<std::vector<double>>());
    throw config_error("ConfigInvalid", "unknown distribution kind '" + kind + "'");
}

nlohmann::json distribution_to_json(const Distribution& d) {
    nlohmann::json j;
    switch (d.kind) {
        case Distribution::Kind::Constant:
            j = {{"kind", "constant"}, {"value", d.a}};
            break;
        case Distribution::Kind::TwoPoint:
            j = {{"kind", "two_point"}, {"v1", d.a}, {"v2", d.b}, {"prob", d.c}};
            break;
        case Distribution::Kind::Lognormal:
            j = {{"kind", "lognormal"}, {"mu", d.a}, {"sigma", d.b}};
            break;
        case Distribution::Kind::ParetoInverse:
            j = {{"kind", "pareto_inverse"}, {"exponent", d.a}, {"scale", d.b}};
            break;
        case Distribution::Kind::Uniform:
            j = {{"kind", "uniform"}, {"lo", d.a}, {"hi", d.b}};
            break;
        case Distribution::Kind::Cycle:
            j = {{"kind", "cycle"}, {"values", d.values}};
            break;
    }
    return j;
}

}  // namespace

std::string environment_to_json(const EnvironmentSpec& spec) {
    nlohmann::json j;
    if (spec.distributions.size() == 1) {
        j["distribution"] = distribution_to_json(spec.distributions[0]);
    } else {
        j["distributions"] = nlohmann::json::array();
        for (const auto& d : spec.distributions) j["distributions"].push_back(distribution_to_json(d));
    }
    j["mode"] = (spec.mode == CorrelationMode::IidPerEdge) ? "iid" : "layered_e1";
    j["seed"] = spec.seed;
    return j.dump();
}

EnvironmentSpec environment_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    EnvironmentSpec spec;
    if (j.contains("distribution")) {
        spec.distributions.push_back(distribution_from_json(j.at("distribution")));
    } else {
        for (const auto& dj : j.at("distributions")) spec.distributions.push_back(distribution_from_json(dj));
    }
    const std::string mode = j.value("mode", "iid");
    if (mode == "iid" || mode == "iid_per_edge" || mode == "iid-per-edge") {
        spec.mode = CorrelationMode::IidPerEdge;
    } else if (mode == "layered_e1" || mode == "layered-e1") {
        spec.mode = CorrelationMode::LayeredE1;
    } else {
        throw config_error("ConfigInvalid", "unknown correlation mode '" + mode + "'");
    }
    spec.seed = j.value("seed", 0ULL);
    return spec;
}

}  // namespace latthom
