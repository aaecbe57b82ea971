#include "latthom/potentials.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <regex>

namespace latthom {

PotentialSpec PotentialSpec::tabulated(std::vector<double> r, std::vector<double> v, double p, double c1) {
    PotentialSpec s = make(Family::Tabulated, p, c1);
    s.table_r = std::move(r);
    s.table_v = std::move(v);
    s.check();
    return s;
}

void PotentialSpec::check() const {
    if (!(p > 1.0)) throw config_error("ConfigInvalid", "growth exponent p must exceed 1");
    if (!(c1 > 0.0)) throw config_error("ConfigInvalid", "growth constant c1 must be positive");
    if (companion && !(companion->q > 1.0 && companion->q < p))
        throw config_error("ConfigInvalid", "companion exponent q must lie in (1, p)");
    if (family == Family::Tabulated) {
        if (table_r.size() < 2 || table_r.size() != table_v.size())
            throw config_error("ConfigInvalid", "tabulated potential needs matching knot/value lists");
        for (std::size_t i = 1; i < table_r.size(); ++i)
            if (!(table_r[i] > table_r[i - 1]))
                throw config_error("ConfigInvalid", "tabulated knots must be strictly increasing");
        for (double v : table_v)
            if (v < 0.0) throw config_error("ConfigInvalid", "tabulated values must be nonnegative");
    }
}

double PotentialSpec::eval1(double lambda, double r) const {
    switch (family) {
        case Family::WeightedPPower:
            return lambda * std::pow(std::abs(r), p);
        case Family::Quadratic:
            return lambda * r * r;
        case Family::DoubleWell: {
            const double w = r * r - 1.0;
            return lambda * w * w;
        }
        case Family::VectorWell: {
            const double w = std::abs(r) - 1.0;
            return lambda * w * w;
        }
        case Family::Tabulated: {
            // Piecewise linear with end-slope extrapolation, clamped at zero.
            const auto& xs = table_r;
            const auto& ys = table_v;
            std::size_t hi = 1;
            if (r <= xs.front()) {
                hi = 1;
            } else if (r >= xs.back()) {
                hi = xs.size() - 1;
            } else {
                while (xs[hi] < r) ++hi;
            }
            const double t = (r - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
            return lambda * std::max(0.0, ys[hi - 1] + t * (ys[hi] - ys[hi - 1]));
        }
    }
    return 0.0;
}

double PotentialSpec::grad1(double lambda, double r) const {
    switch (family) {
        case Family::WeightedPPower:
            if (r == 0.0) return 0.0;
            return lambda * p * std::pow(std::abs(r), p - 1.0) * (r > 0.0 ? 1.0 : -1.0);
        case Family::Quadratic:
            return 2.0 * lambda * r;
        case Family::DoubleWell:
            return 4.0 * lambda * r * (r * r - 1.0);
        case Family::VectorWell:
            if (r == 0.0) return 0.0;
            return 2.0 * lambda * (std::abs(r) - 1.0) * (r > 0.0 ? 1.0 : -1.0);
        case Family::Tabulated:
            throw numerical_error("NoGradient", "tabulated potentials have no analytic gradient");
    }
    return 0.0;
}

double PotentialSpec::eval(double lambda, const Eigen::VectorXd& r) const {
    if (r.size() == 1) return eval1(lambda, r[0]);
    if (scalar_only()) throw config_error("NotScalar", "this potential family is defined for n = 1 only");
    const double nr = r.norm();
    switch (family) {
        case Family::WeightedPPower:
            return lambda * std::pow(nr, p);
        case Family::Quadratic:
            return lambda * nr * nr;
        case Family::VectorWell: {
            const double w = nr - 1.0;
            return lambda * w * w;
        }
        default:
            return 0.0;
    }
}

Eigen::VectorXd PotentialSpec::grad(double lambda, const Eigen::VectorXd& r) const {
    if (r.size() == 1) {
        Eigen::VectorXd g(1);
        g[0] = grad1(lambda, r[0]);
        return g;
    }
    if (scalar_only()) throw config_error("NotScalar", "this potential family is defined for n = 1 only");
    const double nr = r.norm();
    switch (family) {
        case Family::WeightedPPower:
            if (nr == 0.0) return Eigen::VectorXd::Zero(r.size());
            return lambda * p * std::pow(nr, p - 2.0) * r;
        case Family::Quadratic:
            return 2.0 * lambda * r;
        case Family::VectorWell:
            if (nr == 0.0) return Eigen::VectorXd::Zero(r.size());  // subgradient 0 at the singular point
            return 2.0 * lambda * (nr - 1.0) / nr * r;
        default:
            return Eigen::VectorXd::Zero(r.size());
    }
}

EnvelopeReport growth_envelope_check(const PotentialSpec& spec, double lambda,
                                     const std::vector<Eigen::VectorXd>& samples, bool throw_on_violation) {
    EnvelopeReport report;
    double needed_c1 = 0.0;
    for (const auto& r : samples) {
        const double v = spec.eval(lambda, r);
        const double rp = std::pow(r.norm(), spec.p);
        const double lower = lambda * (rp / spec.c1 - spec.c1);
        const double upper = spec.c1 * (1.0 + lambda * (rp + 1.0));
        const double gap = std::max(lower - v, v - upper);
        if (gap > 1e-12 * (1.0 + std::abs(v))) {
            report.ok = false;
            if (gap > report.worst_gap) {
                report.worst_gap = gap;
                report.witness = r;
            }
        }
        // Smallest admissible constant at this sample: the upper bound needs
        // c >= v / (1 + lambda(rp + 1)); the lower bound needs
        // lambda rp <= c v + lambda c^2.
        needed_c1 = std::max(needed_c1, v / (1.0 + lambda * (rp + 1.0)));
        if (lambda > 0.0) {
            const double root = (-v + std::sqrt(v * v + 4.0 * lambda * lambda * rp)) / (2.0 * lambda);
            needed_c1 = std::max(needed_c1, root);
        }
    }
    report.tightest_c1 = needed_c1;
    if (!report.ok && throw_on_violation)
        throw property_error("EnvelopeViolated", "p-growth envelope fails at |r| = " + std::to_string(report.witness.norm()));
    return report;
}

ConvexityReport convex_companion_check(const PotentialSpec& spec, double lambda, const std::vector<double>& grid,
                                       bool throw_on_violation) {
    if (spec.family == PotentialSpec::Family::VectorWell)
        throw config_error("NotScalar", "the companion check applies to scalar families");
    if (grid.size() < 3) throw config_error("ConfigInvalid", "convexity grid needs at least three points");
    ConvexityReport report;
    report.min_second_diff = std::numeric_limits<double>::infinity();
    auto total = [&](double r) {
        double v = spec.eval1(lambda, r);
        if (spec.companion) v += spec.companion->eval(lambda, r);
        return v;
    };
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double h1 = grid[i] - grid[i - 1];
        const double h2 = grid[i + 1] - grid[i];
        // Divided second difference; nonnegative iff the three points are in
        // convex position.
        const double sd = (total(grid[i + 1]) - total(grid[i])) / h2 - (total(grid[i]) - total(grid[i - 1])) / h1;
        if (sd < report.min_second_diff) {
            report.min_second_diff = sd;
            report.witness_r = grid[i];
        }
    }
    const double scale = 1.0 + std::abs(total(grid.front())) + std::abs(total(grid.back()));
    if (report.min_second_diff < -1e-9 * scale) report.ok = false;
    if (spec.companion) {
        for (double r : grid) {
            const double f = spec.companion->eval(lambda, r);
            const double bound =
                spec.companion->c2 * (1.0 + lambda * (std::pow(std::abs(r), spec.companion->q) + 1.0));
            if (f > bound + 1e-12 * (1.0 + bound)) report.growth_ok = false;
        }
    }
    if (!report.ok && throw_on_violation)
        throw property_error("NotConvex", "V + f has a negative second difference near r = " + std::to_string(report.witness_r));
    return report;
}

std::string potential_to_json(const PotentialSpec& spec) {
    nlohmann::json j;
    switch (spec.family) {
        case PotentialSpec::Family::WeightedPPower:
            j["family"] = "weighted_p_power";
            break;
        case PotentialSpec::Family::Quadratic:
            j["family"] = "quadratic";
            break;
        case PotentialSpec::Family::DoubleWell:
            j["family"] = "double_well";
            break;
        case PotentialSpec::Family::VectorWell:
            j["family"] = "vector_well";
            break;
        case PotentialSpec::Family::Tabulated:
            j["family"] = "tabulated";
            j["r"] = spec.table_r;
            j["v"] = spec.table_v;
            break;
    }
    j["p"] = spec.p;
    j["c1"] = spec.c1;
    if (spec.companion) {
        char form[64];
        std::snprintf(form, sizeof(form), "%g*lambda*r^%g", spec.companion->coeff, spec.companion->q);
        j["companion"] = {{"form", form}, {"q", spec.companion->q}, {"c2", spec.companion->c2}};
    }
    return j.dump();
}

PotentialSpec potential_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const std::string family = j.at("family").get<std::string>();
    PotentialSpec spec;
    if (family == "weighted_p_power") {
        spec = PotentialSpec::p_power(j.value("p", 2.0));
    } else if (family == "quadratic") {
        spec = PotentialSpec::quadratic();
    } else if (family == "double_well") {
        spec = PotentialSpec::double_well();
        spec.companion.reset();
    } else if (family == "vector_well") {
        spec = PotentialSpec::vector_well();
    } else if (family == "tabulated") {
        spec.family = PotentialSpec::Family::Tabulated;
        spec.table_r = j.at("r").get<std::vector<double>>();
        spec.table_v = j.at("v").get<std::vector<double>>();
    } else {
        throw config_error("ConfigInvalid", "unknown potential family '" + family + "'");
    }
    if (j.contains("p")) spec.p = j.at("p").get<double>();
    if (j.contains("c1")) spec.c1 = j.at("c1").get<double>();
    if (j.contains("companion")) {
        const auto& cj = j.at("companion");
        Companion comp;
        comp.q = cj.value("q", 2.0);
        comp.c2 = cj.value("c2", 2.0);
        if (cj.contains("form")) {
            // Accepted companion shape: "<coeff>*lambda*r^<q>".
            static const std::regex pattern(R"(^\s*([0-9.eE+-]+)\s*\*\s*lambda\s*\*\s*r\^([0-9.eE+-]+)\s*$)");
            std::smatch m;
            const std::string form = cj.at("form").get<std::string>();
            if (!std::regex_match(form, m, pattern))
                throw config_error("ConfigInvalid", "companion form must look like '2*lambda*r^2'");
            comp.coeff = std::stod(m[1].str());
            comp.q = std::stod(m[2].str());
        }
        spec.companion = comp;
    }
    spec.check();
    return spec;
}

}  // namespace latthom
