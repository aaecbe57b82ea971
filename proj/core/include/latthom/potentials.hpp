#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "latthom/common.hpp"

namespace latthom {

// Optional convex companion f(lambda; r) = coeff * lambda * |r|^q, the scalar
// "convexity at infinity" device. For the double well, f = 2 lambda r^2 makes
// V + f = lambda (r^4 + 1) convex.
struct Companion {
    double coeff = 2.0;
    double q = 2.0;
    double c2 = 2.0;

    double eval(double lambda, double r) const { return coeff * lambda * std::pow(std::abs(r), q); }
};

// Pair interaction family V(lambda; r), r in R^n.
struct PotentialSpec {
    enum class Family {
        WeightedPPower,  // lambda |r|^p
        Quadratic,       // lambda |r|^2
        DoubleWell,      // lambda (r^2 - 1)^2, scalar
        VectorWell,      // lambda (|r| - 1)^2
        Tabulated,       // scalar piecewise-linear table in r
    };

    Family family = Family::Quadratic;
    double p = 2.0;   // growth exponent
    double c1 = 1.0;  // growth constant of the p-growth envelope
    std::optional<Companion> companion;

    // Tabulated family: knots (strictly increasing) and values; evaluation is
    // piecewise linear with end-slope extrapolation.
    std::vector<double> table_r, table_v;

    static PotentialSpec make(Family family, double p, double c1) {
        PotentialSpec s;
        s.family = family;
        s.p = p;
        s.c1 = c1;
        return s;
    }
    static PotentialSpec quadratic() { return make(Family::Quadratic, 2.0, 1.0); }
    static PotentialSpec p_power(double p) { return make(Family::WeightedPPower, p, 1.0); }
    static PotentialSpec double_well() {
        PotentialSpec s = make(Family::DoubleWell, 4.0, 4.0);
        s.companion = Companion{2.0, 2.0, 2.0};
        return s;
    }
    static PotentialSpec vector_well() { return make(Family::VectorWell, 2.0, 2.0); }
    static PotentialSpec tabulated(std::vector<double> r, std::vector<double> v, double p, double c1);

    bool scalar_only() const { return family == Family::DoubleWell || family == Family::Tabulated; }
    bool has_gradient() const { return family != Family::Tabulated; }
    bool is_quadratic() const {
        return family == Family::Quadratic || (family == Family::WeightedPPower && p == 2.0);
    }
    bool is_convex() const { return is_quadratic() || family == Family::WeightedPPower; }

    double eval(double lambda, const Eigen::VectorXd& r) const;
    // Analytic gradient dV/dr. The vector well's gradient at r = 0 is the
    // subgradient element 0 by convention.
    Eigen::VectorXd grad(double lambda, const Eigen::VectorXd& r) const;

    // Scalar fast paths used by assembly loops (n = 1).
    double eval1(double lambda, double r) const;
    double grad1(double lambda, double r) const;

    void check() const;
};

struct EnvelopeReport {
    bool ok = true;
    double tightest_c1 = 0.0;           // smallest constant making both bounds hold on the sample set
    Eigen::VectorXd witness;            // violating r when !ok
    double worst_gap = 0.0;
};

// Verifies lambda (|r|^p / c1 - c1) <= V <= c1 (1 + lambda (|r|^p + 1)) on the
// sample set; throws EnvelopeViolated when a bound fails.
EnvelopeReport growth_envelope_check(const PotentialSpec& spec, double lambda,
                                     const std::vector<Eigen::VectorXd>& samples, bool throw_on_violation = true);

struct ConvexityReport {
    bool ok = true;
    double witness_r = 0.0;     // grid center of the violating second difference
    double min_second_diff = 0.0;
    bool growth_ok = true;      // companion growth f <= c2 (1 + lambda(|r|^q + 1))
};

// Checks convexity of V + f on a scalar grid via second differences and the
// companion growth bound; throws NotConvex on failure.
ConvexityReport convex_companion_check(const PotentialSpec& spec, double lambda, const std::vector<double>& grid,
                                       bool throw_on_violation = true);

// JSON round trip matching {"family":"double_well","p":4,"c1":4,
// "companion":{"form":"2*lambda*r^2","q":2,"c2":2}}.
std::string potential_to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const std::string& text);

}  // namespace latthom
