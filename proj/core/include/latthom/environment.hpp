#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "latthom/geometry.hpp"
#include "latthom/lattice.hpp"

namespace latthom {

// Edge-weight distributions, all supported on (0, infinity).
struct Distribution {
    enum class Kind { Constant, TwoPoint, Lognormal, ParetoInverse, Uniform, Cycle };
    Kind kind = Kind::Constant;
    double a = 1.0, b = 0.0, c = 0.0;   // parameters, meaning depends on kind
    std::vector<double> values;         // cycle layer values

    static Distribution make(Kind kind, double a = 0.0, double b = 0.0, double c = 0.0) {
        Distribution d;
        d.kind = kind;
        d.a = a;
        d.b = b;
        d.c = c;
        return d;
    }
    static Distribution constant(double value) { return make(Kind::Constant, value); }
    // P(v2) = prob, P(v1) = 1 - prob
    static Distribution two_point(double v1, double v2, double prob) { return make(Kind::TwoPoint, v1, v2, prob); }
    static Distribution lognormal(double mu, double sigma) { return make(Kind::Lognormal, mu, sigma); }
    // 1/lambda is Pareto(exponent) on [1/scale, inf): lambda = scale * U^{1/exponent}
    static Distribution pareto_inverse(double exponent, double scale = 1.0) {
        return make(Kind::ParetoInverse, exponent, scale);
    }
    static Distribution uniform(double lo, double hi) { return make(Kind::Uniform, lo, hi); }
    // Deterministic layered pattern: value at layer x is values[x mod size].
    static Distribution cycle(std::vector<double> vals) {
        Distribution d = make(Kind::Cycle);
        d.values = std::move(vals);
        return d;
    }

    double quantile(double u) const;  // inverse CDF, u in (0,1)

    // Analytic E[lambda^a] / E[lambda^{-b}] where closed forms exist.
    std::optional<double> moment(double exponent) const;
    bool moment_divergent(double exponent) const;  // true when E[lambda^exponent] = +inf

    void check() const;  // parameter sanity
};

enum class CorrelationMode {
    IidPerEdge,  // independent across distinct (z, b)
    LayeredE1,   // depends only on z . e_1, shared across b
};

struct EnvironmentSpec {
    // One shared distribution, or one per edge offset. Per-edge lists refer to
    // the canonical edge order produced by Lattice::validate.
    std::vector<Distribution> distributions;
    CorrelationMode mode = CorrelationMode::IidPerEdge;
    std::uint64_t seed = 0;

    const Distribution& dist_for(int b) const {
        return distributions[distributions.size() == 1 ? 0 : static_cast<std::size_t>(b)];
    }
    void check(const Lattice& lattice) const;
};

// Read-only weight field interface; implementations must be pure functions of
// (z, b) so evaluation can run concurrently without coordination.
class Weights {
public:
    virtual ~Weights() = default;
    virtual double operator()(const Eigen::VectorXi& z, int b) const = 0;
};

// lambda_b(tau_z omega) realized by hashing (seed, sample, z, b) through a
// SplitMix64 chain and mapping through the inverse CDF. Stationary by
// construction; bit-reproducible across runs and thread counts.
class EnvironmentSample final : public Weights {
public:
    EnvironmentSample(std::shared_ptr<const EnvironmentSpec> spec, std::uint64_t sample_index)
        : spec_(std::move(spec)), sample_(sample_index) {}

    double operator()(const Eigen::VectorXi& z, int b) const override;

    const EnvironmentSpec& spec() const { return *spec_; }
    std::uint64_t sample_index() const { return sample_; }

private:
    std::shared_ptr<const EnvironmentSpec> spec_;
    std::uint64_t sample_;
};

// Custom weight fields for tests and diagnostics.
class FunctionWeights final : public Weights {
public:
    explicit FunctionWeights(std::function<double(const Eigen::VectorXi&, int)> fn) : fn_(std::move(fn)) {}
    double operator()(const Eigen::VectorXi& z, int b) const override { return fn_(z, b); }

private:
    std::function<double(const Eigen::VectorXi&, int)> fn_;
};

// Uniform scaling wrapper, used by the weight-scaling invariance checks.
class ScaledWeights final : public Weights {
public:
    ScaledWeights(const Weights& base, double factor) : base_(base), factor_(factor) {}
    double operator()(const Eigen::VectorXi& z, int b) const override { return factor_ * base_(z, b); }

private:
    const Weights& base_;
    double factor_;
};

struct MomentEntry {
    int b = 0;
    double alpha_moment = 0.0, alpha_se = 0.0;
    double beta_moment = 0.0, beta_se = 0.0;
    bool divergent = false;  // an involved analytic moment is +inf
    bool analytic = false;   // closed form used instead of Monte Carlo
    long samples = 0;
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    double alpha = 1.0, beta = 1.0, p = 2.0;
    int d = 2;
    bool exponents_admissible = false;   // alpha >= 1 and beta >= 1/(p-1)
    bool assumption_A = false;           // alpha > 1 and 1/alpha + 1/beta <= p/d
};

// Estimates E[lambda_b^alpha] for every b and E[lambda_b^{-beta}] with closed
// forms substituted for constant/two-point/uniform and Monte Carlo otherwise.
MomentReport estimate_moments(const Lattice& lattice, const EnvironmentSpec& spec, double alpha, double beta, double p,
                              long n_samples, int threads = 1);

struct BirkhoffPoint {
    int eps_den = 1;
    double average = 0.0;   // eps^d sum over cells of f(tau_{z/eps} omega)
    double target = 0.0;    // |A| * E-hat[f]
};

// Spatial averages of a per-cell statistic along an eps schedule.
std::vector<BirkhoffPoint> birkhoff_average(const Weights& sample, const Region& region,
                                            const std::vector<int>& eps_schedule,
                                            const std::function<double(const Eigen::VectorXi&)>& f,
                                            double expectation);

// JSON round trip for EnvironmentSpec.
std::string environment_to_json(const EnvironmentSpec& spec);
EnvironmentSpec environment_from_json(const std::string& text);

}  // namespace latthom
