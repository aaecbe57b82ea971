#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace latthom {

// Error taxonomy. The `kind` drives the CLI exit code: config errors exit 2,
// numerical failures exit 3, violated property checks exit 4.
enum class ErrorKind { Config, Numerical, Property };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}
    ErrorKind kind() const { return kind_; }
    const std::string& code() const { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline Error config_error(const std::string& code, const std::string& what) {
    return Error(ErrorKind::Config, code, what);
}
inline Error numerical_error(const std::string& code, const std::string& what) {
    return Error(ErrorKind::Numerical, code, what);
}
inline Error property_error(const std::string& code, const std::string& what) {
    return Error(ErrorKind::Property, code, what);
}

// Compensated (Kahan) accumulator. Energies are summed with this in a fixed
// enumeration order so repeated runs produce bit-identical values.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// SplitMix64 avalanche finalizer; the basis of all deterministic sampling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-independent hash chain: feed tuple components one by one.
inline std::uint64_t hash_combine(std::uint64_t state, std::uint64_t value) {
    return splitmix64(state ^ splitmix64(value));
}

// Uniform deviate in the open interval (0,1); safe input for inverse CDFs.
inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal quantile (Wichura's AS241, double precision).
double normal_quantile(double p);

// Tiny counter-based RNG for test fields and solver perturbations.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    double uniform() { return to_unit_open(next()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_quantile(uniform()); }
    std::uint64_t next() { return splitmix64(seed_ ^ splitmix64(counter_++)); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index owns
// its output slot, so the result is independent of scheduling.
void parallel_for_indexed(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace latthom
