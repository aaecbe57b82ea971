#include <benchmark/benchmark.h>

#include "latthom/homogenize.hpp"

using namespace latthom;

static void BM_PeriodicCellCG(benchmark::State& state) {
    Lattice lat = Lattice::validate(lattice_preset("zd-nn"));
    auto spec = std::make_shared<const EnvironmentSpec>(
        EnvironmentSpec{{Distribution::two_point(1.0, 4.0, 0.5)}, CorrelationMode::IidPerEdge, 3});
    EnvironmentSample env(spec, 0);
    Eigen::MatrixXd F(1, 2);
    F << 1.0, 0.0;
    const int k = static_cast<int>(state.range(0));
    SolverConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(whom_k(lat, env, PotentialSpec::quadratic(), F, k, cfg).value);
    }
}
BENCHMARK(BM_PeriodicCellCG)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_DoubleWellMultistart(benchmark::State& state) {
    Lattice lat = Lattice::validate(lattice_preset("zd-nn"));
    auto spec = std::make_shared<const EnvironmentSpec>(
        EnvironmentSpec{{Distribution::uniform(0.5, 2.0)}, CorrelationMode::IidPerEdge, 5});
    EnvironmentSample env(spec, 0);
    Eigen::MatrixXd F(1, 2);
    F << 0.8, -0.3;
    SolverConfig cfg;
    cfg.seed = 9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(whom_k(lat, env, PotentialSpec::double_well(), F, 4, cfg).value);
    }
}
BENCHMARK(BM_DoubleWellMultistart)->Unit(benchmark::kMillisecond);

static void BM_DirichletCell(benchmark::State& state) {
    Lattice lat = Lattice::validate(lattice_preset("zd-nn"));
    auto spec = std::make_shared<const EnvironmentSpec>(
        EnvironmentSpec{{Distribution::lognormal(0.0, 0.5)}, CorrelationMode::IidPerEdge, 4});
    EnvironmentSample env(spec, 0);
    Eigen::MatrixXd F(1, 2);
    F << 1.0, 0.5;
    const Region region = Region::cube(2, 0.0, static_cast<double>(state.range(0)));
    SolverConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cell_mF(lat, env, PotentialSpec::quadratic(), F, region, cfg).value);
    }
}
BENCHMARK(BM_DirichletCell)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
