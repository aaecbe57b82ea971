#include <benchmark/benchmark.h>

#include "latthom/energy.hpp"

using namespace latthom;

namespace {

struct Bed {
    Lattice lat = Lattice::validate(lattice_preset("zd-nn"));
    std::shared_ptr<const EnvironmentSpec> spec;
    Region box;
    Field field;

    explicit Bed(int side)
        : spec(std::make_shared<const EnvironmentSpec>(
              EnvironmentSpec{{Distribution::lognormal(0.0, 0.5)}, CorrelationMode::IidPerEdge, 7})),
          box(Region::cube(2, 0.0, static_cast<double>(side))),
          field(Field::over_region(lat, 1, box)) {
        CounterRng rng(11);
        for (double& v : field.raw_values()) v = rng.uniform();
    }
};

}  // namespace

static void BM_AssembleEnergy(benchmark::State& state) {
    Bed bed(static_cast<int>(state.range(0)));
    EnvironmentSample env(bed.spec, 0);
    const PotentialSpec quad = PotentialSpec::quadratic();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            assemble_energy(bed.lat, env, quad, bed.field, bed.box, SumConvention::ZAnchored));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0) * 2);
}
BENCHMARK(BM_AssembleEnergy)->Arg(64)->Arg(256)->Arg(1024);

static void BM_EnergyGradient(benchmark::State& state) {
    Bed bed(static_cast<int>(state.range(0)));
    EnvironmentSample env(bed.spec, 0);
    const PotentialSpec quad = PotentialSpec::quadratic();
    bed.field.for_each_stored_node(
        [&](const Eigen::VectorXi&, int, std::int64_t node) { bed.field.set_free(node, true); });
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            energy_gradient(bed.lat, env, quad, bed.field, bed.box, SumConvention::ZAnchored));
    }
}
BENCHMARK(BM_EnergyGradient)->Arg(64)->Arg(256);

static void BM_WeightLookup(benchmark::State& state) {
    auto spec = std::make_shared<const EnvironmentSpec>(
        EnvironmentSpec{{Distribution::lognormal(0.0, 0.5)}, CorrelationMode::IidPerEdge, 7});
    EnvironmentSample env(spec, 0);
    Eigen::VectorXi z(2);
    std::int64_t i = 0;
    for (auto _ : state) {
        z << static_cast<int>(i % 997), static_cast<int>(i % 991);
        benchmark::DoNotOptimize(env(z, static_cast<int>(i & 1)));
        ++i;
    }
}
BENCHMARK(BM_WeightLookup);
