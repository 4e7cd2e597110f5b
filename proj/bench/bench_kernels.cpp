#include "rtlab/growth_rate.hpp"
#include "rtlab/mesh_ops.hpp"
#include "rtlab/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace rtlab;

VelocityField noise(const Grid& g) {
    VelocityField u(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& x : u.data) x = d(rng);
    u.clear_boundary();
    return u;
}

void BM_laplacian_omp(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const VelocityField u = noise(g);
    for (auto _ : state) benchmark::DoNotOptimize(laplacian_dirichlet(u));
}

void BM_laplacian_serial(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const VelocityField u = noise(g);
    for (auto _ : state) benchmark::DoNotOptimize(reference::laplacian_dirichlet(u));
}

void BM_divergence_omp(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const VelocityField u = noise(g);
    for (auto _ : state) benchmark::DoNotOptimize(divergence(u));
}

void BM_divergence_serial(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const VelocityField u = noise(g);
    for (auto _ : state) benchmark::DoNotOptimize(reference::divergence(u));
}

void BM_projection(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const auto prof = builtin_profile(ProfileKind::Linear, {}, 1.0);
    const VariationalProblem prob(prof, g, {});
    const VelocityField u = noise(g);
    for (auto _ : state) benchmark::DoNotOptimize(prob.project(u));
}

void BM_alpha(benchmark::State& state) {
    const Grid g = Grid::make2d(int(state.range(0)), int(state.range(0)));
    const auto prof = builtin_profile(ProfileKind::Linear, {}, 1.0);
    const VariationalProblem prob(prof, g, {});
    for (auto _ : state) benchmark::DoNotOptimize(alpha(prob, 0.25).value);
}

}  // namespace

BENCHMARK(BM_laplacian_omp)->Arg(64)->Arg(256);
BENCHMARK(BM_laplacian_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_divergence_omp)->Arg(64)->Arg(256);
BENCHMARK(BM_divergence_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_projection)->Arg(64)->Arg(128);
BENCHMARK(BM_alpha)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
