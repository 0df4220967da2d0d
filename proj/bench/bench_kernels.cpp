#include "lcorder/continuous.hpp"
#include "lcorder/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace lcorder;

namespace {

std::vector<double> geometric_weights(std::size_t n, double q)
{
    std::vector<double> w(n);
    double x = 1.0 - q;
    for (double& v : w) {
        v = x;
        x *= q;
    }
    return w;
}

template <auto Convolve>
void discrete(benchmark::State& state)
{
    auto const n = static_cast<std::size_t>(state.range(0));
    auto const a = geometric_weights(n, 0.999);
    auto const b = geometric_weights(n, 0.998);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Convolve(a, b));
    }
    state.SetComplexityN(state.range(0));
}

template <auto ConvolveDensity>
void density(benchmark::State& state)
{
    GridSpec spec;
    spec.nodes = static_cast<int>(state.range(0));
    GridPdf const f = pdf_gamma(1.5, 1.0, spec);
    GridPdf const g = pdf_gamma(2.5, 0.7, spec);
    std::vector<double> nodes(f.nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        nodes[j] = f.nodes[j] + g.nodes[j];
    }
    kernels::DensityQuadrature const q{f.lo, g.lo, spec.quadrature_points};
    for (auto _ : state) {
        benchmark::DoNotOptimize(ConvolveDensity(nodes, f.analytic, g.analytic, q));
    }
}

} // namespace

BENCHMARK(discrete<kernels::serial::convolve>)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);
BENCHMARK(discrete<kernels::parallel::convolve>)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);
BENCHMARK(density<kernels::serial::convolve_density>)->Arg(1025)->Arg(4097)->Unit(benchmark::kMillisecond);
BENCHMARK(density<kernels::parallel::convolve_density>)->Arg(1025)->Arg(4097)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
