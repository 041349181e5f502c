#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qmbp/branching_law.hpp"
#include "qmbp/bounds.hpp"
#include "qmbp/ctmc.hpp"
#include "qmbp/hardy.hpp"
#include "qmbp/sl_eigen.hpp"

namespace {

const qmbp::BranchingLaw& reference_law() {
    static const qmbp::BranchingLaw law = qmbp::birth_death_law(2.0, 1.0);
    return law;
}

const qmbp::BranchingLaw& skip2_reference() {
    static const qmbp::BranchingLaw law = qmbp::skip2_law(1.0, 0.3, 0.3);
    return law;
}

void BM_PhiEval(benchmark::State& state) {
    const auto& law = skip2_reference();
    double s = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qmbp::phi(law, s));
        s = 0.3 + 0.4 * std::fmod(s * 997.0, 1.0);  // wander over the interval
    }
}
BENCHMARK(BM_PhiEval);

void BM_HardyIndex(benchmark::State& state) {
    const auto& law = skip2_reference();
    for (auto _ : state) benchmark::DoNotOptimize(qmbp::hardy_index(law).d2);
}
BENCHMARK(BM_HardyIndex)->Unit(benchmark::kMillisecond);

void BM_AllBounds(benchmark::State& state) {
    const auto& law = skip2_reference();
    for (auto _ : state) benchmark::DoNotOptimize(qmbp::all_bounds(law).entries.size());
}
BENCHMARK(BM_AllBounds)->Unit(benchmark::kMillisecond);

void BM_EigenSolve(benchmark::State& state) {
    const auto& law = reference_law();
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto sys = qmbp::assemble(law, 1e-4, 1e-4, n);
        benchmark::DoNotOptimize(qmbp::smallest_eig(sys).ell);
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_EigenSolve)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_SurvivalStep(benchmark::State& state) {
    const auto& law = reference_law();
    const int cap = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(qmbp::survival(law, cap, 1.0, 1e-13));
    state.SetComplexityN(cap);
}
BENCHMARK(BM_SurvivalStep)->RangeMultiplier(2)->Range(64, 256)->Complexity();

void BM_GillespiePaths(benchmark::State& state) {
    const auto& law = reference_law();
    const std::vector<double> times{0.5, 1.0, 2.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            qmbp::gillespie_paths(law, 1, times, static_cast<int>(state.range(0)), 42).samples);
}
BENCHMARK(BM_GillespiePaths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
