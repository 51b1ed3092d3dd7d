#include <benchmark/benchmark.h>

#include "r1/ensembles.hpp"
#include "r1/solver.hpp"

namespace {

void BM_apply_adjoint(benchmark::State& state) {
    const std::size_t n = 16, m = 192;
    r1::Rng rng(21);
    auto e = r1::sample_gaussian(n, m, r1::Field::Complex, rng);
    auto X = r1::random_low_rank(n, 2, true, rng);
    for (auto _ : state) {
        auto b = r1::apply(e, X.matrix);
        auto back = r1::adjoint(e, b);
        benchmark::DoNotOptimize(back.entries().data());
    }
}
BENCHMARK(BM_apply_adjoint);

void BM_solve_noiseless(benchmark::State& state) {
    const std::size_t n = 8, m = 48;
    r1::Rng rng(22);
    auto X = r1::random_low_rank(n, 1, true, rng);
    auto e = r1::sample_gaussian(n, m, r1::Field::Complex, rng);
    auto b = r1::apply(e, X.matrix);
    r1::RecoveryProblem problem{e, b, 0.0, r1::RecoveryMode::Nuclear};
    for (auto _ : state) {
        auto result = r1::solve(problem);
        benchmark::DoNotOptimize(result.iterations);
    }
}
BENCHMARK(BM_solve_noiseless)->Unit(benchmark::kMillisecond);

}  // namespace
