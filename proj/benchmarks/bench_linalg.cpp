#include <benchmark/benchmark.h>

#include "r1/linalg.hpp"
#include "r1/rng.hpp"

namespace {

r1::HermitianMatrix random_hermitian(std::size_t n, r1::Rng& rng) {
    r1::HermitianMatrix Z(n);
    for (std::size_t i = 0; i < n; ++i) {
        Z.set(i, i, rng.normal());
        for (std::size_t j = i + 1; j < n; ++j) Z.set(i, j, rng.complex_normal());
    }
    return Z;
}

void BM_eigh(benchmark::State& state) {
    r1::Rng rng(11);
    auto Z = random_hermitian(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        auto eig = r1::eigh(Z);
        benchmark::DoNotOptimize(eig.eigenvalues.data());
    }
}
BENCHMARK(BM_eigh)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_prox_nuclear(benchmark::State& state) {
    r1::Rng rng(12);
    auto Z = random_hermitian(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        auto P = r1::prox_nuclear(Z, 0.25);
        benchmark::DoNotOptimize(P.entries().data());
    }
}
BENCHMARK(BM_prox_nuclear)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
