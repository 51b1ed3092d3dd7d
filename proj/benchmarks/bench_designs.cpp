#include <benchmark/benchmark.h>

#include <limits>

#include "r1/designs.hpp"
#include "r1/tensor.hpp"

namespace {

void BM_design_build_n2_t4(benchmark::State& state) {
    for (auto _ : state) {
        r1::Rng rng(31);
        auto d = r1::construct_weighted_design(2, 4, 2000, rng, 1e-8);
        benchmark::DoNotOptimize(d.count());
    }
}
BENCHMARK(BM_design_build_n2_t4)->Unit(benchmark::kMillisecond);

void BM_design_gap_sym_basis(benchmark::State& state) {
    r1::Rng rng(32);
    auto d = r1::construct_weighted_design(2, 4, 2000, rng, 1e-8);
    for (auto _ : state) {
        double theta = r1::design_moment_gap(d, 4, std::numeric_limits<double>::infinity());
        benchmark::DoNotOptimize(theta);
    }
}
BENCHMARK(BM_design_gap_sym_basis);

void BM_sym_moment(benchmark::State& state) {
    r1::Rng rng(33);
    auto X = r1::random_low_rank(8, 3, false, rng);
    for (auto _ : state) {
        double v = r1::sym_moment(X.matrix, 4);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_sym_moment);

}  // namespace
