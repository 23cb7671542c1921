#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "disclap/dataset.hpp"
#include "disclap/distribution.hpp"
#include "disclap/fwsim.hpp"
#include "disclap/mixture.hpp"

using namespace disclap;

namespace {

IntMatrix blob_db(std::size_t n, std::size_t r, std::size_t clusters, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    IntMatrix db(n, r);
    for (std::size_t i = 0; i < n; ++i) {
        const int base = static_cast<int>((i % clusters) * 10);
        for (std::size_t k = 0; k < r; ++k)
            db(i, k) = sample(DiscreteLaplace{0.3, base + 14}, 1, rng)[0];
    }
    return db;
}

void bm_pmf(benchmark::State& state) {
    const DiscreteLaplace d{0.3, 13};
    long long x = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pmf(d, 8 + (x++ % 11)));
    }
}
BENCHMARK(bm_pmf);

void bm_log_density(benchmark::State& state) {
    const auto db = blob_db(1, 7, 1, 1);
    const auto res = fit(blob_db(500, 7, 2, 2), 2);
    const auto row = db.row_vec(0);
    for (auto _ : state)
        benchmark::DoNotOptimize(res.model.haplotype_log_density(row));
}
BENCHMARK(bm_log_density);

void bm_fit(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const auto db = blob_db(500, 7, c, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(fit(db, c));
}
BENCHMARK(bm_fit)->Arg(1)->Arg(2)->Arg(3);

void bm_simulate(benchmark::State& state) {
    SimParams params;
    params.generations = 100;
    params.initial_size = static_cast<std::size_t>(state.range(0));
    params.loci = 7;
    params.mu = {0.001, 0.0025, 0.004, 0.0055, 0.007, 0.0085, 0.01};
    params.seed = 11;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate(params));
}
BENCHMARK(bm_simulate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void bm_sample_dataset(benchmark::State& state) {
    SimParams params;
    params.generations = 100;
    params.initial_size = 100000;
    params.loci = 7;
    params.mu = {0.001, 0.0025, 0.004, 0.0055, 0.007, 0.0085, 0.01};
    params.seed = 11;
    const auto pop = simulate(params);
    std::mt19937_64 rng(5);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_dataset(pop, 500, rng));
}
BENCHMARK(bm_sample_dataset)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
