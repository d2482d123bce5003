// Microbenchmarks for the hot paths: distance, categorization, partitioning,
// and logit normalization. Run the binary directly; it is not part of ctest.

#include "mmoe/distribution.hpp"
#include "mmoe/interaction.hpp"
#include "mmoe/rng.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

mmoe::LabelDistribution random_dist(std::mt19937_64& g, std::size_t k) {
    return mmoe::LabelDistribution::from_probs(mmoe::sample_simplex(g, k),
                                               mmoe::LabelDistribution::kStrictTolerance);
}

std::vector<mmoe::DataPointRecord> random_records(std::size_t n, std::size_t k) {
    std::mt19937_64 g(99);
    std::vector<mmoe::DataPointRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        mmoe::DataPointRecord r;
        r.id = "b" + std::to_string(i);
        r.delta1 = random_dist(g, k);
        r.delta2 = random_dist(g, k);
        r.delta_m = random_dist(g, k);
        records.push_back(std::move(r));
    }
    return records;
}

void BM_L1Distance(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 g(7);
    const auto a = random_dist(g, k);
    const auto b = random_dist(g, k);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mmoe::l1_distance(a, b));
    }
}
BENCHMARK(BM_L1Distance)->Arg(2)->Arg(10)->Arg(100);

void BM_Categorize(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 g(7);
    const auto d1 = random_dist(g, k);
    const auto d2 = random_dist(g, k);
    const auto dm = random_dist(g, k);
    const mmoe::CategorizationConfig cfg;
    for (auto _ : state) {
        const auto d = mmoe::pairwise_distances(d1, d2, dm);
        benchmark::DoNotOptimize(mmoe::categorize(d, cfg).category);
    }
}
BENCHMARK(BM_Categorize)->Arg(2)->Arg(10)->Arg(100);

void BM_PartitionDataset(benchmark::State& state) {
    const auto records = random_records(static_cast<std::size_t>(state.range(0)), 5);
    const mmoe::CategorizationConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mmoe::partition_dataset(records, cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PartitionDataset)->Arg(1000)->Arg(10000);

void BM_NormalizeLogits(benchmark::State& state) {
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 g(7);
    std::vector<double> logits(k);
    for (double& x : logits) x = mmoe::uniform_range(g, -8.0, 8.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mmoe::normalize_logits(logits, 1.0));
    }
}
BENCHMARK(BM_NormalizeLogits)->Arg(2)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
