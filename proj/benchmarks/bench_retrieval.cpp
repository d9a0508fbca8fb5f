#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <unordered_set>

#include "reagan/retrieval.hpp"

using namespace reagan;

namespace {

SemanticIndex make_index(std::size_t n, std::size_t dim) {
    std::mt19937_64 rng(42);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    SemanticIndex index;
    index.dim = dim;
    index.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingVector v;
        v.values.resize(dim);
        for (float& x : v.values) x = dist(rng);
        index.entries.push_back({static_cast<NodeId>(i), std::move(v),
                                 "node " + std::to_string(i),
                                 i % 2 == 0 ? std::optional<int>(static_cast<int>(i % 7))
                                            : std::nullopt});
    }
    return index;
}

void bench_top_k(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    SemanticIndex index = make_index(n, 64);
    std::mt19937_64 rng(7);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    EmbeddingVector query;
    query.values.resize(64);
    for (float& x : query.values) x = dist(rng);
    std::unordered_set<NodeId> exclude = {0};

    for (auto _ : state) {
        auto hits = top_k(index, query, 10, exclude);
        benchmark::DoNotOptimize(hits);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(n));
}

} // namespace

BENCHMARK(bench_top_k)->Arg(1000)->Arg(8000)->Arg(32000);

BENCHMARK_MAIN();
