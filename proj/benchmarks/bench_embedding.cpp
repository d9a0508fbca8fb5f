#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "reagan/embedding.hpp"

using namespace reagan;

namespace {

std::vector<std::string> sample_texts(std::size_t count) {
    std::vector<std::string> texts;
    texts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::string text;
        for (int t = 0; t < 20; ++t) {
            text += "token" + std::to_string((i * 31 + static_cast<std::size_t>(t) * 7) % 997);
            text += ' ';
        }
        texts.push_back(std::move(text));
    }
    return texts;
}

void bench_hash_embed(benchmark::State& state) {
    HashEmbedder embedder(static_cast<std::size_t>(state.range(0)), 0);
    std::vector<std::string> texts = sample_texts(64);

    for (auto _ : state) {
        auto vectors = embedder.embed(texts);
        benchmark::DoNotOptimize(vectors);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(texts.size()));
}

} // namespace

BENCHMARK(bench_hash_embed)->Arg(64)->Arg(256)->Arg(1024);
