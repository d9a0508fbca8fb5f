#include <benchmark/benchmark.h>

#include <string>
#include <utility>

#include "reagan/memory.hpp"
#include "reagan/prompts.hpp"
#include "reagan/types.hpp"

using namespace reagan;

namespace {

MemoryBuffer loaded_buffer() {
    NodeRecord node;
    node.id = 0;
    node.text = "Adaptive routing over sparse citation structures with latent topic drift.";
    MemoryBuffer buf = init_memory(node);
    auto always_train = [](NodeId) { return true; };
    for (int layer = 1; layer <= 3; ++layer) {
        std::vector<IncomingExample> examples;
        for (int i = 0; i < 4; ++i) {
            IncomingExample ex;
            ex.origin_node = layer * 10 + i;
            ex.source = i % 2 == 0 ? MemorySource::Local : MemorySource::Global;
            ex.label = i % 7;
            ex.rank = i;
            ex.text = "Reference abstract " + std::to_string(layer) + "-" + std::to_string(i) +
                      " covering retrieval, aggregation and labeling behavior in context.";
            examples.push_back(std::move(ex));
        }
        append_layer_results(buf, layer,
                             std::make_pair(layer % 2 == 1 ? MemorySource::Local
                                                           : MemorySource::Global,
                                            "Layer " + std::to_string(layer) +
                                                " aggregate text with enough words to resemble "
                                                "a concatenated neighborhood readout."),
                             examples, always_train);
    }
    return buf;
}

void bench_build_planning_prompt(benchmark::State& state) {
    MemoryBuffer buf = loaded_buffer();
    LabelSpace labels = make_label_space({"c0", "c1", "c2", "c3", "c4", "c5", "c6"});
    PromptOptions options;
    options.budget.max_prompt_tokens = 2048;

    for (auto _ : state) {
        std::string prompt = build_planning_prompt(buf, labels, options);
        benchmark::DoNotOptimize(prompt);
    }
}

void bench_parse_action_plan(benchmark::State& state) {
    const std::string reply =
        "Considering the sparse local neighborhood, the best move is wider context.\n"
        "```json\n"
        "[{\"action_type\": \"local+global aggregate\"}, {\"action_type\": \"no_op\"}]\n"
        "```";

    for (auto _ : state) {
        ActionPlan plan = parse_action_plan(reply);
        benchmark::DoNotOptimize(plan);
    }
}

} // namespace

BENCHMARK(bench_build_planning_prompt);
BENCHMARK(bench_parse_action_plan);
