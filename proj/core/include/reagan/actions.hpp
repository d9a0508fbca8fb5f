#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "reagan/embedding.hpp"
#include "reagan/graph.hpp"
#include "reagan/memory.hpp"
#include "reagan/retrieval.hpp"
#include "reagan/snapshot.hpp"
#include "reagan/types.hpp"

namespace reagan {

enum class TextAggMode { Concat, Summarize };

std::string textagg_mode_name(TextAggMode mode);

// Separator between joined texts in concat mode.
inline constexpr const char* kAggSeparator = " || ";

// Produces a summary of the joined material, capped by the caller.
using Summarizer = std::function<std::string(const std::string& material)>;

// The fixed instruction wrapped around material sent to a summarize backend.
std::string summarize_prompt(const std::string& material);

// Concat mode: self_text + separator-joined neighbor texts, truncated to
// char_budget at a UTF-8 boundary; self_text itself is never truncated.
// Summarize mode: one summarizer call over the same material, output capped
// at char_budget; a missing or throwing summarizer raises
// SummarizeBackendFailure (callers degrade to concat).
std::string text_agg(const std::string& self_text, const std::vector<std::string>& neighbor_texts,
                     TextAggMode mode, std::size_t char_budget, const Summarizer& summarize = {});

struct CollectedExample {
    NodeId origin_node = 0;
    std::string text;
    int label = 0;
    int rank = 0;
};

struct AggregationResult {
    MemorySource source = MemorySource::Local;
    std::string new_aggregate;
    std::vector<CollectedExample> examples; // train-split origins only
    std::vector<NodeId> contributing_nodes;
};

struct AggregateOptions {
    TextAggMode mode = TextAggMode::Concat;
    std::size_t char_budget = 1200;
    int hops = 1;        // local
    std::size_t k = 5;   // global
    bool examples_use_raw_text = false;
};

// Aggregates the previous-layer texts of v's structural neighbors (ascending
// id order) and collects (text, label) examples from train-split neighbors.
AggregationResult local_aggregate(NodeId v, const LayerSnapshot& snapshot,
                                  const TextAttributedGraph& graph,
                                  const AggregateOptions& options,
                                  const Summarizer& summarize = {});

// Embeds v's previous-layer aggregate as the query, retrieves top-k entries
// (self excluded), aggregates their previous-layer texts in rank order, and
// collects examples from the train-labeled hits.
AggregationResult global_aggregate(NodeId v, const LayerSnapshot& snapshot,
                                   const SemanticIndex& index, EmbeddingProvider& embedder,
                                   const AggregateOptions& options,
                                   const Summarizer& summarize = {});

struct NoOpResult {};

// Deliberate pause: no memory delta, aggregates carry forward.
inline NoOpResult no_op(NodeId) { return {}; }

} // namespace reagan
