#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "reagan/embedding.hpp"
#include "reagan/graph.hpp"
#include "reagan/types.hpp"

namespace reagan {

struct IndexEntry {
    NodeId node_id = 0;
    EmbeddingVector embedding;
    std::string text;
    std::optional<int> label; // present only for train-split nodes
};

// Structure-free semantic database: one entry per node, keyed by the
// embedding of the node's original text, no adjacency.
struct SemanticIndex {
    std::vector<IndexEntry> entries; // ascending node_id
    std::size_t dim = 0;
};

struct RetrievalHit {
    NodeId node_id = 0;
    double similarity = 0.0;
    std::string text;
    std::optional<int> label;
};

SemanticIndex build_index(const TextAttributedGraph& graph, EmbeddingProvider& embedder);

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// k highest-cosine entries not in exclude, descending similarity, exact ties
// broken by ascending node_id. Returns fewer than k only when the eligible
// pool is smaller.
std::vector<RetrievalHit> top_k(const SemanticIndex& index, const EmbeddingVector& query,
                                std::size_t k, const std::unordered_set<NodeId>& exclude);

// Sidecar file: one JSON header line {"dim":..,"count":..,"ids":[..]}
// followed by count*dim little-endian f32 values. Texts and labels are
// rejoined from the graph on load.
void save_index(const SemanticIndex& index, const std::string& path);
SemanticIndex load_index(const std::string& path, const TextAttributedGraph& graph);

} // namespace reagan
