#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reagan/types.hpp"

namespace reagan {

struct NodeInput {
    std::string id;
    std::string text;
    std::optional<std::string> label;
};

// Immutable after construction except for split assignment and the optional
// text pre-compression pass. Edges are undirected, deduplicated, self-loop
// free; adjacency lists are sorted ascending.
class TextAttributedGraph {
public:
    TextAttributedGraph() = default;

    static TextAttributedGraph from_records(
        const std::vector<NodeInput>& nodes,
        const std::vector<std::pair<std::string, std::string>>& edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const std::vector<NodeRecord>& nodes() const { return nodes_; }
    const NodeRecord& node(NodeId v) const;
    bool has_node(NodeId v) const;
    const std::vector<NodeId>& adjacent(NodeId v) const;
    const LabelSpace& labels() const { return label_space_; }

    NodeId resolve(const std::string& external_id) const;
    bool has_external(const std::string& external_id) const;

    void set_split(NodeId v, Split s);
    void set_text(NodeId v, std::string text);

    // Undirected edge list with src < dst, sorted, for serialization.
    std::vector<std::pair<NodeId, NodeId>> edge_list() const;

private:
    std::vector<NodeRecord> nodes_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::unordered_map<std::string, NodeId> external_ids_;
    LabelSpace label_space_;
    std::size_t edge_count_ = 0;
};

TextAttributedGraph load_graph(const std::string& nodes_path, const std::string& edges_path);
void save_graph(const TextAttributedGraph& g, const std::string& nodes_path,
                const std::string& edges_path);

// All nodes within `hops` edges of v, excluding v, sorted ascending.
std::vector<NodeId> neighbors(const TextAttributedGraph& g, NodeId v, int hops);

// Deterministic shuffle-based assignment. Val and test sizes are
// floor(ratio * n); train takes the remainder.
SplitAssignment make_splits(const TextAttributedGraph& g, double train_ratio,
                            double val_ratio, double test_ratio, std::uint64_t seed);

// Split override file: JSON Lines {"id": ..., "split": "train"|"val"|"test"}.
SplitAssignment load_splits(const TextAttributedGraph& g, const std::string& splits_path);

void apply_splits(TextAttributedGraph& g, const SplitAssignment& assignment);

// Optional load-time text transform (LLM pre-compression hook). Off by
// default; texts must stay nonempty.
void compress_texts(TextAttributedGraph& g,
                    const std::function<std::string(NodeId, const std::string&)>& compressor);

} // namespace reagan
