#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reagan/types.hpp"

namespace reagan {

enum class MemoryKind { OriginalText, AggregatedText, LabeledExample };
enum class MemorySource { Self, Local, Global };

std::string memory_kind_name(MemoryKind kind);
std::string memory_source_name(MemorySource source);

struct MemoryEntry {
    MemoryKind kind = MemoryKind::OriginalText;
    MemorySource source = MemorySource::Self;
    int layer = 0;
    std::string text;
    std::optional<int> label;
    std::optional<NodeId> origin_node;
    int rank = 0; // retrieval rank at append time; 0 for non-example entries
};

struct IncomingExample {
    NodeId origin_node = 0;
    std::string text;
    int label = 0;
    MemorySource source = MemorySource::Local;
    int rank = 0;
};

// Append-only per-node store. current_aggregate tracks the latest aggregated
// text per source; carried_aggregate is the single text other nodes read at
// the next layer (last aggregate written, initially the original text).
class MemoryBuffer {
public:
    MemoryBuffer() = default;

    NodeId node_id() const { return node_id_; }
    const std::vector<MemoryEntry>& entries() const { return entries_; }
    const std::string& original_text() const;
    const std::string& current_aggregate(MemorySource source) const;
    const std::string& carried_aggregate() const { return carried_; }

    std::size_t labeled_example_count() const;
    std::size_t labeled_example_count(MemorySource source) const;
    bool has_example_from(NodeId origin, MemorySource source) const;

    friend MemoryBuffer init_memory(const NodeRecord& node);
    friend void append_layer_results(
        MemoryBuffer& buffer, int layer,
        const std::optional<std::pair<MemorySource, std::string>>& aggregate,
        const std::vector<IncomingExample>& examples,
        const std::function<bool(NodeId)>& is_train);

private:
    NodeId node_id_ = 0;
    std::vector<MemoryEntry> entries_;
    std::string local_aggregate_;
    std::string global_aggregate_;
    std::string carried_;
};

MemoryBuffer init_memory(const NodeRecord& node);

// Folds one layer's action results into the buffer. Examples are deduped by
// (origin_node, source); an example whose origin is not train-split raises
// LabelLeakage. Passing no aggregate and no examples records nothing.
void append_layer_results(
    MemoryBuffer& buffer, int layer,
    const std::optional<std::pair<MemorySource, std::string>>& aggregate,
    const std::vector<IncomingExample>& examples,
    const std::function<bool(NodeId)>& is_train);

enum class Strategy { A, B };

std::string strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

struct SelectedExample {
    NodeId origin_node = 0;
    std::string text;
    int label = 0;
    MemorySource source = MemorySource::Local;
};

// Strategy A: up to local_limit local then up to global_limit global
// examples. Strategy B: global examples only while fewer than two local
// labeled examples are stored. Local ordered by ascending origin id, global
// by append order (layer, then retrieval rank).
std::vector<SelectedExample> select_examples(const MemoryBuffer& buffer, Strategy strategy,
                                             std::size_t local_limit, std::size_t global_limit);

// One JSON object per line, fields: kind, source, layer, text, label, origin_node.
std::string memory_trace_jsonl(const MemoryBuffer& buffer);

} // namespace reagan
