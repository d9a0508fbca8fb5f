#include "reagan/memory.hpp"

#include <algorithm>

#include <json.hpp>

#include "reagan/errors.hpp"

namespace reagan {

std::string memory_kind_name(MemoryKind kind) {
    switch (kind) {
    case MemoryKind::OriginalText: return "original_text";
    case MemoryKind::AggregatedText: return "aggregated_text";
    case MemoryKind::LabeledExample: return "labeled_example";
    }
    return "original_text";
}

std::string memory_source_name(MemorySource source) {
    switch (source) {
    case MemorySource::Self: return "self";
    case MemorySource::Local: return "local";
    case MemorySource::Global: return "global";
    }
    return "self";
}

std::string strategy_name(Strategy s) {
    return s == Strategy::A ? "A" : "B";
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
    if (name == "A" || name == "a") return Strategy::A;
    if (name == "B" || name == "b") return Strategy::B;
    return std::nullopt;
}

const std::string& MemoryBuffer::original_text() const {
    static const std::string empty;
    if (entries_.empty()) return empty;
    return entries_.front().text;
}

const std::string& MemoryBuffer::current_aggregate(MemorySource source) const {
    if (source == MemorySource::Local) return local_aggregate_;
    if (source == MemorySource::Global) return global_aggregate_;
    return original_text();
}

std::size_t MemoryBuffer::labeled_example_count() const {
    std::size_t n = 0;
    for (const MemoryEntry& e : entries_) {
        if (e.kind == MemoryKind::LabeledExample) ++n;
    }
    return n;
}

std::size_t MemoryBuffer::labeled_example_count(MemorySource source) const {
    std::size_t n = 0;
    for (const MemoryEntry& e : entries_) {
        if (e.kind == MemoryKind::LabeledExample && e.source == source) ++n;
    }
    return n;
}

bool MemoryBuffer::has_example_from(NodeId origin, MemorySource source) const {
    for (const MemoryEntry& e : entries_) {
        if (e.kind == MemoryKind::LabeledExample && e.source == source &&
            e.origin_node == origin) {
            return true;
        }
    }
    return false;
}

MemoryBuffer init_memory(const NodeRecord& node) {
    MemoryBuffer buffer;
    buffer.node_id_ = node.id;
    MemoryEntry original;
    original.kind = MemoryKind::OriginalText;
    original.source = MemorySource::Self;
    original.layer = 0;
    original.text = node.text;
    buffer.entries_.push_back(std::move(original));
    buffer.local_aggregate_ = node.text;
    buffer.global_aggregate_ = node.text;
    buffer.carried_ = node.text;
    return buffer;
}

void append_layer_results(MemoryBuffer& buffer, int layer,
                          const std::optional<std::pair<MemorySource, std::string>>& aggregate,
                          const std::vector<IncomingExample>& examples,
                          const std::function<bool(NodeId)>& is_train) {
    if (aggregate) {
        const auto& [source, text] = *aggregate;
        MemoryEntry entry;
        entry.kind = MemoryKind::AggregatedText;
        entry.source = source;
        entry.layer = layer;
        entry.text = text;
        buffer.entries_.push_back(std::move(entry));
        if (source == MemorySource::Local) {
            buffer.local_aggregate_ = text;
        } else {
            buffer.global_aggregate_ = text;
        }
        buffer.carried_ = text;
    }
    for (const IncomingExample& ex : examples) {
        if (!is_train(ex.origin_node)) {
            throw LabelLeakage("example origin " + std::to_string(ex.origin_node) +
                               " is not a train-split node");
        }
        if (buffer.has_example_from(ex.origin_node, ex.source)) continue;
        MemoryEntry entry;
        entry.kind = MemoryKind::LabeledExample;
        entry.source = ex.source;
        entry.layer = layer;
        entry.text = ex.text;
        entry.label = ex.label;
        entry.origin_node = ex.origin_node;
        entry.rank = ex.rank;
        buffer.entries_.push_back(std::move(entry));
    }
}

std::vector<SelectedExample> select_examples(const MemoryBuffer& buffer, Strategy strategy,
                                             std::size_t local_limit, std::size_t global_limit) {
    std::vector<const MemoryEntry*> local_entries;
    std::vector<const MemoryEntry*> global_entries;
    for (const MemoryEntry& e : buffer.entries()) {
        if (e.kind != MemoryKind::LabeledExample) continue;
        if (e.source == MemorySource::Local) {
            local_entries.push_back(&e);
        } else if (e.source == MemorySource::Global) {
            global_entries.push_back(&e);
        }
    }
    std::stable_sort(local_entries.begin(), local_entries.end(),
                     [](const MemoryEntry* a, const MemoryEntry* b) {
                         return a->origin_node < b->origin_node;
                     });
    // global entries stay in append order: layer, then retrieval rank

    bool include_global = strategy == Strategy::A || local_entries.size() < 2;

    std::vector<SelectedExample> out;
    for (std::size_t i = 0; i < local_entries.size() && i < local_limit; ++i) {
        const MemoryEntry& e = *local_entries[i];
        out.push_back({*e.origin_node, e.text, *e.label, MemorySource::Local});
    }
    if (include_global) {
        for (std::size_t i = 0; i < global_entries.size() && i < global_limit; ++i) {
            const MemoryEntry& e = *global_entries[i];
            out.push_back({*e.origin_node, e.text, *e.label, MemorySource::Global});
        }
    }
    return out;
}

std::string memory_trace_jsonl(const MemoryBuffer& buffer) {
    std::string out;
    for (const MemoryEntry& e : buffer.entries()) {
        nlohmann::ordered_json j;
        j["kind"] = memory_kind_name(e.kind);
        j["source"] = memory_source_name(e.source);
        j["layer"] = e.layer;
        j["text"] = e.text;
        if (e.label) {
            j["label"] = *e.label;
        } else {
            j["label"] = nullptr;
        }
        if (e.origin_node) {
            j["origin_node"] = *e.origin_node;
        } else {
            j["origin_node"] = nullptr;
        }
        out += j.dump();
        out += "\n";
    }
    return out;
}

} // namespace reagan
