#include "reagan/actions.hpp"

#include <algorithm>

#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"

namespace reagan {

std::string textagg_mode_name(TextAggMode mode) {
    return mode == TextAggMode::Concat ? "concat" : "summarize";
}

std::string summarize_prompt(const std::string& material) {
    return "Summarize the following material into one concise passage, preserving the topical "
           "keywords:\n\n" +
           material;
}

std::string text_agg(const std::string& self_text, const std::vector<std::string>& neighbor_texts,
                     TextAggMode mode, std::size_t char_budget, const Summarizer& summarize) {
    if (mode == TextAggMode::Concat) {
        if (neighbor_texts.empty()) return self_text;
        std::string joined = self_text;
        for (const std::string& t : neighbor_texts) {
            joined += kAggSeparator;
            joined += t;
        }
        if (joined.size() <= char_budget) return joined;
        // the node's own text is the identity anchor and is never cut
        std::size_t keep = std::max(self_text.size(), char_budget);
        return utf8_truncate(joined, keep);
    }

    if (!summarize) {
        throw SummarizeBackendFailure("summarize mode without a summarize backend");
    }
    std::string material = self_text;
    for (const std::string& t : neighbor_texts) {
        material += kAggSeparator;
        material += t;
    }
    std::string summary;
    try {
        summary = summarize(material);
    } catch (const std::exception& e) {
        throw SummarizeBackendFailure(e.what());
    }
    summary = trim(summary);
    if (summary.empty()) throw SummarizeBackendFailure("summarize backend returned empty text");
    return utf8_truncate(summary, std::max(self_text.size(), char_budget));
}

AggregationResult local_aggregate(NodeId v, const LayerSnapshot& snapshot,
                                  const TextAttributedGraph& graph,
                                  const AggregateOptions& options, const Summarizer& summarize) {
    std::vector<NodeId> nearby = neighbors(graph, v, options.hops);

    AggregationResult result;
    result.source = MemorySource::Local;
    result.contributing_nodes = nearby;

    std::vector<std::string> texts;
    texts.reserve(nearby.size());
    for (NodeId u : nearby) texts.push_back(snapshot.aggregate_of(u));

    result.new_aggregate = text_agg(snapshot.aggregate_of(v), texts, options.mode,
                                    options.char_budget, summarize);

    int rank = 0;
    for (NodeId u : nearby) {
        const NodeRecord& rec = graph.node(u);
        if (rec.split != Split::Train || !rec.label) continue;
        CollectedExample ex;
        ex.origin_node = u;
        ex.text = options.examples_use_raw_text ? rec.text : snapshot.aggregate_of(u);
        ex.label = *rec.label;
        ex.rank = rank++;
        result.examples.push_back(std::move(ex));
    }
    return result;
}

AggregationResult global_aggregate(NodeId v, const LayerSnapshot& snapshot,
                                   const SemanticIndex& index, EmbeddingProvider& embedder,
                                   const AggregateOptions& options, const Summarizer& summarize) {
    EmbeddingVector query = embedder.embed_one(snapshot.aggregate_of(v));
    std::vector<RetrievalHit> hits = top_k(index, query, options.k, {v});

    AggregationResult result;
    result.source = MemorySource::Global;
    result.contributing_nodes.reserve(hits.size());

    std::vector<std::string> texts;
    texts.reserve(hits.size());
    for (const RetrievalHit& hit : hits) {
        result.contributing_nodes.push_back(hit.node_id);
        texts.push_back(snapshot.aggregate_of(hit.node_id));
    }

    result.new_aggregate = text_agg(snapshot.aggregate_of(v), texts, options.mode,
                                    options.char_budget, summarize);

    for (std::size_t i = 0; i < hits.size(); ++i) {
        const RetrievalHit& hit = hits[i];
        if (!hit.label) continue; // index labels exist only for train nodes
        CollectedExample ex;
        ex.origin_node = hit.node_id;
        ex.text = options.examples_use_raw_text ? hit.text
                                                : snapshot.aggregate_of(hit.node_id);
        ex.label = *hit.label;
        ex.rank = static_cast<int>(i);
        result.examples.push_back(std::move(ex));
    }
    return result;
}

} // namespace reagan
