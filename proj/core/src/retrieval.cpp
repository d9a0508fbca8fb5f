#include "reagan/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "reagan/errors.hpp"

namespace reagan {

SemanticIndex build_index(const TextAttributedGraph& graph, EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(graph.node_count());
    for (const NodeRecord& n : graph.nodes()) texts.push_back(n.text);

    std::vector<EmbeddingVector> vectors;
    try {
        vectors = embedder.embed(texts);
    } catch (const EmbedderFailure&) {
        throw;
    } catch (const Error& e) {
        throw EmbedderFailure(std::string("index build: ") + e.what());
    }
    if (vectors.size() != texts.size()) {
        throw EmbedderFailure("provider returned " + std::to_string(vectors.size()) +
                              " vectors for " + std::to_string(texts.size()) + " texts");
    }

    SemanticIndex index;
    index.entries.reserve(graph.node_count());
    for (const NodeRecord& n : graph.nodes()) {
        EmbeddingVector& vec = vectors[static_cast<std::size_t>(n.id)];
        if (index.dim == 0) index.dim = vec.dim();
        if (vec.dim() != index.dim) {
            throw DimensionMismatch("node " + std::to_string(n.id) + " embedding dim " +
                                    std::to_string(vec.dim()) + " != " +
                                    std::to_string(index.dim));
        }
        IndexEntry entry;
        entry.node_id = n.id;
        entry.embedding = std::move(vec);
        entry.text = n.text;
        if (n.split == Split::Train) entry.label = n.label;
        index.entries.push_back(std::move(entry));
    }
    return index;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatch("cosine over dims " + std::to_string(a.dim()) + " and " +
                                std::to_string(b.dim()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        double x = a.values[i];
        double y = b.values[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of all-zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<RetrievalHit> top_k(const SemanticIndex& index, const EmbeddingVector& query,
                                std::size_t k, const std::unordered_set<NodeId>& exclude) {
    if (index.entries.empty()) throw EmptyIndex("top_k over empty index");
    if (k == 0) return {};

    struct Scored {
        double similarity;
        const IndexEntry* entry;
    };
    // ordering: better = higher similarity, ties by lower node id
    auto better = [](const Scored& a, const Scored& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.entry->node_id < b.entry->node_id;
    };

    // min-heap of the best k seen so far (heap top = worst of the kept)
    std::vector<Scored> heap;
    heap.reserve(k + 1);
    auto worse_first = [&](const Scored& a, const Scored& b) { return better(a, b); };

    for (const IndexEntry& entry : index.entries) {
        if (exclude.count(entry.node_id) != 0) continue;
        Scored s{cosine(query, entry.embedding), &entry};
        if (heap.size() < k) {
            heap.push_back(s);
            std::push_heap(heap.begin(), heap.end(), worse_first);
        } else if (better(s, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), worse_first);
            heap.back() = s;
            std::push_heap(heap.begin(), heap.end(), worse_first);
        }
    }
    std::sort(heap.begin(), heap.end(), better);

    std::vector<RetrievalHit> out;
    out.reserve(heap.size());
    for (const Scored& s : heap) {
        out.push_back({s.entry->node_id, s.similarity, s.entry->text, s.entry->label});
    }
    return out;
}

void save_index(const SemanticIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    nlohmann::ordered_json header;
    header["dim"] = index.dim;
    header["count"] = index.entries.size();
    std::vector<NodeId> ids;
    ids.reserve(index.entries.size());
    for (const IndexEntry& e : index.entries) ids.push_back(e.node_id);
    header["ids"] = ids;
    out << header.dump() << "\n";
    for (const IndexEntry& e : index.entries) {
        for (float v : e.embedding.values) {
            // little-endian f32; portable only across little-endian hosts,
            // which is all this artifact targets
            out.write(reinterpret_cast<const char*>(&v), sizeof(float));
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

SemanticIndex load_index(const std::string& path, const TextAttributedGraph& graph) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw IoError("missing header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": bad header: " + e.what());
    }
    if (!header.contains("dim") || !header.contains("count") || !header.contains("ids")) {
        throw IoError(path + ": header missing dim/count/ids");
    }
    std::size_t dim = header["dim"].get<std::size_t>();
    std::size_t count = header["count"].get<std::size_t>();
    std::vector<NodeId> ids = header["ids"].get<std::vector<NodeId>>();
    if (ids.size() != count) throw IoError(path + ": ids length != count");

    SemanticIndex index;
    index.dim = dim;
    index.entries.reserve(count);
    for (NodeId id : ids) {
        const NodeRecord& n = graph.node(id);
        IndexEntry entry;
        entry.node_id = id;
        entry.text = n.text;
        if (n.split == Split::Train) entry.label = n.label;
        entry.embedding.values.resize(dim);
        in.read(reinterpret_cast<char*>(entry.embedding.values.data()),
                static_cast<std::streamsize>(dim * sizeof(float)));
        if (!in) throw IoError(path + ": truncated vector data");
        index.entries.push_back(std::move(entry));
    }
    return index;
}

} // namespace reagan
