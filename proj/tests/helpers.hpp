#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reagan/embedding.hpp"
#include "reagan/errors.hpp"
#include "reagan/graph.hpp"
#include "reagan/types.hpp"

namespace test_support {

// Lookup-table embedder for hand-traced fixtures. Unknown text is an error
// so a drifting query surfaces as a failure instead of a silent mismatch.
class FixedEmbedder : public reagan::EmbeddingProvider {
public:
    explicit FixedEmbedder(std::map<std::string, std::vector<float>> table)
        : table_(std::move(table)) {
        if (!table_.empty()) dim_ = table_.begin()->second.size();
    }

    std::size_t dim() const override { return dim_; }
    std::string model_name() const override { return "fixed"; }

    std::vector<reagan::EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        std::vector<reagan::EmbeddingVector> out;
        out.reserve(texts.size());
        for (const std::string& text : texts) {
            auto it = table_.find(text);
            if (it == table_.end()) {
                throw reagan::EmbedderFailure("no fixed vector for: " + text);
            }
            out.push_back({it->second});
        }
        return out;
    }

private:
    std::map<std::string, std::vector<float>> table_;
    std::size_t dim_ = 0;
};

class TempDir {
public:
    explicit TempDir(const std::string& stem) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() /
                (stem + "-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Five nodes, two labels (blue=0, red=1), train {0,1,2}, test {3,4}.
// Edges: 0-3, 1-3, 3-4, 2-4.
inline reagan::TextAttributedGraph five_node_graph() {
    std::vector<reagan::NodeInput> nodes = {
        {"p0", "alpha red apple", "red"},
        {"p1", "bravo red berry", "red"},
        {"p2", "charlie blue cloud", "blue"},
        {"p3", "delta mixed", "red"},
        {"p4", "echo mixed", "blue"},
    };
    std::vector<std::pair<std::string, std::string>> edges = {
        {"p0", "p3"}, {"p1", "p3"}, {"p3", "p4"}, {"p2", "p4"}};
    auto g = reagan::TextAttributedGraph::from_records(nodes, edges);
    reagan::SplitAssignment splits;
    splits.train_ids = {0, 1, 2};
    splits.test_ids = {3, 4};
    reagan::apply_splits(g, splits);
    return g;
}

// Vector table covering the five originals plus the two layer-1 aggregates
// that become layer-2 retrieval queries.
inline std::map<std::string, std::vector<float>> five_node_vectors() {
    return {
        {"alpha red apple", {1.0f, 0.0f, 0.0f}},
        {"bravo red berry", {0.8f, 0.6f, 0.0f}},
        {"charlie blue cloud", {0.0f, 1.0f, 0.0f}},
        {"delta mixed", {0.6f, 0.8f, 0.0f}},
        {"echo mixed", {0.0f, 0.0f, 1.0f}},
        {"delta mixed || alpha red apple || bravo red berry || echo mixed", {1.0f, 1.0f, 0.0f}},
        {"echo mixed || charlie blue cloud || delta mixed", {0.0f, 1.0f, 1.0f}},
    };
}

// Twenty nodes in two planted clusters. Cluster A is nodes 0..9 with label
// "aster", cluster B is 10..19 with label "briar"; each cluster shares four
// topic tokens and every node adds a unique token. Ring edges keep clusters
// connected; cross_wired adds edges that give test nodes 8 and 18 an
// opposite-cluster local majority.
inline reagan::TextAttributedGraph cluster_graph(bool cross_wired) {
    std::vector<reagan::NodeInput> nodes;
    for (int i = 0; i < 10; ++i) {
        nodes.push_back({"a" + std::to_string(i),
                         "amber quartz river harbor uniq_a" + std::to_string(i), "aster"});
    }
    for (int i = 0; i < 10; ++i) {
        nodes.push_back({"b" + std::to_string(i),
                         "basil copper meadow lantern uniq_b" + std::to_string(i), "briar"});
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (int i = 0; i < 10; ++i) {
        edges.push_back({"a" + std::to_string(i), "a" + std::to_string((i + 1) % 10)});
        edges.push_back({"b" + std::to_string(i), "b" + std::to_string((i + 1) % 10)});
    }
    if (cross_wired) {
        edges.push_back({"a8", "b2"});
        edges.push_back({"a8", "b3"});
        edges.push_back({"a8", "a0"});
        edges.push_back({"b8", "a2"});
        edges.push_back({"b8", "a3"});
        edges.push_back({"b8", "b0"});
        edges.push_back({"a9", "a0"});
        edges.push_back({"a9", "a1"});
        edges.push_back({"b9", "b1"});
        edges.push_back({"b9", "b2"});
    }
    return reagan::TextAttributedGraph::from_records(nodes, edges);
}

// Train {0..6, 10..16}, val {7, 17}, test {8, 9, 18, 19}.
inline reagan::SplitAssignment cluster_splits() {
    reagan::SplitAssignment splits;
    for (reagan::NodeId v = 0; v <= 6; ++v) splits.train_ids.push_back(v);
    for (reagan::NodeId v = 10; v <= 16; ++v) splits.train_ids.push_back(v);
    splits.val_ids = {7, 17};
    splits.test_ids = {8, 9, 18, 19};
    return splits;
}

inline reagan::TextAttributedGraph cluster_fixture(bool cross_wired) {
    auto g = cluster_graph(cross_wired);
    reagan::apply_splits(g, cluster_splits());
    return g;
}

// Writes the fixture as dataset files for CLI-level tests. Returns the
// directory paths via out parameters.
inline void write_cluster_dataset(const TempDir& dir, bool cross_wired, std::string& nodes_path,
                                  std::string& edges_path, std::string& splits_path) {
    auto g = cluster_fixture(cross_wired);
    nodes_path = dir.file(cross_wired ? "nodes_crossed.jsonl" : "nodes.jsonl");
    edges_path = dir.file(cross_wired ? "edges_crossed.csv" : "edges.csv");
    reagan::save_graph(g, nodes_path, edges_path);

    splits_path = dir.file("splits.jsonl");
    std::ostringstream lines;
    auto splits = cluster_splits();
    auto emit = [&](const std::vector<reagan::NodeId>& ids, const char* name) {
        for (reagan::NodeId v : ids) {
            lines << "{\"id\": \"" << g.node(v).external_id << "\", \"split\": \"" << name
                  << "\"}\n";
        }
    };
    emit(splits.train_ids, "train");
    emit(splits.val_ids, "val");
    emit(splits.test_ids, "test");
    write_file(splits_path, lines.str());
}

} // namespace test_support
