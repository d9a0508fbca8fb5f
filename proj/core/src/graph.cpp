#include "reagan/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "reagan/errors.hpp"
#include "reagan/text_util.hpp"

namespace reagan {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

const NodeRecord& TextAttributedGraph::node(NodeId v) const {
    if (!has_node(v)) throw UnknownNode(v);
    return nodes_[static_cast<std::size_t>(v)];
}

bool TextAttributedGraph::has_node(NodeId v) const {
    return v >= 0 && static_cast<std::size_t>(v) < nodes_.size();
}

const std::vector<NodeId>& TextAttributedGraph::adjacent(NodeId v) const {
    if (!has_node(v)) throw UnknownNode(v);
    return adjacency_[static_cast<std::size_t>(v)];
}

NodeId TextAttributedGraph::resolve(const std::string& external_id) const {
    auto it = external_ids_.find(external_id);
    if (it == external_ids_.end()) throw Error("unknown external node id: " + external_id);
    return it->second;
}

bool TextAttributedGraph::has_external(const std::string& external_id) const {
    return external_ids_.count(external_id) != 0;
}

void TextAttributedGraph::set_split(NodeId v, Split s) {
    if (!has_node(v)) throw UnknownNode(v);
    nodes_[static_cast<std::size_t>(v)].split = s;
}

void TextAttributedGraph::set_text(NodeId v, std::string text) {
    if (!has_node(v)) throw UnknownNode(v);
    std::string trimmed = trim(text);
    if (trimmed.empty()) throw EmptyText("node " + std::to_string(v) + " text empty");
    nodes_[static_cast<std::size_t>(v)].text = std::move(trimmed);
}

std::vector<std::pair<NodeId, NodeId>> TextAttributedGraph::edge_list() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(edge_count_);
    for (std::size_t u = 0; u < adjacency_.size(); ++u) {
        for (NodeId w : adjacency_[u]) {
            if (w > static_cast<NodeId>(u)) edges.emplace_back(static_cast<NodeId>(u), w);
        }
    }
    return edges;
}

TextAttributedGraph TextAttributedGraph::from_records(
    const std::vector<NodeInput>& nodes,
    const std::vector<std::pair<std::string, std::string>>& edges) {
    TextAttributedGraph g;

    std::vector<std::string> label_strings;
    for (const NodeInput& n : nodes) {
        if (n.label) label_strings.push_back(*n.label);
    }
    std::sort(label_strings.begin(), label_strings.end());
    label_strings.erase(std::unique(label_strings.begin(), label_strings.end()),
                        label_strings.end());
    g.label_space_ = make_label_space(std::move(label_strings));

    g.nodes_.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeInput& n = nodes[i];
        std::string text = trim(n.text);
        if (text.empty()) throw EmptyText("node " + n.id + " has empty text");
        if (g.external_ids_.count(n.id) != 0) {
            throw MalformedRecord("<nodes>", i + 1, "duplicate node id " + n.id);
        }
        NodeRecord rec;
        rec.id = static_cast<NodeId>(i);
        rec.external_id = n.id;
        rec.text = std::move(text);
        if (n.label) rec.label = g.label_space_.index_of_display(*n.label);
        g.external_ids_.emplace(n.id, rec.id);
        g.nodes_.push_back(std::move(rec));
    }
    g.adjacency_.assign(g.nodes_.size(), {});

    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& [src, dst] : edges) {
        auto s = g.external_ids_.find(src);
        auto d = g.external_ids_.find(dst);
        if (s == g.external_ids_.end()) {
            throw DanglingEdge("edge references unknown node " + src);
        }
        if (d == g.external_ids_.end()) {
            throw DanglingEdge("edge references unknown node " + dst);
        }
        NodeId a = s->second;
        NodeId c = d->second;
        if (a == c) continue; // self-loops dropped during normalization
        if (a > c) std::swap(a, c);
        if (!seen.emplace(a, c).second) continue;
        g.adjacency_[static_cast<std::size_t>(a)].push_back(c);
        g.adjacency_[static_cast<std::size_t>(c)].push_back(a);
        ++g.edge_count_;
    }
    for (auto& list : g.adjacency_) std::sort(list.begin(), list.end());
    return g;
}

TextAttributedGraph load_graph(const std::string& nodes_path, const std::string& edges_path) {
    std::vector<NodeInput> nodes;
    std::unordered_set<std::string> ids_seen;
    {
        std::vector<std::string> lines = read_lines(nodes_path);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            const std::string& line = lines[i];
            if (trim(line).empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedRecord(nodes_path, i + 1, e.what());
            }
            if (!j.is_object()) throw MalformedRecord(nodes_path, i + 1, "record is not an object");
            if (!j.contains("id")) throw MalformedRecord(nodes_path, i + 1, "missing id");
            std::string id;
            if (j["id"].is_string()) {
                id = j["id"].get<std::string>();
            } else if (j["id"].is_number_integer()) {
                id = std::to_string(j["id"].get<long long>());
            } else {
                throw MalformedRecord(nodes_path, i + 1, "id must be a string");
            }
            if (!j.contains("text") || !j["text"].is_string()) {
                throw MalformedRecord(nodes_path, i + 1, "missing text");
            }
            std::string text = trim(j["text"].get<std::string>());
            if (text.empty()) {
                throw EmptyText(nodes_path + ":" + std::to_string(i + 1) + ": node " + id +
                                " has empty text");
            }
            std::optional<std::string> label;
            if (j.contains("label") && !j["label"].is_null()) {
                if (!j["label"].is_string()) {
                    throw MalformedRecord(nodes_path, i + 1, "label must be a string or null");
                }
                label = j["label"].get<std::string>();
            }
            if (!ids_seen.insert(id).second) {
                throw MalformedRecord(nodes_path, i + 1, "duplicate node id " + id);
            }
            nodes.push_back({std::move(id), std::move(text), std::move(label)});
        }
    }

    std::vector<std::pair<std::string, std::string>> edges;
    {
        std::vector<std::string> lines = read_lines(edges_path);
        if (lines.empty() || trim(lines[0]) != "src,dst") {
            throw MalformedRecord(edges_path, 1, "expected header src,dst");
        }
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const std::string& line = lines[i];
            if (trim(line).empty()) continue;
            std::size_t comma = line.find(',');
            if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
                throw MalformedRecord(edges_path, i + 1, "expected exactly two fields");
            }
            std::string src = trim(line.substr(0, comma));
            std::string dst = trim(line.substr(comma + 1));
            if (src.empty() || dst.empty()) {
                throw MalformedRecord(edges_path, i + 1, "empty endpoint");
            }
            if (ids_seen.count(src) == 0) {
                throw DanglingEdge(edges_path + ":" + std::to_string(i + 1) +
                                   ": edge references unknown node " + src);
            }
            if (ids_seen.count(dst) == 0) {
                throw DanglingEdge(edges_path + ":" + std::to_string(i + 1) +
                                   ": edge references unknown node " + dst);
            }
            edges.emplace_back(std::move(src), std::move(dst));
        }
    }
    return TextAttributedGraph::from_records(nodes, edges);
}

void save_graph(const TextAttributedGraph& g, const std::string& nodes_path,
                const std::string& edges_path) {
    {
        std::ofstream out(nodes_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + nodes_path);
        for (const NodeRecord& n : g.nodes()) {
            nlohmann::ordered_json j;
            j["id"] = n.external_id;
            j["text"] = n.text;
            if (n.label) {
                j["label"] = g.labels().display_names[static_cast<std::size_t>(*n.label)];
            } else {
                j["label"] = nullptr;
            }
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(edges_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + edges_path);
        out << "src,dst\n";
        for (const auto& [u, w] : g.edge_list()) {
            out << g.node(u).external_id << "," << g.node(w).external_id << "\n";
        }
    }
}

std::vector<NodeId> neighbors(const TextAttributedGraph& g, NodeId v, int hops) {
    if (!g.has_node(v)) throw UnknownNode(v);
    std::vector<NodeId> found;
    std::vector<int> dist(g.node_count(), -1);
    std::deque<NodeId> queue;
    dist[static_cast<std::size_t>(v)] = 0;
    queue.push_back(v);
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        int d = dist[static_cast<std::size_t>(u)];
        if (d >= hops) continue;
        for (NodeId w : g.adjacent(u)) {
            if (dist[static_cast<std::size_t>(w)] != -1) continue;
            dist[static_cast<std::size_t>(w)] = d + 1;
            found.push_back(w);
            queue.push_back(w);
        }
    }
    std::sort(found.begin(), found.end());
    return found;
}

SplitAssignment make_splits(const TextAttributedGraph& g, double train_ratio, double val_ratio,
                            double test_ratio, std::uint64_t seed) {
    double sum = train_ratio + val_ratio + test_ratio;
    if (sum < 0.999999 || sum > 1.000001) {
        throw ConfigError("split ratios must sum to 1");
    }
    std::size_t n = g.node_count();
    std::vector<NodeId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);

    // hand-rolled Fisher-Yates: std::shuffle output is implementation-defined
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    std::size_t val_n = static_cast<std::size_t>(val_ratio * static_cast<double>(n));
    std::size_t test_n = static_cast<std::size_t>(test_ratio * static_cast<double>(n));

    SplitAssignment out;
    out.val_ids.assign(order.begin(), order.begin() + val_n);
    out.test_ids.assign(order.begin() + val_n, order.begin() + val_n + test_n);
    out.train_ids.assign(order.begin() + val_n + test_n, order.end());
    std::sort(out.val_ids.begin(), out.val_ids.end());
    std::sort(out.test_ids.begin(), out.test_ids.end());
    std::sort(out.train_ids.begin(), out.train_ids.end());
    return out;
}

SplitAssignment load_splits(const TextAttributedGraph& g, const std::string& splits_path) {
    std::vector<std::optional<Split>> assigned(g.node_count());
    std::vector<std::string> lines = read_lines(splits_path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw MalformedRecord(splits_path, i + 1, e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("split")) {
            throw MalformedRecord(splits_path, i + 1, "expected {id, split}");
        }
        std::string id;
        if (j["id"].is_string()) {
            id = j["id"].get<std::string>();
        } else if (j["id"].is_number_integer()) {
            id = std::to_string(j["id"].get<long long>());
        } else {
            throw MalformedRecord(splits_path, i + 1, "id must be a string");
        }
        if (!g.has_external(id)) {
            throw MalformedRecord(splits_path, i + 1, "unknown node id " + id);
        }
        if (!j["split"].is_string()) {
            throw MalformedRecord(splits_path, i + 1, "split must be a string");
        }
        auto split = split_from_name(j["split"].get<std::string>());
        if (!split) {
            throw MalformedRecord(splits_path, i + 1, "split must be train, val or test");
        }
        NodeId v = g.resolve(id);
        if (assigned[static_cast<std::size_t>(v)]) {
            throw MalformedRecord(splits_path, i + 1, "duplicate assignment for " + id);
        }
        assigned[static_cast<std::size_t>(v)] = *split;
    }

    SplitAssignment out;
    for (std::size_t v = 0; v < assigned.size(); ++v) {
        if (!assigned[v]) {
            throw MalformedRecord(splits_path, 0,
                                  "no split for node " + g.nodes()[v].external_id);
        }
        switch (*assigned[v]) {
        case Split::Train: out.train_ids.push_back(static_cast<NodeId>(v)); break;
        case Split::Val: out.val_ids.push_back(static_cast<NodeId>(v)); break;
        case Split::Test: out.test_ids.push_back(static_cast<NodeId>(v)); break;
        }
    }
    return out;
}

void apply_splits(TextAttributedGraph& g, const SplitAssignment& assignment) {
    for (NodeId v : assignment.train_ids) g.set_split(v, Split::Train);
    for (NodeId v : assignment.val_ids) g.set_split(v, Split::Val);
    for (NodeId v : assignment.test_ids) g.set_split(v, Split::Test);
}

void compress_texts(TextAttributedGraph& g,
                    const std::function<std::string(NodeId, const std::string&)>& compressor) {
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        g.set_text(static_cast<NodeId>(v), compressor(static_cast<NodeId>(v), g.nodes()[v].text));
    }
}

} // namespace reagan
