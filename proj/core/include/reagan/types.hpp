#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reagan {

// Dense node id assigned in node-file order.
using NodeId = std::int64_t;

enum class Split { Train, Val, Test };

std::string split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

// Class labels. display_names are the distinct label strings found in the
// dataset, sorted; the class index of a label is its position in that list.
// anonymized_names are the opaque aliases used in prompts by default.
struct LabelSpace {
    std::vector<std::string> display_names;
    std::vector<std::string> anonymized_names;

    int class_count() const { return static_cast<int>(anonymized_names.size()); }
    std::optional<int> index_of_display(const std::string& name) const;
};

LabelSpace make_label_space(std::vector<std::string> display_names);

struct NodeRecord {
    NodeId id = 0;
    std::string external_id;
    std::string text;
    std::optional<int> label;
    Split split = Split::Train;
};

struct SplitAssignment {
    std::vector<NodeId> train_ids;
    std::vector<NodeId> val_ids;
    std::vector<NodeId> test_ids;
};

} // namespace reagan
