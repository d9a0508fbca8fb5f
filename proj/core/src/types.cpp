#include "reagan/types.hpp"

#include <algorithm>

namespace reagan {

std::string split_name(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

std::optional<int> LabelSpace::index_of_display(const std::string& name) const {
    auto it = std::find(display_names.begin(), display_names.end(), name);
    if (it == display_names.end()) return std::nullopt;
    return static_cast<int>(it - display_names.begin());
}

LabelSpace make_label_space(std::vector<std::string> display_names) {
    LabelSpace space;
    space.display_names = std::move(display_names);
    space.anonymized_names.reserve(space.display_names.size());
    for (std::size_t i = 0; i < space.display_names.size(); ++i) {
        space.anonymized_names.push_back("Label_" + std::to_string(i));
    }
    return space;
}

} // namespace reagan
