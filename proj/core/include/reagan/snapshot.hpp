#pragma once

#include <string>
#include <vector>

#include "reagan/types.hpp"

namespace reagan {

// Immutable per-layer view of every node's carried aggregate. Layer l
// actions read only the layer l-1 snapshot, never live buffers.
struct LayerSnapshot {
    int layer = 0;
    std::vector<std::string> aggregates; // indexed by node id, complete

    const std::string& aggregate_of(NodeId v) const;
};

} // namespace reagan
