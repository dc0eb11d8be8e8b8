#include "nhnn/hypergraph.hpp"

#include <algorithm>

namespace nhnn {

Hypergraph Hypergraph::build(std::vector<Pair> pairs, int num_nodes, int num_edges) {
    for (const auto& [v, e] : pairs) {
        if (v < 0 || v >= num_nodes)
            throw OutOfRangeIndex("node index " + std::to_string(v) + " not in [0," +
                                  std::to_string(num_nodes) + ")");
        if (e < 0 || e >= num_edges)
            throw OutOfRangeIndex("hyperedge index " + std::to_string(e) + " not in [0," +
                                  std::to_string(num_edges) + ")");
    }
    std::sort(pairs.begin(), pairs.end());
    if (auto it = std::adjacent_find(pairs.begin(), pairs.end()); it != pairs.end())
        throw DuplicatePair("(" + std::to_string(it->first) + "," + std::to_string(it->second) + ")");

    Hypergraph hg;
    hg.num_nodes_ = num_nodes;
    hg.num_edges_ = num_edges;
    hg.pairs_ = std::move(pairs);

    hg.by_node_off_.assign(num_nodes + 1, 0);
    hg.by_edge_off_.assign(num_edges + 1, 0);
    for (const auto& [v, e] : hg.pairs_) {
        ++hg.by_node_off_[v + 1];
        ++hg.by_edge_off_[e + 1];
    }
    for (int v = 0; v < num_nodes; ++v) hg.by_node_off_[v + 1] += hg.by_node_off_[v];
    for (int e = 0; e < num_edges; ++e) hg.by_edge_off_[e + 1] += hg.by_edge_off_[e];

    hg.by_node_items_.resize(hg.pairs_.size());
    hg.by_edge_items_.resize(hg.pairs_.size());
    std::vector<int> node_fill(hg.by_node_off_.begin(), hg.by_node_off_.end() - 1);
    std::vector<int> edge_fill(hg.by_edge_off_.begin(), hg.by_edge_off_.end() - 1);
    for (const auto& [v, e] : hg.pairs_) {
        hg.by_node_items_[node_fill[v]++] = e;
        hg.by_edge_items_[edge_fill[e]++] = v;
    }
    // Pair list is lexicographically sorted, so per-node edge lists come out
    // sorted; per-edge node lists need one more pass.
    for (int e = 0; e < num_edges; ++e) {
        std::sort(hg.by_edge_items_.begin() + hg.by_edge_off_[e],
                  hg.by_edge_items_.begin() + hg.by_edge_off_[e + 1]);
    }
    return hg;
}

bool SegmentMap::has_empty_segment() const {
    for (int s = 0; s < num_segments(); ++s)
        if (segment_size(s) == 0) return true;
    return false;
}

void SegmentMap::validate() const {
    for (int idx : indices)
        if (idx < 0 || idx >= num_input_rows)
            throw OutOfRangeIndex("segment index " + std::to_string(idx));
}

SegmentMap segments_by_edge(const Hypergraph& hg) {
    SegmentMap map;
    map.num_input_rows = hg.num_nodes();
    map.offsets.reserve(hg.num_edges() + 1);
    map.offsets.push_back(0);
    map.indices.reserve(hg.num_incidences());
    for (int e = 0; e < hg.num_edges(); ++e) {
        auto members = hg.nodes_of_edge(e);
        map.indices.insert(map.indices.end(), members.begin(), members.end());
        map.offsets.push_back(static_cast<int>(map.indices.size()));
    }
    return map;
}

SegmentMap segments_by_node(const Hypergraph& hg) {
    SegmentMap map;
    map.num_input_rows = hg.num_edges();
    map.offsets.reserve(hg.num_nodes() + 1);
    map.offsets.push_back(0);
    map.indices.reserve(hg.num_incidences());
    for (int v = 0; v < hg.num_nodes(); ++v) {
        auto incident = hg.edges_of_node(v);
        map.indices.insert(map.indices.end(), incident.begin(), incident.end());
        map.offsets.push_back(static_cast<int>(map.indices.size()));
    }
    return map;
}

SegmentMap replicate(const SegmentMap& map, int copies, int input_stride) {
    SegmentMap out;
    out.num_input_rows = map.num_input_rows + (copies - 1) * input_stride;
    out.offsets.reserve(static_cast<size_t>(map.num_segments()) * copies + 1);
    out.offsets.push_back(0);
    out.indices.reserve(map.indices.size() * copies);
    for (int c = 0; c < copies; ++c) {
        const int base = c * input_stride;
        for (int s = 0; s < map.num_segments(); ++s) {
            for (int idx : map.segment(s)) out.indices.push_back(base + idx);
            out.offsets.push_back(static_cast<int>(out.indices.size()));
        }
    }
    return out;
}

}  // namespace nhnn
