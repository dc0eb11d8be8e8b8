#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nhnn/common.hpp"

namespace nhnn {

// Immutable sparse incidence structure with dual CSR views.
// The sorted pair list is authoritative; both CSR views are derived from it.
class Hypergraph {
public:
    using Pair = std::pair<int, int>;  // (node, hyperedge)

    Hypergraph() = default;

    // Throws OutOfRangeIndex / DuplicatePair.
    static Hypergraph build(std::vector<Pair> pairs, int num_nodes, int num_edges);

    int num_nodes() const { return num_nodes_; }
    int num_edges() const { return num_edges_; }
    std::int64_t num_incidences() const { return static_cast<std::int64_t>(pairs_.size()); }

    const std::vector<Pair>& pairs() const { return pairs_; }

    // Sorted hyperedge indices incident to node v.
    std::span<const int> edges_of_node(int v) const {
        return {by_node_items_.data() + by_node_off_[v],
                by_node_items_.data() + by_node_off_[v + 1]};
    }
    // Sorted member node indices of hyperedge e.
    std::span<const int> nodes_of_edge(int e) const {
        return {by_edge_items_.data() + by_edge_off_[e],
                by_edge_items_.data() + by_edge_off_[e + 1]};
    }

    int node_degree(int v) const { return by_node_off_[v + 1] - by_node_off_[v]; }
    int edge_degree(int e) const { return by_edge_off_[e + 1] - by_edge_off_[e]; }

private:
    int num_nodes_ = 0;
    int num_edges_ = 0;
    std::vector<Pair> pairs_;  // sorted lexicographically
    std::vector<int> by_node_off_, by_node_items_;
    std::vector<int> by_edge_off_, by_edge_items_;
};

// Variable-length index groups for segment reductions. Segment s aggregates
// input rows indices[offsets[s] .. offsets[s+1]). Empty segments are allowed.
struct SegmentMap {
    std::vector<int> offsets;  // size num_segments + 1
    std::vector<int> indices;
    int num_input_rows = 0;

    int num_segments() const { return static_cast<int>(offsets.size()) - 1; }
    int segment_size(int s) const { return offsets[s + 1] - offsets[s]; }
    std::span<const int> segment(int s) const {
        return {indices.data() + offsets[s], indices.data() + offsets[s + 1]};
    }
    bool has_empty_segment() const;
    void validate() const;  // throws OutOfRangeIndex on bad indices
};

// Segments = hyperedges, inputs = node rows (node-to-hyperedge aggregation).
SegmentMap segments_by_edge(const Hypergraph& hg);
// Segments = nodes, inputs = hyperedge rows (hyperedge-to-node aggregation).
SegmentMap segments_by_node(const Hypergraph& hg);
// Replicates a map S times over row blocks of stride `input_stride`
// (batched samples sharing one topology).
SegmentMap replicate(const SegmentMap& map, int copies, int input_stride);

}  // namespace nhnn
