#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "nhnn/hypergraph.hpp"
#include "oracles.hpp"

using namespace nhnn;

TEST_CASE("build_hypergraph: direct transcription") {
    Hypergraph hg = Hypergraph::build({{0, 0}, {1, 0}, {1, 1}}, 2, 2);
    auto e_of_1 = hg.edges_of_node(1);
    CHECK(std::vector<int>(e_of_1.begin(), e_of_1.end()) == std::vector<int>{0, 1});
    auto n_of_0 = hg.nodes_of_edge(0);
    CHECK(std::vector<int>(n_of_0.begin(), n_of_0.end()) == std::vector<int>{0, 1});
    CHECK(hg.num_incidences() == 3);
}

TEST_CASE("build_hypergraph: empty case gives zero degrees") {
    Hypergraph hg = Hypergraph::build({}, 3, 0);
    for (int v = 0; v < 3; ++v) CHECK(hg.node_degree(v) == 0);
    CHECK(hg.num_incidences() == 0);
}

TEST_CASE("build_hypergraph: bounds and duplicates rejected") {
    CHECK_THROWS_AS(Hypergraph::build({{5, 0}}, 3, 1), OutOfRangeIndex);
    CHECK_THROWS_AS(Hypergraph::build({{0, 2}}, 3, 1), OutOfRangeIndex);
    CHECK_THROWS_AS(Hypergraph::build({{-1, 0}}, 3, 1), OutOfRangeIndex);
    CHECK_THROWS_AS(Hypergraph::build({{0, 0}, {0, 0}}, 3, 1), DuplicatePair);
}

TEST_CASE("dual CSR views encode the same pair set") {
    std::mt19937_64 rng(42);
    const int n = 30, m = 12;
    std::set<Hypergraph::Pair> pset;
    std::uniform_int_distribution<int> pn(0, n - 1), pe(0, m - 1);
    for (int i = 0; i < 100; ++i) pset.insert({pn(rng), pe(rng)});
    std::vector<Hypergraph::Pair> pairs(pset.begin(), pset.end());
    Hypergraph hg = Hypergraph::build(pairs, n, m);

    // round-trip: rebuild the pair set from both views
    std::set<Hypergraph::Pair> from_node, from_edge;
    std::int64_t node_deg_sum = 0, edge_deg_sum = 0;
    for (int v = 0; v < n; ++v) {
        node_deg_sum += hg.node_degree(v);
        for (int e : hg.edges_of_node(v)) from_node.insert({v, e});
    }
    for (int e = 0; e < m; ++e) {
        edge_deg_sum += hg.edge_degree(e);
        for (int v : hg.nodes_of_edge(e)) from_edge.insert({v, e});
    }
    CHECK(from_node == pset);
    CHECK(from_edge == pset);
    CHECK(node_deg_sum == hg.num_incidences());
    CHECK(edge_deg_sum == hg.num_incidences());
}

TEST_CASE("segment maps mirror the CSR views") {
    Hypergraph hg = Hypergraph::build({{0, 0}, {1, 0}, {1, 1}, {2, 1}}, 4, 2);
    SegmentMap by_edge = segments_by_edge(hg);
    CHECK(by_edge.num_segments() == 2);
    CHECK(by_edge.num_input_rows == 4);
    auto s0 = by_edge.segment(0);
    CHECK(std::vector<int>(s0.begin(), s0.end()) == std::vector<int>{0, 1});

    SegmentMap by_node = segments_by_node(hg);
    CHECK(by_node.num_segments() == 4);
    CHECK(by_node.segment_size(3) == 0);  // isolated node
    CHECK(by_node.has_empty_segment());
    CHECK_NOTHROW(by_node.validate());
}

TEST_CASE("replicate stacks row blocks") {
    Hypergraph hg = Hypergraph::build({{0, 0}, {1, 0}}, 2, 1);
    SegmentMap base = segments_by_edge(hg);
    SegmentMap rep = replicate(base, 3, 2);
    CHECK(rep.num_segments() == 3);
    CHECK(rep.num_input_rows == 6);
    auto s2 = rep.segment(2);
    CHECK(std::vector<int>(s2.begin(), s2.end()) == std::vector<int>{4, 5});
}
