#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nhnn/common.hpp"
#include "nhnn/hypergraph.hpp"

namespace nhnn {

// Immutable after construction; safe to share read-only across workers.
struct Dataset {
    Task task = Task::NodeClassification;
    Hypergraph topology;
    // Node task: N x d0. Hypergraph task: (S*N) x d0, sample-major row blocks.
    MatF features;
    int num_samples = 1;  // S (1 for the node task)
    int num_classes = 0;
    std::vector<int> labels;  // per node, or per sample
    std::vector<std::uint8_t> train_mask, val_mask, test_mask;
    bool has_planted = false;
    int label_factor = 0;  // factor whose hyperedges determine labels
    std::vector<int> planted_factors;  // per hyperedge, in [0, K*)

    int feature_dim() const { return static_cast<int>(features.cols()); }
    int labeled_population() const {
        return task == Task::NodeClassification ? topology.num_nodes() : num_samples;
    }
    // Sub-incidence pair set of one planted factor; the sets over all factors
    // partition the topology's pair set.
    std::vector<Hypergraph::Pair> planted_subincidence(int factor) const;
};

struct SyntheticSpec {
    int num_nodes = 100;
    int num_edges = 40;
    int num_factors = 2;  // K*
    double mean_degree = 6.0;
    int feature_dim = 16;  // d0, must be divisible by K*
    double noise_std = 0.1;
    // Noise on the label factor's block only; negative means "same as
    // noise_std". Raising it forces models to aggregate the label signal
    // along the label factor's hyperedges instead of reading it off the
    // node's own features.
    double label_noise_std = -1.0;
    int num_classes = 2;
    Task task = Task::NodeClassification;
    int num_samples = 1;  // S, hypergraph task only
    std::uint64_t seed = 0;

    void validate() const;
};

// Plants K* ground-truth factor sub-incidence structures: each hyperedge gets
// a factor type, members are drawn coherent in that factor's latent block,
// and labels depend only on the label factor's hyperedges.
Dataset generate_planted(const SyntheticSpec& spec);

// 50/25/25-style split by seeded shuffle; stratified by class when every
// class has at least 3 members. Returns a copy with fresh masks.
Dataset split_dataset(const Dataset& ds, double train_ratio, double val_ratio, double test_ratio,
                      std::uint64_t seed, bool* empty_class_warning = nullptr);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

bool datasets_equal(const Dataset& a, const Dataset& b);

}  // namespace nhnn
