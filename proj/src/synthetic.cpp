#include <algorithm>
#include <numeric>
#include <random>

#include "nhnn/dataset.hpp"

namespace nhnn {

void SyntheticSpec::validate() const {
    if (num_factors < 1) throw DegenerateSpec("K* must be >= 1");
    if (mean_degree < 2.0) throw DegenerateSpec("mean hyperedge degree must be >= 2");
    if (noise_std < 0.0) throw DegenerateSpec("noise std must be >= 0");
    if (feature_dim % num_factors != 0)
        throw DegenerateSpec("feature dim " + std::to_string(feature_dim) +
                             " not divisible by K*=" + std::to_string(num_factors));
    if (num_nodes < 2 || num_edges < 0 || num_classes < 2)
        throw DegenerateSpec("need N >= 2, M >= 0, C >= 2");
    if (task == Task::HypergraphClassification && num_samples < 1)
        throw DegenerateSpec("hypergraph task needs S >= 1");
}

std::vector<Hypergraph::Pair> Dataset::planted_subincidence(int factor) const {
    std::vector<Hypergraph::Pair> out;
    for (const auto& [v, e] : topology.pairs())
        if (planted_factors[e] == factor) out.emplace_back(v, e);
    return out;
}

namespace {

// Truncated geometric degree: min 2, right-skewed, mean = spec mean.
int sample_degree(double mean, int max_degree, std::mt19937_64& rng) {
    const double p = 1.0 / (mean - 1.0);
    std::geometric_distribution<int> geo(p);
    return std::min(2 + geo(rng), max_degree);
}

// Spread of a node's latent block around its cluster centroid. Small against
// the unit centroid scale, so hyperedges drawn inside one cluster are tightly
// coherent in that factor's block and incoherent everywhere else.
constexpr double kWithinClusterStd = 0.25;

// Centroids are centered (columns sum to zero), so a hyperedge that mixes
// clusters uniformly aggregates to roughly the origin while a single-cluster
// hyperedge keeps its centroid direction. This is the contrast the
// consistency scores pick up.
MatD random_centroids(int clusters, int block, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatD c(clusters, block);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) c(i, j) = gauss(rng);
    c.rowwise() -= c.colwise().mean();
    return c;
}

// The label factor's block is split in two halves. The first ("beacon") half
// follows a partition of the nodes that is independent of the labels and is
// observed with the ordinary low noise, so label-factor hyperedges stay
// recognizably coherent. The second half carries the class signal and is
// observed under label_noise_std, so classifiers have to denoise it by
// aggregating along exactly those hyperedges.
constexpr int kBeaconGroups = 4;

struct PlantedStructure {
    std::vector<std::vector<int>> assign;  // factor -> node -> cluster
    std::vector<int> beacon;               // node -> beacon group (label factor)
    int clusters = 0, beacon_groups = 0, block = 0, half = 0;
};

// Latent matrix from fresh centroids: block t of node v sits near its
// factor-t cluster centroid; the label factor's beacon half sits near its
// beacon-group centroid instead.
MatD draw_latent(const PlantedStructure& ps, std::mt19937_64& rng) {
    const int kstar = static_cast<int>(ps.assign.size());
    const int n = static_cast<int>(ps.beacon.size());
    std::normal_distribution<double> jitter(0.0, kWithinClusterStd);
    MatD beacon_c = random_centroids(ps.beacon_groups, ps.half, rng);
    std::vector<MatD> cents;
    cents.push_back(random_centroids(ps.clusters, ps.block - ps.half, rng));
    for (int t = 1; t < kstar; ++t) cents.push_back(random_centroids(ps.clusters, ps.block, rng));

    MatD u(n, kstar * ps.block);
    for (int v = 0; v < n; ++v) {
        for (int j = 0; j < ps.half; ++j) u(v, j) = beacon_c(ps.beacon[v], j) + jitter(rng);
        for (int j = ps.half; j < ps.block; ++j)
            u(v, j) = cents[0](ps.assign[0][v], j - ps.half) + jitter(rng);
        for (int t = 1; t < kstar; ++t)
            for (int j = 0; j < ps.block; ++j)
                u(v, t * ps.block + j) = cents[t](ps.assign[t][v], j) + jitter(rng);
    }
    return u;
}

}  // namespace

Dataset generate_planted(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const int n = spec.num_nodes, m = spec.num_edges, kstar = spec.num_factors;
    const int block = spec.feature_dim / kstar;

    // (1) factor type per hyperedge
    std::uniform_int_distribution<int> pick_factor(0, kstar - 1);
    std::vector<int> factors(m);
    for (int e = 0; e < m; ++e) factors[e] = pick_factor(rng);

    // (2) planted clusters: every factor partitions the nodes into
    // num_classes balanced clusters. The factor-0 cluster of a node is its
    // label, so labels depend only on the label factor's structure. The
    // label factor additionally gets an independent balanced "beacon"
    // partition; see draw_latent for its role.
    const int clusters = spec.num_classes;
    if (n < 2 * clusters)
        throw DegenerateSpec("need num_nodes >= 2 * num_classes for cluster sampling");
    PlantedStructure ps;
    ps.clusters = clusters;
    ps.block = block;
    ps.half = block / 2;
    ps.beacon_groups = std::max(1, std::min(kBeaconGroups, n / (2 * clusters)));
    ps.assign.assign(kstar, std::vector<int>(n));
    ps.beacon.resize(n);
    std::vector<std::vector<std::vector<int>>> cluster_members(
        kstar, std::vector<std::vector<int>>(clusters));
    for (int t = 0; t < kstar; ++t) {
        for (int v = 0; v < n; ++v) ps.assign[t][v] = v % clusters;
        std::shuffle(ps.assign[t].begin(), ps.assign[t].end(), rng);
        for (int v = 0; v < n; ++v) cluster_members[t][ps.assign[t][v]].push_back(v);
    }
    for (int v = 0; v < n; ++v) ps.beacon[v] = v % ps.beacon_groups;
    std::shuffle(ps.beacon.begin(), ps.beacon.end(), rng);

    // (3) latent block vectors near the per-factor centroids
    MatD latent = draw_latent(ps, rng);

    // (4) members per hyperedge: a factor-t edge samples its members inside
    // one factor-t cluster, so it is coherent in block t and incoherent in
    // every other block (this is what makes the planted factors
    // statistically recoverable). Label-factor edges sample inside one
    // cluster-and-beacon cell, so they are coherent in the cleanly observed
    // beacon half as well.
    std::uniform_int_distribution<int> pick_cluster(0, clusters - 1);
    std::uniform_int_distribution<int> pick_beacon(0, ps.beacon_groups - 1);
    std::vector<Hypergraph::Pair> pairs;
    for (int e = 0; e < m; ++e) {
        const int c = pick_cluster(rng);
        std::vector<int> pool;
        if (factors[e] == 0) {
            const int b = pick_beacon(rng);
            for (int v : cluster_members[0][c])
                if (ps.beacon[v] == b) pool.push_back(v);
        }
        if (pool.size() < 2) pool = cluster_members[factors[e]][c];
        const int deg = sample_degree(spec.mean_degree, static_cast<int>(pool.size()), rng);
        std::shuffle(pool.begin(), pool.end(), rng);
        for (int i = 0; i < deg; ++i) pairs.emplace_back(pool[i], e);
    }

    Dataset ds;
    ds.task = spec.task;
    ds.topology = Hypergraph::build(std::move(pairs), n, m);
    ds.num_classes = spec.num_classes;
    ds.has_planted = true;
    ds.label_factor = 0;
    ds.planted_factors = factors;

    // Fixed random linear readout from the label half to classes (hypergraph
    // task only; node labels are the factor-0 cluster ids).
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatD readout(block - ps.half, spec.num_classes);
    for (Eigen::Index i = 0; i < readout.rows(); ++i)
        for (Eigen::Index j = 0; j < readout.cols(); ++j) readout(i, j) = gauss(rng);

    // Observation noise: label_noise_std on the label half of block 0,
    // noise_std everywhere else.
    auto noise_at = [&](int j) {
        return j >= ps.half && j < block && spec.label_noise_std >= 0.0 ? spec.label_noise_std
                                                                        : spec.noise_std;
    };

    if (spec.task == Task::NodeClassification) {
        // (5) observed features = latent + noise; label = factor-0 cluster
        ds.features = MatF(n, spec.feature_dim);
        for (Eigen::Index i = 0; i < latent.rows(); ++i)
            for (Eigen::Index j = 0; j < latent.cols(); ++j)
                ds.features(i, j) = static_cast<float>(
                    latent(i, j) + noise_at(static_cast<int>(j)) * gauss(rng));
        ds.labels = ps.assign[0];
        ds.num_samples = 1;
    } else {
        // (6) per-sample draws on the shared topology and cluster structure:
        // fresh centroids, jitter and noise each sample. The sample label is
        // the readout applied to the mean label-half latent over all nodes,
        // which varies with the per-sample centroids.
        const int s = spec.num_samples;
        ds.num_samples = s;
        ds.features = MatF(static_cast<Eigen::Index>(s) * n, spec.feature_dim);
        ds.labels.resize(s);
        for (int sample = 0; sample < s; ++sample) {
            MatD u = draw_latent(ps, rng);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < spec.feature_dim; ++j)
                    ds.features(static_cast<Eigen::Index>(sample) * n + i, j) =
                        static_cast<float>(u(i, j) + noise_at(j) * gauss(rng));
            Eigen::RowVectorXd signal =
                u.middleCols(ps.half, block - ps.half).colwise().mean();
            Eigen::RowVectorXd scores = signal * readout;
            int best = 0;
            for (Eigen::Index c = 1; c < scores.cols(); ++c)
                if (scores(c) > scores(best)) best = static_cast<int>(c);
            ds.labels[sample] = best;
        }
    }

    const int pop = ds.labeled_population();
    ds.train_mask.assign(pop, 1);  // default: everything trainable until split
    ds.val_mask.assign(pop, 0);
    ds.test_mask.assign(pop, 0);
    return ds;
}

Dataset split_dataset(const Dataset& ds, double train_ratio, double val_ratio, double test_ratio,
                      std::uint64_t seed, bool* empty_class_warning) {
    if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0 ||
        train_ratio + val_ratio + test_ratio > 1.0 + 1e-9)
        throw DegenerateSpec("split ratios must be positive with sum <= 1");
    Dataset out = ds;
    const int pop = ds.labeled_population();
    std::mt19937_64 rng(seed);

    // Stratify when every class has at least 3 members.
    std::vector<std::vector<int>> by_class(ds.num_classes);
    for (int i = 0; i < pop; ++i) by_class[ds.labels[i]].push_back(i);
    bool stratify = true;
    for (const auto& members : by_class)
        if (!members.empty() && members.size() < 3) stratify = false;

    out.train_mask.assign(pop, 0);
    out.val_mask.assign(pop, 0);
    out.test_mask.assign(pop, 0);

    // Build one global order, then slice it so split sizes are exact. For the
    // stratified case the order interleaves the shuffled classes by fractional
    // position, which keeps class balance in every slice.
    std::vector<int> order;
    order.reserve(pop);
    if (stratify) {
        for (auto& members : by_class) std::shuffle(members.begin(), members.end(), rng);
        std::vector<std::pair<double, int>> keyed;
        for (const auto& members : by_class)
            for (size_t i = 0; i < members.size(); ++i)
                keyed.emplace_back((i + 0.5) / members.size(), members[i]);
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [key, idx] : keyed) order.push_back(idx);
    } else {
        order.resize(pop);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
    }
    const auto n_train = static_cast<size_t>(std::llround(train_ratio * pop));
    const auto n_val = static_cast<size_t>(std::llround(val_ratio * pop));
    const auto n_test = std::min(order.size() - n_train - n_val,
                                 static_cast<size_t>(std::llround(test_ratio * pop)));
    for (size_t i = 0; i < n_train; ++i) out.train_mask[order[i]] = 1;
    for (size_t i = n_train; i < n_train + n_val; ++i) out.val_mask[order[i]] = 1;
    for (size_t i = n_train + n_val; i < n_train + n_val + n_test; ++i)
        out.test_mask[order[i]] = 1;

    if (empty_class_warning) {
        *empty_class_warning = false;
        for (int c = 0; c < ds.num_classes; ++c) {
            bool in_train = false;
            for (int i = 0; i < pop; ++i)
                if (out.train_mask[i] && ds.labels[i] == c) in_train = true;
            if (!by_class[c].empty() && !in_train) *empty_class_warning = true;
        }
    }
    return out;
}

bool datasets_equal(const Dataset& a, const Dataset& b) {
    return a.task == b.task && a.topology.num_nodes() == b.topology.num_nodes() &&
           a.topology.num_edges() == b.topology.num_edges() &&
           a.topology.pairs() == b.topology.pairs() && a.num_samples == b.num_samples &&
           a.num_classes == b.num_classes && a.labels == b.labels &&
           a.train_mask == b.train_mask && a.val_mask == b.val_mask && a.test_mask == b.test_mask &&
           a.has_planted == b.has_planted && a.label_factor == b.label_factor &&
           a.planted_factors == b.planted_factors && a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features;
}

}  // namespace nhnn
