// Independent brute-force oracles used by the test suites. Everything here is
// deliberately written as plain loops over the math definitions and never
// calls into the tape-based implementation paths it checks.
#pragma once

#include <random>
#include <vector>

#include "nhnn/common.hpp"
#include "nhnn/dataset.hpp"
#include "nhnn/hypergraph.hpp"

namespace oracle {

using nhnn::MatD;

inline MatD segment_mean(const MatD& x, const nhnn::SegmentMap& map) {
    MatD out = MatD::Zero(map.num_segments(), x.cols());
    for (int s = 0; s < map.num_segments(); ++s) {
        const auto seg = map.segment(s);
        if (seg.empty()) continue;
        for (int idx : seg) out.row(s) += x.row(idx);
        out.row(s) /= static_cast<double>(seg.size());
    }
    return out;
}

inline std::pair<MatD, MatD> segment_weighted_sum(const MatD& x, const Eigen::VectorXd& w,
                                                  const nhnn::SegmentMap& map) {
    MatD out = MatD::Zero(map.num_segments(), x.cols());
    MatD wsum = MatD::Zero(map.num_segments(), 1);
    for (int s = 0; s < map.num_segments(); ++s)
        for (int idx : map.segment(s)) {
            out.row(s) += w(idx) * x.row(idx);
            wsum(s, 0) += w(idx);
        }
    return {out, wsum};
}

// Scalar-loop relevance score: sigmoid(hhat W hthat^T) per row.
inline Eigen::VectorXd relevance_scores(const MatD& h, const MatD& ht, const MatD& w, double eps) {
    Eigen::VectorXd alpha(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        Eigen::RowVectorXd hn = h.row(i) / std::max(h.row(i).norm(), eps);
        Eigen::RowVectorXd htn = ht.row(i) / std::max(ht.row(i).norm(), eps);
        double score = 0.0;
        for (Eigen::Index a = 0; a < w.rows(); ++a)
            for (Eigen::Index b = 0; b < w.cols(); ++b) score += hn(a) * w(a, b) * htn(b);
        alpha(i) = 1.0 / (1.0 + std::exp(-score));
    }
    return alpha;
}

// Double-loop normalized weighted scatter: y_v^k via incident hyperedges.
inline MatD hyperedge_to_node(const MatD& h_chunks, const Eigen::VectorXd& alpha,
                              const nhnn::Hypergraph& hg, double eps) {
    MatD y = MatD::Zero(hg.num_nodes(), h_chunks.cols());
    for (int v = 0; v < hg.num_nodes(); ++v) {
        MatD num = MatD::Zero(1, h_chunks.cols());
        double den = 0.0;
        for (int e : hg.edges_of_node(v)) {
            num += alpha(e) * h_chunks.row(e);
            den += alpha(e);
        }
        y.row(v) = num / std::max(den, eps);
    }
    return y;
}

// Dense-matrix HGNN layer built directly from the incidence matrix.
inline MatD hgnn_dense(const MatD& x, const nhnn::Hypergraph& hg, const MatD& w) {
    const int n = hg.num_nodes(), m = hg.num_edges();
    MatD inc = MatD::Zero(n, m);
    for (const auto& [v, e] : hg.pairs()) inc(v, e) = 1.0;
    Eigen::VectorXd dv = inc.rowwise().sum();
    Eigen::VectorXd de = inc.colwise().sum();
    MatD dv_is = MatD::Zero(n, n);
    for (int v = 0; v < n; ++v) dv_is(v, v) = dv(v) > 0 ? 1.0 / std::sqrt(dv(v)) : 0.0;
    MatD de_i = MatD::Zero(m, m);
    for (int e = 0; e < m; ++e) de_i(e, e) = de(e) > 0 ? 1.0 / de(e) : 0.0;
    return dv_is * inc * de_i * inc.transpose() * dv_is * x * w;
}

// Mean -log p(label) over the masked rows, computed from scratch.
inline double cross_entropy(const MatD& logits, const std::vector<int>& labels,
                            const std::vector<std::uint8_t>& mask = {}) {
    double total = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const double m = logits.row(i).maxCoeff();
        const double lse = std::log((logits.row(i).array() - m).exp().sum()) + m;
        total -= logits(i, labels[i]) - lse;
        ++count;
    }
    return count > 0 ? total / count : 0.0;
}

// Textbook Pearson correlation between two columns.
inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    double num = 0.0, da = 0.0, db = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        num += (a(i) - ma) * (b(i) - mb);
        da += (a(i) - ma) * (a(i) - ma);
        db += (b(i) - mb) * (b(i) - mb);
    }
    return num / std::sqrt(da * db);
}

// Majority/centroid classifier that is GIVEN the planted factor ids: averages
// the label-factor block of the observed features over label-factor
// hyperedges per node, fits class centroids on the train mask, and predicts
// by nearest centroid. Validates generator learnability.
inline double planted_oracle_accuracy(const nhnn::Dataset& ds, int kstar) {
    const int n = ds.topology.num_nodes();
    const int block = ds.feature_dim() / kstar;
    MatD feat = ds.features.cast<double>().leftCols(block);
    MatD signal = MatD::Zero(n, block);
    std::vector<int> counts(n, 0);
    for (int e = 0; e < ds.topology.num_edges(); ++e) {
        if (ds.planted_factors[e] != ds.label_factor) continue;
        auto members = ds.topology.nodes_of_edge(e);
        MatD mean = MatD::Zero(1, block);
        for (int v : members) mean += feat.row(v);
        if (!members.empty()) mean /= static_cast<double>(members.size());
        for (int v : members) {
            signal.row(v) += mean.row(0);
            ++counts[v];
        }
    }
    for (int v = 0; v < n; ++v) {
        if (counts[v] > 0) signal.row(v) /= counts[v];
        else signal.row(v) = feat.row(v);
    }
    // Least-squares linear probe (signal + intercept -> one-hot labels) fit on
    // the train mask, argmax prediction on the test mask.
    int n_train = 0;
    for (int v = 0; v < n; ++v) n_train += ds.train_mask[v];
    MatD design(n_train, block + 1);
    MatD target = MatD::Zero(n_train, ds.num_classes);
    int r = 0;
    for (int v = 0; v < n; ++v) {
        if (!ds.train_mask[v]) continue;
        design.row(r).head(block) = signal.row(v);
        design(r, block) = 1.0;
        target(r, ds.labels[v]) = 1.0;
        ++r;
    }
    MatD coef = (design.transpose() * design +
                 1e-6 * MatD::Identity(block + 1, block + 1))
                    .ldlt()
                    .solve(design.transpose() * target);
    int hit = 0, total = 0;
    for (int v = 0; v < n; ++v) {
        if (!ds.test_mask[v]) continue;
        Eigen::RowVectorXd x(block + 1);
        x.head(block) = signal.row(v);
        x(block) = 1.0;
        Eigen::RowVectorXd scores = x * coef;
        int best = 0;
        for (int c = 1; c < ds.num_classes; ++c)
            if (scores(c) > scores(best)) best = c;
        hit += best == ds.labels[v];
        ++total;
    }
    return total > 0 ? static_cast<double>(hit) / total : 0.0;
}

inline MatD random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                          double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    MatD m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

}  // namespace oracle
