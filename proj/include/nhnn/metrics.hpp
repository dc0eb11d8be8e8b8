#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "nhnn/common.hpp"

namespace nhnn {

inline std::vector<int> argmax_rows(const MatD& logits) {
    std::vector<int> preds(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        // ties broken toward the lowest class index
        int best = 0;
        for (Eigen::Index c = 1; c < logits.cols(); ++c)
            if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
        preds[i] = best;
    }
    return preds;
}

inline double accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                       const std::vector<std::uint8_t>& mask = {}) {
    std::int64_t hit = 0, total = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        hit += preds[i] == labels[i];
        ++total;
    }
    return total > 0 ? static_cast<double>(hit) / total : 0.0;
}

namespace detail {
struct ClassCounts {
    std::vector<std::int64_t> tp, fp, fn;
    int num_classes = 0;
};

inline ClassCounts confusion(const std::vector<int>& preds, const std::vector<int>& labels,
                             const std::vector<std::uint8_t>& mask) {
    int c = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        c = std::max({c, labels[i] + 1, preds[i] + 1});
    }
    ClassCounts cc;
    cc.num_classes = c;
    cc.tp.assign(c, 0);
    cc.fp.assign(c, 0);
    cc.fn.assign(c, 0);
    for (size_t i = 0; i < labels.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        if (preds[i] == labels[i]) ++cc.tp[labels[i]];
        else {
            ++cc.fp[preds[i]];
            ++cc.fn[labels[i]];
        }
    }
    return cc;
}
}  // namespace detail

// Unweighted mean of per-class F1; classes absent from both predictions and
// labels inside the mask are skipped.
inline double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                       const std::vector<std::uint8_t>& mask = {}) {
    auto cc = detail::confusion(preds, labels, mask);
    double sum = 0.0;
    int used = 0;
    for (int c = 0; c < cc.num_classes; ++c) {
        const auto denom = 2 * cc.tp[c] + cc.fp[c] + cc.fn[c];
        if (denom == 0) continue;  // class absent everywhere
        sum += 2.0 * cc.tp[c] / static_cast<double>(denom);
        ++used;
    }
    return used > 0 ? sum / used : 0.0;
}

inline double micro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                       const std::vector<std::uint8_t>& mask = {}) {
    auto cc = detail::confusion(preds, labels, mask);
    std::int64_t tp = std::accumulate(cc.tp.begin(), cc.tp.end(), std::int64_t{0});
    std::int64_t fp = std::accumulate(cc.fp.begin(), cc.fp.end(), std::int64_t{0});
    std::int64_t fn = std::accumulate(cc.fn.begin(), cc.fn.end(), std::int64_t{0});
    const auto denom = 2 * tp + fp + fn;
    return denom > 0 ? 2.0 * tp / static_cast<double>(denom) : 0.0;
}

// Pearson correlation between factor columns of an M x K relevance matrix.
// Zero-variance columns correlate as 0 (flagged via the optional out-param).
inline MatD pearson_factor_correlation(const MatD& alpha, bool* zero_variance_flag = nullptr) {
    const Eigen::Index m = alpha.rows(), k = alpha.cols();
    MatD centered = alpha.rowwise() - alpha.colwise().mean();
    Eigen::VectorXd norms = centered.colwise().norm();
    bool flagged = false;
    MatD corr = MatD::Identity(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
            if (norms[a] == 0.0 || norms[b] == 0.0) {
                corr(a, b) = corr(b, a) = 0.0;
                flagged = true;
            } else {
                corr(a, b) = corr(b, a) = centered.col(a).dot(centered.col(b)) / (norms[a] * norms[b]);
            }
        }
        if (norms[a] == 0.0) flagged = true;
    }
    if (zero_variance_flag) *zero_variance_flag = flagged;
    (void)m;
    return corr;
}

// 1 / (1 + ||a - b||_2)
inline double relevance_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 1.0 / (1.0 + (a - b).norm());
}

// Mean pairwise relevance similarity between (and within) clusters of
// hyperedge indices. Diagonal = within-cluster mean, 1 for singletons.
inline MatD cluster_similarity(const std::vector<std::vector<int>>& clusters, const MatD& alpha) {
    const int c = static_cast<int>(clusters.size());
    MatD out = MatD::Zero(c, c);
    for (int a = 0; a < c; ++a) {
        for (int b = a; b < c; ++b) {
            double sum = 0.0;
            std::int64_t count = 0;
            for (size_t i = 0; i < clusters[a].size(); ++i) {
                const size_t j0 = (a == b) ? i + 1 : 0;
                for (size_t j = j0; j < clusters[b].size(); ++j) {
                    sum += relevance_similarity(alpha.row(clusters[a][i]).transpose(),
                                                alpha.row(clusters[b][j]).transpose());
                    ++count;
                }
            }
            const double val = count > 0 ? sum / count : 1.0;  // singleton diagonal
            out(a, b) = out(b, a) = val;
        }
    }
    return out;
}

// Area under the ROC curve of scores against binary labels, rank-based with
// midrank tie handling.
inline double auc_score(const std::vector<double>& scores, const std::vector<int>& binary_labels) {
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = (i + j) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = midrank;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    std::int64_t pos = 0, neg = 0;
    for (size_t t = 0; t < n; ++t) {
        if (binary_labels[t]) {
            pos_rank_sum += ranks[t];
            ++pos;
        } else {
            ++neg;
        }
    }
    if (pos == 0 || neg == 0) return 0.5;
    return (pos_rank_sum - pos * (pos + 1) / 2.0) / (static_cast<double>(pos) * neg);
}

// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const int ka = 1 + *std::max_element(a.begin(), a.end());
    const int kb = 1 + *std::max_element(b.begin(), b.end());
    MatD table = MatD::Zero(ka, kb);
    for (size_t i = 0; i < a.size(); ++i) table(a[i], b[i]) += 1.0;
    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double sum_ij = 0.0;
    for (Eigen::Index i = 0; i < table.rows(); ++i)
        for (Eigen::Index j = 0; j < table.cols(); ++j) sum_ij += choose2(table(i, j));
    double sum_a = 0.0, sum_b = 0.0;
    for (Eigen::Index i = 0; i < table.rows(); ++i) sum_a += choose2(table.row(i).sum());
    for (Eigen::Index j = 0; j < table.cols(); ++j) sum_b += choose2(table.col(j).sum());
    const double total = choose2(static_cast<double>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 0.0;
    return (sum_ij - expected) / (max_index - expected);
}

// Lloyd's k-means on rows; returns assignments of the best-inertia run.
inline std::vector<int> kmeans_rows(const MatD& x, int k, int restarts, std::mt19937_64& rng,
                                    int max_iters = 100) {
    const Eigen::Index n = x.rows();
    std::vector<int> best_assign(n, 0);
    double best_inertia = std::numeric_limits<double>::infinity();
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    for (int r = 0; r < restarts; ++r) {
        MatD centers(k, x.cols());
        for (int c = 0; c < k; ++c) centers.row(c) = x.row(pick(rng));
        std::vector<int> assign(n, 0);
        for (int it = 0; it < max_iters; ++it) {
            bool changed = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                int best = 0;
                double bd = (x.row(i) - centers.row(0)).squaredNorm();
                for (int c = 1; c < k; ++c) {
                    const double d = (x.row(i) - centers.row(c)).squaredNorm();
                    if (d < bd) {
                        bd = d;
                        best = c;
                    }
                }
                if (assign[i] != best) {
                    assign[i] = best;
                    changed = true;
                }
            }
            centers.setZero();
            std::vector<int> counts(k, 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                centers.row(assign[i]) += x.row(i);
                ++counts[assign[i]];
            }
            for (int c = 0; c < k; ++c)
                if (counts[c] > 0) centers.row(c) /= counts[c];
            if (!changed) break;
        }
        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            inertia += (x.row(i) - centers.row(assign[i])).squaredNorm();
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = assign;
        }
    }
    return best_assign;
}

struct FactorRecovery {
    double auc = 0.0;
    double ari = 0.0;
    int chosen_column = -1;
};

// AUC of the single alpha column that best separates planted factor 0 from
// the rest, chosen on a held-out half of the hyperedges to avoid leakage;
// ARI of k-means on alpha rows against planted ids (best of 10 restarts).
inline FactorRecovery factor_recovery_score(const MatD& alpha, const std::vector<int>& planted,
                                            std::uint64_t seed = 0) {
    FactorRecovery out;
    const Eigen::Index m = alpha.rows();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const Eigen::Index half = m / 2;

    auto column_auc = [&](Eigen::Index col, const std::vector<int>& rows) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i : rows) {
            scores.push_back(alpha(i, col));
            labels.push_back(planted[i] == 0 ? 1 : 0);
        }
        return auc_score(scores, labels);
    };
    std::vector<int> val_rows(order.begin(), order.begin() + half);
    std::vector<int> test_rows(order.begin() + half, order.end());
    double best_sep = -1.0;
    for (Eigen::Index c = 0; c < alpha.cols(); ++c) {
        const double a = column_auc(c, val_rows);
        const double sep = std::abs(a - 0.5);
        if (sep > best_sep) {
            best_sep = sep;
            out.chosen_column = static_cast<int>(c);
        }
    }
    double a = column_auc(out.chosen_column, test_rows);
    out.auc = std::max(a, 1.0 - a);  // orientation-free

    const int kstar = 1 + *std::max_element(planted.begin(), planted.end());
    std::vector<int> assign = kmeans_rows(alpha, kstar, 10, rng);
    out.ari = adjusted_rand_index(assign, planted);
    return out;
}

}  // namespace nhnn
