#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nhnn/common.hpp"
#include "nhnn/hypergraph.hpp"

namespace nhnn {

// Define-by-run reverse-mode tape. Every forward op appends one record with
// the output value and a pull closure that scatters the output gradient into
// the input gradients. The record order is the topological order, so backward
// is a single reverse sweep. One Tape and its Vars form a single-threaded
// execution context; the tape is rebuilt on every forward pass.
template <class S>
class Tape {
public:
    struct Node {
        Mat<S> value;
        Mat<S> grad;
        std::function<void()> pull;  // null for leaves
    };

    explicit Tape(bool checked = false) : checked_(checked) {}

    int size() const { return static_cast<int>(nodes_.size()); }
    Node& node(int id) { return nodes_[id]; }
    const Node& node(int id) const { return nodes_[id]; }

    int push(Mat<S> value) {
        if (checked_ && !value.allFinite()) throw Error("NonFiniteValue", "tensor contains NaN/Inf");
        nodes_.push_back(Node{std::move(value), Mat<S>(), nullptr});
        return size() - 1;
    }

    void backward(int loss_id) {
        for (int i = 0; i <= loss_id; ++i)
            nodes_[i].grad = Mat<S>::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
        nodes_[loss_id].grad.setOnes();
        for (int i = loss_id; i >= 0; --i)
            if (nodes_[i].pull) nodes_[i].pull();
    }

private:
    std::vector<Node> nodes_;
    bool checked_;
};

template <class S>
struct Var {
    Tape<S>* tape = nullptr;
    int id = -1;

    const Mat<S>& value() const { return tape->node(id).value; }
    const Mat<S>& grad() const { return tape->node(id).grad; }
    Eigen::Index rows() const { return value().rows(); }
    Eigen::Index cols() const { return value().cols(); }
};

template <class S>
Var<S> leaf(Tape<S>& tape, Mat<S> value) {
    return {&tape, tape.push(std::move(value))};
}

template <class S, class Derived>
Var<S> leaf(Tape<S>& tape, const Eigen::MatrixBase<Derived>& value) {
    return leaf(tape, Mat<S>(value));
}

namespace detail {
template <class S>
void require_same_shape(const Var<S>& a, const Var<S>& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
}
}  // namespace detail

// ---- arithmetic ------------------------------------------------------------

template <class S>
Var<S> add(Var<S> a, Var<S> b) {
    detail::require_same_shape(a, b, "add");
    Tape<S>* t = a.tape;
    int id = t->push(a.value() + b.value());
    t->node(id).pull = [t, id, ia = a.id, ib = b.id] {
        t->node(ia).grad += t->node(id).grad;
        t->node(ib).grad += t->node(id).grad;
    };
    return {t, id};
}

template <class S>
Var<S> sub(Var<S> a, Var<S> b) {
    detail::require_same_shape(a, b, "sub");
    Tape<S>* t = a.tape;
    int id = t->push(a.value() - b.value());
    t->node(id).pull = [t, id, ia = a.id, ib = b.id] {
        t->node(ia).grad += t->node(id).grad;
        t->node(ib).grad -= t->node(id).grad;
    };
    return {t, id};
}

template <class S>
Var<S> mul_elementwise(Var<S> a, Var<S> b) {
    detail::require_same_shape(a, b, "mul_elementwise");
    Tape<S>* t = a.tape;
    int id = t->push(a.value().cwiseProduct(b.value()));
    t->node(id).pull = [t, id, ia = a.id, ib = b.id] {
        t->node(ia).grad += t->node(id).grad.cwiseProduct(t->node(ib).value);
        t->node(ib).grad += t->node(id).grad.cwiseProduct(t->node(ia).value);
    };
    return {t, id};
}

template <class S>
Var<S> scale(Var<S> a, S c) {
    Tape<S>* t = a.tape;
    int id = t->push(a.value() * c);
    t->node(id).pull = [t, id, ia = a.id, c] { t->node(ia).grad += t->node(id).grad * c; };
    return {t, id};
}

template <class S>
Var<S> matmul(Var<S> a, Var<S> b) {
    if (a.cols() != b.rows())
        throw ShapeMismatch("matmul: inner dims " + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()));
    Tape<S>* t = a.tape;
    int id = t->push(a.value() * b.value());
    t->node(id).pull = [t, id, ia = a.id, ib = b.id] {
        t->node(ia).grad.noalias() += t->node(id).grad * t->node(ib).value.transpose();
        t->node(ib).grad.noalias() += t->node(ia).value.transpose() * t->node(id).grad;
    };
    return {t, id};
}

// X + broadcast of a 1xd row vector over every row (the only broadcast form).
template <class S>
Var<S> add_rowvec(Var<S> x, Var<S> b) {
    if (b.rows() != 1 || b.cols() != x.cols()) throw ShapeMismatch("add_rowvec: bias must be 1xd");
    Tape<S>* t = x.tape;
    int id = t->push(x.value().rowwise() + b.value().row(0));
    t->node(id).pull = [t, id, ix = x.id, ib = b.id] {
        t->node(ix).grad += t->node(id).grad;
        t->node(ib).grad.row(0) += t->node(id).grad.colwise().sum();
    };
    return {t, id};
}

// Row i of X scaled by c(i,0).
template <class S>
Var<S> scale_rows(Var<S> x, Var<S> c) {
    if (c.rows() != x.rows() || c.cols() != 1) throw ShapeMismatch("scale_rows: scale must be nx1");
    Tape<S>* t = x.tape;
    int id = t->push(c.value().col(0).asDiagonal() * x.value());
    t->node(id).pull = [t, id, ix = x.id, ic = c.id] {
        const auto& g = t->node(id).grad;
        t->node(ix).grad += t->node(ic).value.col(0).asDiagonal() * g;
        t->node(ic).grad.col(0) += g.cwiseProduct(t->node(ix).value).rowwise().sum();
    };
    return {t, id};
}

// Row i of X divided by max(c(i,0), eps). Rows whose denominator is clamped
// get no gradient through c.
template <class S>
Var<S> div_rows_guard(Var<S> x, Var<S> c, S eps) {
    if (c.rows() != x.rows() || c.cols() != 1) throw ShapeMismatch("div_rows_guard: denom must be nx1");
    Tape<S>* t = x.tape;
    Mat<S> denom = c.value().col(0).cwiseMax(eps);
    Mat<S> out = denom.col(0).cwiseInverse().asDiagonal() * x.value();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id, ic = c.id, denom, eps] {
        const auto& g = t->node(id).grad;
        const auto& y = t->node(id).value;
        t->node(ix).grad += denom.col(0).cwiseInverse().asDiagonal() * g;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            if (t->node(ic).value(i, 0) > eps)
                t->node(ic).grad(i, 0) -= g.row(i).dot(y.row(i)) / denom(i, 0);
        }
    };
    return {t, id};
}

template <class S>
Var<S> row_sum(Var<S> x) {
    Tape<S>* t = x.tape;
    Mat<S> out = x.value().rowwise().sum();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id] {
        t->node(ix).grad.colwise() += t->node(id).grad.col(0);
    };
    return {t, id};
}

template <class S>
Var<S> sum_all(Var<S> x) {
    Tape<S>* t = x.tape;
    Mat<S> out(1, 1);
    out(0, 0) = x.value().sum();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id] {
        t->node(ix).grad.array() += t->node(id).grad(0, 0);
    };
    return {t, id};
}

// ---- nonlinearities --------------------------------------------------------

template <class S>
Var<S> sigmoid(Var<S> x) {
    Tape<S>* t = x.tape;
    Mat<S> out = ((-x.value().array()).exp() + S(1)).inverse();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id] {
        const auto& y = t->node(id).value.array();
        t->node(ix).grad.array() += t->node(id).grad.array() * y * (S(1) - y);
    };
    return {t, id};
}

template <class S>
Var<S> tanh_op(Var<S> x) {
    Tape<S>* t = x.tape;
    Mat<S> out = x.value().array().tanh();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id] {
        const auto& y = t->node(id).value.array();
        t->node(ix).grad.array() += t->node(id).grad.array() * (S(1) - y * y);
    };
    return {t, id};
}

// Each row divided by max(||row||_2, eps). Rows at or below eps keep a
// constant denominator, so they pass the gradient straight through.
template <class S>
Var<S> l2_normalize_rows(Var<S> x, S eps) {
    Tape<S>* t = x.tape;
    Mat<S> norms = x.value().rowwise().norm().cwiseMax(eps);
    Mat<S> out = norms.col(0).cwiseInverse().asDiagonal() * x.value();
    int id = t->push(std::move(out));
    Mat<S> raw_norms = x.value().rowwise().norm();
    t->node(id).pull = [t, id, ix = x.id, norms, raw_norms, eps] {
        const auto& g = t->node(id).grad;
        const auto& xv = t->node(ix).value;
        auto& gx = t->node(ix).grad;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            const S n = norms(i, 0);
            gx.row(i) += g.row(i) / n;
            if (raw_norms(i, 0) > eps)
                gx.row(i) -= xv.row(i) * (xv.row(i).dot(g.row(i)) / (n * n * n));
        }
    };
    return {t, id};
}

// Per-row standardization followed by an affine map with 1xd gamma/beta.
// Zero-variance rows map to zeros through the eps guard.
template <class S>
Var<S> layer_norm(Var<S> x, Var<S> gamma, Var<S> beta, S eps) {
    if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 || beta.cols() != x.cols())
        throw ShapeMismatch("layer_norm: gamma/beta must be 1xd");
    Tape<S>* t = x.tape;
    const Eigen::Index n = x.rows(), d = x.cols();
    Mat<S> xhat(n, d);
    Mat<S> inv_std(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const S mu = x.value().row(i).mean();
        const S var = (x.value().row(i).array() - mu).square().mean();
        inv_std(i, 0) = S(1) / std::sqrt(var + eps);
        xhat.row(i) = (x.value().row(i).array() - mu) * inv_std(i, 0);
    }
    Mat<S> out = (xhat.array().rowwise() * gamma.value().row(0).array()).rowwise() +
                 beta.value().row(0).array();
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id, ig = gamma.id, ib = beta.id, xhat, inv_std] {
        const auto& g = t->node(id).grad;
        const auto& gv = t->node(ig).value.row(0);
        t->node(ig).grad.row(0) += g.cwiseProduct(xhat).colwise().sum();
        t->node(ib).grad.row(0) += g.colwise().sum();
        const Eigen::Index d = g.cols();
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            Eigen::Matrix<S, 1, Eigen::Dynamic> gh = g.row(i).cwiseProduct(gv);
            const S mean_gh = gh.mean();
            const S mean_ghx = gh.cwiseProduct(xhat.row(i)).mean();
            t->node(ix).grad.row(i) +=
                inv_std(i, 0) *
                (gh.array() - mean_gh - xhat.row(i).array() * mean_ghx).matrix();
            (void)d;
        }
    };
    return {t, id};
}

// ---- shape ops -------------------------------------------------------------

template <class S>
Var<S> concat_cols(const std::vector<Var<S>>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_cols: no parts");
    Tape<S>* t = parts[0].tape;
    const Eigen::Index n = parts[0].rows();
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.rows() != n) throw ShapeMismatch("concat_cols: row count mismatch");
        total += p.cols();
    }
    Mat<S> out(n, total);
    std::vector<int> ids;
    std::vector<Eigen::Index> widths;
    Eigen::Index off = 0;
    for (const auto& p : parts) {
        out.middleCols(off, p.cols()) = p.value();
        ids.push_back(p.id);
        widths.push_back(p.cols());
        off += p.cols();
    }
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ids, widths] {
        Eigen::Index off = 0;
        for (size_t k = 0; k < ids.size(); ++k) {
            t->node(ids[k]).grad += t->node(id).grad.middleCols(off, widths[k]);
            off += widths[k];
        }
    };
    return {t, id};
}

template <class S>
Var<S> slice_cols(Var<S> x, Eigen::Index start, Eigen::Index width) {
    if (start < 0 || start + width > x.cols()) throw ShapeMismatch("slice_cols: out of range");
    Tape<S>* t = x.tape;
    int id = t->push(Mat<S>(x.value().middleCols(start, width)));
    t->node(id).pull = [t, id, ix = x.id, start, width] {
        t->node(ix).grad.middleCols(start, width) += t->node(id).grad;
    };
    return {t, id};
}

// K equal-width column chunks (factor views).
template <class S>
std::vector<Var<S>> chunk_cols(Var<S> x, int k) {
    if (k <= 0 || x.cols() % k != 0)
        throw ShapeMismatch("chunk_cols: " + std::to_string(x.cols()) + " cols not divisible by " +
                            std::to_string(k));
    const Eigen::Index w = x.cols() / k;
    std::vector<Var<S>> chunks;
    chunks.reserve(k);
    for (int i = 0; i < k; ++i) chunks.push_back(slice_cols(x, i * w, w));
    return chunks;
}

// ---- segment reductions ----------------------------------------------------

// Row s = mean over mapped input rows; empty segments produce zero rows.
template <class S>
Var<S> segment_mean(Var<S> x, const SegmentMap& map) {
    if (x.rows() != map.num_input_rows) throw ShapeMismatch("segment_mean: row count mismatch");
    Tape<S>* t = x.tape;
    Mat<S> out = Mat<S>::Zero(map.num_segments(), x.cols());
    for (int s = 0; s < map.num_segments(); ++s) {
        const int sz = map.segment_size(s);
        if (sz == 0) continue;
        for (int idx : map.segment(s)) out.row(s) += x.value().row(idx);
        out.row(s) /= S(sz);
    }
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id, &map] {
        const auto& g = t->node(id).grad;
        auto& gx = t->node(ix).grad;
        for (int s = 0; s < map.num_segments(); ++s) {
            const int sz = map.segment_size(s);
            if (sz == 0) continue;
            for (int idx : map.segment(s)) gx.row(idx) += g.row(s) / S(sz);
        }
    };
    return {t, id};
}

// Row s = sum of w(i) * x.row(i) over the segment. Combined with
// segment_sum of the weights this forms the normalized weighted scatter.
template <class S>
Var<S> segment_weighted_sum(Var<S> x, Var<S> w, const SegmentMap& map) {
    if (x.rows() != map.num_input_rows) throw ShapeMismatch("segment_weighted_sum: rows");
    if (w.rows() != x.rows() || w.cols() != 1) throw ShapeMismatch("segment_weighted_sum: w must be Rx1");
    Tape<S>* t = x.tape;
    Mat<S> out = Mat<S>::Zero(map.num_segments(), x.cols());
    for (int s = 0; s < map.num_segments(); ++s)
        for (int idx : map.segment(s)) out.row(s) += w.value()(idx, 0) * x.value().row(idx);
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id, iw = w.id, &map] {
        const auto& g = t->node(id).grad;
        for (int s = 0; s < map.num_segments(); ++s) {
            for (int idx : map.segment(s)) {
                t->node(ix).grad.row(idx) += t->node(iw).value(idx, 0) * g.row(s);
                t->node(iw).grad(idx, 0) += g.row(s).dot(t->node(ix).value.row(idx));
            }
        }
    };
    return {t, id};
}

// Segment sums of an Rx1 weight column (the denominator of the scatter).
template <class S>
Var<S> segment_sum(Var<S> w, const SegmentMap& map) {
    if (w.rows() != map.num_input_rows || w.cols() != 1) throw ShapeMismatch("segment_sum: w must be Rx1");
    Tape<S>* t = w.tape;
    Mat<S> out = Mat<S>::Zero(map.num_segments(), 1);
    for (int s = 0; s < map.num_segments(); ++s)
        for (int idx : map.segment(s)) out(s, 0) += w.value()(idx, 0);
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, iw = w.id, &map] {
        const auto& g = t->node(id).grad;
        for (int s = 0; s < map.num_segments(); ++s)
            for (int idx : map.segment(s)) t->node(iw).grad(idx, 0) += g(s, 0);
    };
    return {t, id};
}

// ---- losses ----------------------------------------------------------------

template <class S>
Var<S> log_softmax(Var<S> x) {
    Tape<S>* t = x.tape;
    Mat<S> out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const S m = x.value().row(i).maxCoeff();
        const S lse = std::log((x.value().row(i).array() - m).exp().sum()) + m;
        out.row(i) = x.value().row(i).array() - lse;
    }
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id] {
        const auto& g = t->node(id).grad;
        const auto& y = t->node(id).value;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            const S gsum = g.row(i).sum();
            t->node(ix).grad.row(i) += g.row(i) - gsum * y.row(i).array().exp().matrix();
        }
    };
    return {t, id};
}

// Mean negative log-likelihood over rows selected by mask (all rows when the
// mask is empty).
template <class S>
Var<S> cross_entropy(Var<S> logits, const std::vector<int>& labels,
                     const std::vector<std::uint8_t>& mask = {}) {
    if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
        throw ShapeMismatch("cross_entropy: label count");
    Tape<S>* t = logits.tape;
    Var<S> lsm = log_softmax(logits);
    Eigen::Index count = 0;
    S total = 0;
    for (Eigen::Index i = 0; i < lsm.rows(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        total -= lsm.value()(i, labels[i]);
        ++count;
    }
    Mat<S> out(1, 1);
    out(0, 0) = count > 0 ? total / S(count) : S(0);
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, il = lsm.id, labels, mask, count] {
        if (count == 0) return;
        const S g = t->node(id).grad(0, 0) / S(count);
        for (Eigen::Index i = 0; i < t->node(il).value.rows(); ++i) {
            if (!mask.empty() && !mask[i]) continue;
            t->node(il).grad(i, labels[i]) -= g;
        }
    };
    return {t, id};
}

// Inverted-dropout: active only in training mode, identity otherwise.
template <class S>
Var<S> dropout(Var<S> x, double p, std::mt19937_64& rng, bool training) {
    if (!training || p <= 0.0) return x;
    Tape<S>* t = x.tape;
    std::bernoulli_distribution keep(1.0 - p);
    Mat<S> mask(x.rows(), x.cols());
    const S inv_keep = S(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) mask(i, j) = keep(rng) ? inv_keep : S(0);
    int id = t->push(x.value().cwiseProduct(mask));
    t->node(id).pull = [t, id, ix = x.id, mask] {
        t->node(ix).grad += t->node(id).grad.cwiseProduct(mask);
    };
    return {t, id};
}

}  // namespace nhnn
