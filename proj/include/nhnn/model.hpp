#pragma once

#include <memory>
#include <random>
#include <vector>

#include "nhnn/hypergraph.hpp"
#include "nhnn/tape.hpp"

namespace nhnn {

enum class Variant { Full, AblationNoNaturality, AltBranch, HgnnBaseline };

// Activation of the factor encoder. Linear exists for the naturality test
// mode: with a linear encoder the two branches agree exactly.
enum class Activation { Tanh, Linear };

struct ModelConfig {
    int layers = 2;
    int factors = 2;   // K
    int hidden = 16;   // d, must be divisible by K
    double beta = 0.5; // interpolation ratio between neighborhood and self information
    double dropout = 0.5;
    double lambda = 0.0;  // factor discrimination loss weight; 0 disables
    Variant variant = Variant::Full;
    Activation activation = Activation::Tanh;
    // Test mode: run the full scoring path but replace alpha by 1 before the
    // scatter, for equivalence checks against the ablation variant.
    bool override_alpha_one = false;

    int chunk_width() const { return hidden / factors; }
    void validate() const {
        if (factors < 1 || hidden % factors != 0)
            throw ShapeMismatch("hidden dim must be divisible by factor count");
        if (beta < 0.0 || beta > 1.0) throw ShapeMismatch("beta must lie in [0,1]");
    }
};

template <class S>
struct LayerParams {
    Mat<S> enc_w;                // d_in x d factor encoder (chunk k = factor k columns)
    Mat<S> enc_b;                // 1 x d
    std::vector<Mat<S>> scorer;  // K bilinear matrices, each (d/K) x (d/K), no bias
    Mat<S> ln_gamma, ln_beta;    // 1 x d
    Mat<S> fcls_w;               // (d/K) x K factor classifier (lambda > 0)
    Mat<S> fcls_b;               // 1 x K
};

template <class S>
struct ModelParams {
    Variant variant = Variant::Full;
    std::vector<LayerParams<S>> layers;
    std::vector<Mat<S>> hgnn_w;  // per-layer weight for the baseline variant
    Mat<S> cls_w;                // d x C (node task) or M*d x C (hypergraph task)
    Mat<S> cls_b;                // 1 x C

    // Deterministic traversal order shared by the optimizer and serialization.
    std::vector<Mat<S>*> flat() {
        std::vector<Mat<S>*> out;
        for (auto& l : layers) {
            out.push_back(&l.enc_w);
            out.push_back(&l.enc_b);
            for (auto& w : l.scorer) out.push_back(&w);
            out.push_back(&l.ln_gamma);
            out.push_back(&l.ln_beta);
            out.push_back(&l.fcls_w);
            out.push_back(&l.fcls_b);
        }
        for (auto& w : hgnn_w) out.push_back(&w);
        out.push_back(&cls_w);
        out.push_back(&cls_b);
        return out;
    }
};

// Encoder weights uniform +-sqrt(6/(fan_in+fan_out)), biases zero; bilinear
// scorers start at identity plus small noise so they begin as agreement
// detectors.
template <class S>
ModelParams<S> init_params(const ModelConfig& cfg, int d_in, int num_classes, int classifier_in,
                           std::mt19937_64& rng) {
    cfg.validate();
    auto glorot = [&rng](int rows, int cols) {
        const double bound = std::sqrt(6.0 / (rows + cols));
        std::uniform_real_distribution<double> u(-bound, bound);
        Mat<S> m(rows, cols);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<S>(u(rng));
        return m;
    };
    ModelParams<S> p;
    p.variant = cfg.variant;
    const int dk = cfg.chunk_width();
    std::normal_distribution<double> jitter(0.0, 0.01);
    int in = d_in;
    for (int l = 0; l < cfg.layers; ++l) {
        if (cfg.variant == Variant::HgnnBaseline) {
            p.hgnn_w.push_back(glorot(in, cfg.hidden));
        } else {
            LayerParams<S> lp;
            // Block-diagonal start when the input splits evenly over the
            // factors: chunk k reads input slice k only, so the factor
            // chunks begin disentangled and the consistency scores carry
            // signal from the first epoch. Training is free to mix later.
            // Falls back to a dense init for indivisible widths.
            if (in % cfg.factors == 0) {
                const int in_k = in / cfg.factors;
                lp.enc_w = Mat<S>::Zero(in, cfg.hidden);
                for (int k = 0; k < cfg.factors; ++k)
                    lp.enc_w.block(k * in_k, k * dk, in_k, dk) = glorot(in_k, dk);
            } else {
                lp.enc_w = glorot(in, cfg.hidden);
            }
            lp.enc_b = Mat<S>::Zero(1, cfg.hidden);
            for (int k = 0; k < cfg.factors; ++k) {
                Mat<S> w = Mat<S>::Identity(dk, dk);
                for (Eigen::Index i = 0; i < w.rows(); ++i)
                    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) += static_cast<S>(jitter(rng));
                lp.scorer.push_back(std::move(w));
            }
            lp.ln_gamma = Mat<S>::Ones(1, cfg.hidden);
            lp.ln_beta = Mat<S>::Zero(1, cfg.hidden);
            lp.fcls_w = glorot(dk, cfg.factors);
            lp.fcls_b = Mat<S>::Zero(1, cfg.factors);
            p.layers.push_back(std::move(lp));
        }
        in = cfg.hidden;
    }
    p.cls_w = glorot(classifier_in, num_classes);
    p.cls_b = Mat<S>::Zero(1, num_classes);
    return p;
}

// Tape-side view of the parameters: leaves pushed in flat() order.
template <class S>
struct ParamLeaves {
    std::vector<Var<S>> vars;
    std::vector<Var<S>> per_layer_begin;  // unused; kept simple via index math
};

template <class S>
std::vector<Var<S>> push_leaves(Tape<S>& tape, ModelParams<S>& params) {
    std::vector<Var<S>> leaves;
    for (Mat<S>* m : params.flat()) leaves.push_back(leaf(tape, *m));
    return leaves;
}

namespace eps_defaults {
inline constexpr double l2_normalize = 1e-12;
inline constexpr double layer_norm = 1e-5;
inline constexpr double aggregation = 1e-12;
}  // namespace eps_defaults

// tanh(X W + b); chunk k of the output is the factor-k representation.
template <class S>
Var<S> factor_encode(Var<S> x, Var<S> enc_w, Var<S> enc_b, Activation act) {
    Var<S> h = add_rowvec(matmul(x, enc_w), enc_b);
    return act == Activation::Tanh ? tanh_op(h) : h;
}

// Aggregation-first branch: mean over hyperedge members, then encode.
template <class S>
Var<S> aggregation_first_branch(Var<S> x, const SegmentMap& by_edge, Var<S> enc_w, Var<S> enc_b,
                                Activation act) {
    return factor_encode(segment_mean(x, by_edge), enc_w, enc_b, act);
}

// Disentangle-first branch: encode, then mean over hyperedge members.
template <class S>
Var<S> disentangle_first_branch(Var<S> x, const SegmentMap& by_edge, Var<S> enc_w, Var<S> enc_b,
                                Activation act) {
    return segment_mean(factor_encode(x, enc_w, enc_b, act), by_edge);
}

// alpha_i^k = sigmoid(hhat W_k hthat^T) with both chunks row-normalized.
// Returns the K per-factor M x 1 columns.
template <class S>
std::vector<Var<S>> relevance_scores(Var<S> h_edge, Var<S> ht_edge,
                                     const std::vector<Var<S>>& scorer, int factors, S eps) {
    auto h_chunks = chunk_cols(h_edge, factors);
    auto ht_chunks = chunk_cols(ht_edge, factors);
    std::vector<Var<S>> alphas;
    alphas.reserve(factors);
    for (int k = 0; k < factors; ++k) {
        Var<S> hn = l2_normalize_rows(h_chunks[k], eps);
        Var<S> htn = l2_normalize_rows(ht_chunks[k], eps);
        Var<S> score = row_sum(mul_elementwise(matmul(hn, scorer[k]), htn));
        alphas.push_back(sigmoid(score));
    }
    return alphas;
}

// Per-layer outputs needed by the losses and the analysis exports.
template <class S>
struct LayerOutput {
    Var<S> z;                           // R x d node representations
    Var<S> hw;                          // M' x d alpha-weighted hyperedge representations
    std::vector<Var<S>> alpha;          // K columns, M' x 1
    std::vector<Var<S>> factor_chunks;  // K disentangle-first chunks, M' x (d/K)
};

template <class S>
LayerOutput<S> layer_forward(Var<S> x, const SegmentMap& by_edge, const SegmentMap& by_node,
                             const std::vector<Var<S>>& lp, const ModelConfig& cfg,
                             std::mt19937_64& rng, bool training) {
    Tape<S>& tape = *x.tape;
    const int K = cfg.factors;
    // lp layout: enc_w, enc_b, scorer[0..K), ln_gamma, ln_beta, fcls_w, fcls_b
    Var<S> enc_w = lp[0], enc_b = lp[1];
    std::vector<Var<S>> scorer(lp.begin() + 2, lp.begin() + 2 + K);
    Var<S> ln_gamma = lp[2 + K], ln_beta = lp[3 + K];

    x = dropout(x, cfg.dropout, rng, training);

    Var<S> h_node = factor_encode(x, enc_w, enc_b, cfg.activation);
    Var<S> h_edge = segment_mean(h_node, by_edge);  // disentangle-first
    Var<S> ht_edge = aggregation_first_branch(x, by_edge, enc_w, enc_b, cfg.activation);

    std::vector<Var<S>> alpha;
    if (cfg.variant == Variant::AblationNoNaturality) {
        for (int k = 0; k < K; ++k)
            alpha.push_back(leaf(tape, Mat<S>::Ones(h_edge.rows(), 1)));
    } else {
        alpha = relevance_scores(h_edge, ht_edge, scorer, K,
                                 static_cast<S>(eps_defaults::l2_normalize));
        if (cfg.override_alpha_one)
            for (int k = 0; k < K; ++k)
                alpha[k] = leaf(tape, Mat<S>::Ones(h_edge.rows(), 1));
    }

    Var<S> branch = cfg.variant == Variant::AltBranch ? ht_edge : h_edge;
    auto branch_chunks = chunk_cols(branch, K);

    std::vector<Var<S>> hw_chunks, y_chunks;
    for (int k = 0; k < K; ++k) {
        hw_chunks.push_back(scale_rows(branch_chunks[k], alpha[k]));
        Var<S> numer = segment_weighted_sum(branch_chunks[k], alpha[k], by_node);
        Var<S> denom = segment_sum(alpha[k], by_node);
        y_chunks.push_back(div_rows_guard(numer, denom, static_cast<S>(eps_defaults::aggregation)));
    }
    Var<S> y = concat_cols(y_chunks);
    Var<S> mix = add(scale(y, static_cast<S>(cfg.beta)), scale(h_node, static_cast<S>(1.0 - cfg.beta)));
    Var<S> z = layer_norm(mix, ln_gamma, ln_beta, static_cast<S>(eps_defaults::layer_norm));

    LayerOutput<S> out;
    out.z = z;
    out.hw = concat_cols(hw_chunks);
    out.alpha = std::move(alpha);
    out.factor_chunks = chunk_cols(h_edge, K);
    return out;
}

// HGNN-style convolution: Dv^{-1/2} I De^{-1} I^T Dv^{-1/2} X W, built from
// two segment passes with zero-degree guards.
template <class S>
Var<S> hgnn_baseline_layer(Var<S> x, const Hypergraph& hg, const SegmentMap& by_edge,
                           const SegmentMap& by_node, Var<S> weight, int copies = 1) {
    Tape<S>& tape = *x.tape;
    const int n = hg.num_nodes();
    Mat<S> dv_inv_sqrt(n * copies, 1);
    for (int c = 0; c < copies; ++c)
        for (int v = 0; v < n; ++v) {
            const int deg = hg.node_degree(v);
            dv_inv_sqrt(c * n + v, 0) = deg > 0 ? S(1) / std::sqrt(S(deg)) : S(0);
        }
    Var<S> dv = leaf(tape, dv_inv_sqrt);
    Var<S> xs = scale_rows(x, dv);
    Var<S> edge_mean = segment_mean(xs, by_edge);  // De^{-1} I^T Xs
    Var<S> ones = leaf(tape, Mat<S>::Ones(edge_mean.rows(), 1));
    Var<S> gathered = segment_weighted_sum(edge_mean, ones, by_node);  // I (...)
    Var<S> y = scale_rows(gathered, dv);
    return matmul(y, weight);
}

// Groups consecutive blocks of `group` rows into single rows by column
// concatenation: (B*group) x d -> B x (group*d), block order preserved.
template <class S>
Var<S> group_rows(Var<S> x, int group) {
    if (x.rows() % group != 0) throw ShapeMismatch("group_rows: rows not divisible");
    Tape<S>* t = x.tape;
    const Eigen::Index b = x.rows() / group, d = x.cols();
    Mat<S> out(b, group * d);
    for (Eigen::Index i = 0; i < b; ++i)
        for (int g = 0; g < group; ++g) out.block(i, g * d, 1, d) = x.value().row(i * group + g);
    int id = t->push(std::move(out));
    t->node(id).pull = [t, id, ix = x.id, group, d] {
        const auto& gmat = t->node(id).grad;
        for (Eigen::Index i = 0; i < gmat.rows(); ++i)
            for (int g = 0; g < group; ++g)
                t->node(ix).grad.row(i * group + g) += gmat.block(i, g * d, 1, d);
    };
    return {t, id};
}

template <class S>
struct ForwardResult {
    Var<S> logits;                                      // N x C or S x C
    std::vector<std::vector<Var<S>>> alpha;             // per layer, K columns (empty for hgnn)
    std::vector<std::vector<Var<S>>> factor_chunks;     // per layer, K chunks (for the disc loss)
    std::vector<std::uint8_t> edge_nonempty;            // per (replicated) hyperedge row
    std::vector<Var<S>> leaves;                         // parameter leaves in flat() order
};

// Full model forward. `features` has N rows (node task) or S*N rows
// (hypergraph task, sample-major blocks). Samples share the topology, so the
// segment maps are replicated over row blocks.
template <class S>
ForwardResult<S> model_forward(Tape<S>& tape, const Mat<S>& features, const Hypergraph& hg,
                               ModelParams<S>& params, const ModelConfig& cfg, Task task,
                               std::mt19937_64& rng, bool training) {
    cfg.validate();
    const int n = hg.num_nodes();
    if (features.rows() % n != 0) throw ShapeMismatch("feature rows not a multiple of num_nodes");
    const int copies = task == Task::HypergraphClassification
                           ? static_cast<int>(features.rows() / n)
                           : 1;
    if (task == Task::NodeClassification && features.rows() != n)
        throw ShapeMismatch("node task expects N feature rows");

    SegmentMap base_by_edge = segments_by_edge(hg);
    SegmentMap base_by_node = segments_by_node(hg);
    // The maps are captured by reference inside tape closures; keep them alive
    // for the lifetime of the tape via static-duration storage per call.
    auto by_edge = std::make_shared<SegmentMap>(
        copies == 1 ? std::move(base_by_edge) : replicate(base_by_edge, copies, n));
    auto by_node = std::make_shared<SegmentMap>(
        copies == 1 ? std::move(base_by_node)
                    : replicate(base_by_node, copies, hg.num_edges()));

    std::vector<Var<S>> leaves = push_leaves(tape, params);

    ForwardResult<S> result;
    result.edge_nonempty.resize(by_edge->num_segments());
    for (int s = 0; s < by_edge->num_segments(); ++s)
        result.edge_nonempty[s] = by_edge->segment_size(s) > 0;

    Var<S> x = leaf(tape, features);
    Var<S> last_hw{nullptr, -1};

    if (cfg.variant == Variant::HgnnBaseline) {
        // leaves layout: hgnn_w per layer, then cls_w, cls_b
        for (int l = 0; l < cfg.layers; ++l) {
            x = dropout(x, cfg.dropout, rng, training);
            x = hgnn_baseline_layer(x, hg, *by_edge, *by_node, leaves[l], copies);
            x = tanh_op(x);
        }
        Var<S> cls_w = leaves[cfg.layers], cls_b = leaves[cfg.layers + 1];
        if (task == Task::HypergraphClassification) {
            Var<S> edge_reps = segment_mean(x, *by_edge);
            Var<S> sample_vecs = group_rows(edge_reps, hg.num_edges());
            result.logits = add_rowvec(matmul(sample_vecs, cls_w), cls_b);
        } else {
            result.logits = add_rowvec(matmul(x, cls_w), cls_b);
        }
    } else {
        const int per_layer = 4 + cfg.factors;  // enc_w, enc_b, K scorers, ln_gamma, ln_beta -> plus fcls pair
        const int stride = per_layer + 2;
        for (int l = 0; l < cfg.layers; ++l) {
            std::vector<Var<S>> lp(leaves.begin() + l * stride, leaves.begin() + (l + 1) * stride);
            LayerOutput<S> out = layer_forward(x, *by_edge, *by_node, lp, cfg, rng, training);
            x = out.z;
            last_hw = out.hw;
            result.alpha.push_back(std::move(out.alpha));
            result.factor_chunks.push_back(std::move(out.factor_chunks));
        }
        Var<S> cls_w = leaves[cfg.layers * stride], cls_b = leaves[cfg.layers * stride + 1];
        if (task == Task::HypergraphClassification) {
            // Readout: concatenation of the final layer's alpha-weighted
            // hyperedge representations in index order.
            Var<S> sample_vecs = group_rows(last_hw, hg.num_edges());
            result.logits = add_rowvec(matmul(sample_vecs, cls_w), cls_b);
        } else {
            result.logits = add_rowvec(matmul(x, cls_w), cls_b);
        }
    }

    // Anchor the map lifetimes to the tape by stashing them in a final no-op
    // closure holder node.
    int anchor = tape.push(Mat<S>::Zero(1, 1));
    tape.node(anchor).pull = [by_edge, by_node] {};
    result.leaves = std::move(leaves);
    return result;
}

// Per-layer leaf stride in flat()/push_leaves order.
inline int layer_param_stride(const ModelConfig& cfg) { return 6 + cfg.factors; }

// Positions of the factor-classifier leaves for layer l.
inline std::pair<int, int> factor_classifier_slot(const ModelConfig& cfg, int l) {
    const int stride = layer_param_stride(cfg);
    return {l * stride + 4 + cfg.factors, l * stride + 5 + cfg.factors};
}

}  // namespace nhnn
