#pragma once

#include <chrono>
#include <optional>

#include "nhnn/dataset.hpp"
#include "nhnn/losses.hpp"
#include "nhnn/metrics.hpp"
#include "nhnn/model.hpp"

namespace nhnn {

struct TrainConfig {
    int max_epochs = 500;
    double learning_rate = 0.01;
    double weight_decay = 0.0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 50;  // hypergraph task only; node task is full-batch
    int patience = 30;
    std::uint64_t seed = 0;
    enum class SelectBy { ValAccuracy, ValMacroF1 } select_by = SelectBy::ValAccuracy;

    void validate() const {
        if (learning_rate <= 0 || max_epochs < 1 || patience < 1 || batch_size < 1)
            throw DegenerateSpec("train config: positive rates, patience >= 1 required");
    }
};

template <class S>
struct AdamState {
    std::vector<Mat<S>> m, v;
    std::int64_t step = 0;

    static AdamState init(ModelParams<S>& params) {
        AdamState st;
        for (Mat<S>* p : params.flat()) {
            st.m.push_back(Mat<S>::Zero(p->rows(), p->cols()));
            st.v.push_back(Mat<S>::Zero(p->rows(), p->cols()));
        }
        return st;
    }
};

// Bias-corrected Adam; weight decay enters as an L2 gradient term.
template <class S>
void adam_step(ModelParams<S>& params, const std::vector<Mat<S>>& grads, AdamState<S>& st,
               const TrainConfig& cfg) {
    auto flat = params.flat();
    if (flat.size() != grads.size()) throw ShapeMismatch("adam_step: gradient count mismatch");
    ++st.step;
    const S b1 = static_cast<S>(cfg.adam_beta1), b2 = static_cast<S>(cfg.adam_beta2);
    const S corr1 = S(1) - static_cast<S>(std::pow(cfg.adam_beta1, static_cast<double>(st.step)));
    const S corr2 = S(1) - static_cast<S>(std::pow(cfg.adam_beta2, static_cast<double>(st.step)));
    const S lr = static_cast<S>(cfg.learning_rate), eps = static_cast<S>(cfg.adam_eps);
    const S wd = static_cast<S>(cfg.weight_decay);
    for (size_t i = 0; i < flat.size(); ++i) {
        Mat<S> g = grads[i];
        if (wd != S(0)) g += wd * (*flat[i]);
        st.m[i] = b1 * st.m[i] + (S(1) - b1) * g;
        st.v[i] = b2 * st.v[i] + (S(1) - b2) * g.cwiseProduct(g);
        Mat<S> mhat = st.m[i] / corr1;
        Mat<S> vhat = st.v[i] / corr2;
        *flat[i] -= lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    }
}

struct EvalMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double loss = 0.0;
};

template <class S>
struct EvalResult {
    EvalMetrics metrics;
    MatD alpha;            // final-layer relevance matrix, M x K (empty for hgnn)
    MatD logits;
    std::vector<int> preds;
};

struct RunResult {
    int best_epoch = 0;
    int epochs_run = 0;
    EvalMetrics test;
    std::vector<double> train_loss_curve;
    std::vector<double> val_metric_curve;
    MatD final_alpha;  // final-layer alpha at the best epoch
    double wall_seconds = 0.0;
};

namespace detail {
template <class S>
MatD alpha_matrix(const ForwardResult<S>& fwd) {
    if (fwd.alpha.empty()) return MatD();
    const auto& cols = fwd.alpha.back();
    MatD alpha(cols[0].rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t k = 0; k < cols.size(); ++k)
        alpha.col(static_cast<Eigen::Index>(k)) = cols[k].value().col(0).template cast<double>();
    return alpha;
}
}  // namespace detail

template <class S>
EvalResult<S> evaluate(const Dataset& ds, ModelParams<S> params, const ModelConfig& cfg,
                       const std::vector<std::uint8_t>& mask) {
    Tape<S> tape;
    std::mt19937_64 rng(0);  // unused in eval mode
    Mat<S> features = ds.features.cast<S>();
    ForwardResult<S> fwd =
        model_forward(tape, features, ds.topology, params, cfg, ds.task, rng, false);
    Var<S> loss = task_loss(fwd.logits, ds.labels, mask);

    EvalResult<S> out;
    out.logits = fwd.logits.value().template cast<double>();
    out.preds = argmax_rows(out.logits);
    out.metrics.accuracy = accuracy(out.preds, ds.labels, mask);
    out.metrics.macro_f1 = macro_f1(out.preds, ds.labels, mask);
    out.metrics.micro_f1 = micro_f1(out.preds, ds.labels, mask);
    out.metrics.loss = static_cast<double>(loss.value()(0, 0));
    out.alpha = detail::alpha_matrix(fwd);
    return out;
}

// One full training run: Adam with early stopping on the validation metric,
// best parameters restored before the test evaluation. Deterministic given
// the config seed.
template <class S>
std::pair<RunResult, ModelParams<S>> train(const Dataset& ds, const ModelConfig& model_cfg,
                                           const TrainConfig& train_cfg) {
    train_cfg.validate();
    model_cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    // One RNG stream per run, split into init / dropout / data-order substreams.
    std::mt19937_64 init_rng(train_cfg.seed);
    std::mt19937_64 dropout_rng(train_cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::mt19937_64 order_rng(train_cfg.seed ^ 0xc2b2ae3d27d4eb4fULL);

    const int classifier_in = ds.task == Task::HypergraphClassification
                                  ? ds.topology.num_edges() * model_cfg.hidden
                                  : model_cfg.hidden;
    ModelParams<S> params = init_params<S>(model_cfg, ds.feature_dim(), ds.num_classes,
                                           classifier_in, init_rng);
    AdamState<S> adam = AdamState<S>::init(params);

    const int n = ds.topology.num_nodes();
    Mat<S> all_features = ds.features.cast<S>();

    // Sample indices with train mask (hypergraph task mini-batching).
    std::vector<int> train_samples;
    if (ds.task == Task::HypergraphClassification)
        for (int s = 0; s < ds.num_samples; ++s)
            if (ds.train_mask[s]) train_samples.push_back(s);

    RunResult result;
    ModelParams<S> best_params = params;
    double best_metric = -std::numeric_limits<double>::infinity();
    int since_best = 0;

    auto step_on = [&](const Mat<S>& features, const std::vector<int>& labels,
                       const std::vector<std::uint8_t>& mask) {
        Tape<S> tape;
        ForwardResult<S> fwd =
            model_forward(tape, features, ds.topology, params, model_cfg, ds.task, dropout_rng, true);
        auto [loss, report] = combined_loss(tape, fwd, labels, mask, model_cfg);
        if (!std::isfinite(static_cast<double>(report.total)))
            throw DivergenceDetected("loss is NaN/Inf at epoch " +
                                     std::to_string(result.epochs_run));
        tape.backward(loss.id);
        std::vector<Mat<S>> grads;
        grads.reserve(fwd.leaves.size());
        for (const Var<S>& v : fwd.leaves) grads.push_back(v.grad());
        adam_step(params, grads, adam, train_cfg);
        return static_cast<double>(report.total);
    };

    for (int epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
        result.epochs_run = epoch + 1;
        double epoch_loss = 0.0;
        if (ds.task == Task::NodeClassification) {
            epoch_loss = step_on(all_features, ds.labels, ds.train_mask);
        } else {
            std::vector<int> order = train_samples;
            std::shuffle(order.begin(), order.end(), order_rng);
            int batches = 0;
            for (size_t b = 0; b < order.size(); b += train_cfg.batch_size) {
                const size_t hi = std::min(order.size(), b + train_cfg.batch_size);
                Mat<S> batch_feat(static_cast<Eigen::Index>(hi - b) * n, ds.feature_dim());
                std::vector<int> batch_labels;
                for (size_t i = b; i < hi; ++i) {
                    batch_feat.middleRows(static_cast<Eigen::Index>(i - b) * n, n) =
                        all_features.middleRows(static_cast<Eigen::Index>(order[i]) * n, n);
                    batch_labels.push_back(ds.labels[order[i]]);
                }
                epoch_loss += step_on(batch_feat, batch_labels, {});
                ++batches;
            }
            if (batches > 0) epoch_loss /= batches;
        }
        result.train_loss_curve.push_back(epoch_loss);

        EvalResult<S> val = evaluate(ds, params, model_cfg, ds.val_mask);
        const double metric = train_cfg.select_by == TrainConfig::SelectBy::ValMacroF1
                                  ? val.metrics.macro_f1
                                  : val.metrics.accuracy;
        result.val_metric_curve.push_back(metric);
        if (metric > best_metric) {
            best_metric = metric;
            best_params = params;
            result.best_epoch = epoch + 1;
            since_best = 0;
        } else if (++since_best >= train_cfg.patience) {
            break;
        }
    }

    EvalResult<S> test = evaluate(ds, best_params, model_cfg, ds.test_mask);
    result.test = test.metrics;
    result.final_alpha = test.alpha;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {result, best_params};
}

struct BenchRow {
    int num_nodes = 0, num_edges = 0;
    std::int64_t incidences = 0;
    int hidden = 0;
    double median_ms = 0.0;
};

// Median forward+backward wall time over `trials` runs on the given dataset.
template <class S>
double time_forward_backward(const Dataset& ds, const ModelConfig& cfg, int trials,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ModelParams<S> params = init_params<S>(cfg, ds.feature_dim(), ds.num_classes,
                                           cfg.hidden, rng);
    Mat<S> features = ds.features.cast<S>();
    std::vector<double> times;
    for (int t = 0; t < trials + 1; ++t) {  // first iteration warms up
        std::mt19937_64 drop_rng(seed + t);
        const auto t0 = std::chrono::steady_clock::now();
        Tape<S> tape;
        ForwardResult<S> fwd =
            model_forward(tape, features, ds.topology, params, cfg, ds.task, drop_rng, false);
        Var<S> loss = task_loss(fwd.logits, ds.labels);
        tape.backward(loss.id);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (t > 0) times.push_back(ms);
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace nhnn
