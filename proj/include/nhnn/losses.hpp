#pragma once

#include "nhnn/model.hpp"
#include "nhnn/tape.hpp"

namespace nhnn {

template <class S>
struct LossReport {
    S task_loss = 0;
    S dis_loss = 0;
    S total = 0;
};

// Mean cross-entropy over the masked population.
template <class S>
Var<S> task_loss(Var<S> logits, const std::vector<int>& labels,
                 const std::vector<std::uint8_t>& mask = {}) {
    return cross_entropy(logits, labels, mask);
}

// Factor discrimination loss: every factor chunk of every hyperedge gets its
// factor index as a pseudo label, classified by a shared one-layer map
// (d/K) -> K per layer. Normalized by M*K*L via the per-call mean and the
// 1/(K*L) scale. Empty hyperedges are excluded.
template <class S>
Var<S> factor_discrimination_loss(Tape<S>& tape,
                                  const std::vector<std::vector<Var<S>>>& factor_chunks,
                                  const std::vector<Var<S>>& leaves, const ModelConfig& cfg,
                                  const std::vector<std::uint8_t>& edge_nonempty) {
    const int L = static_cast<int>(factor_chunks.size());
    const int K = cfg.factors;
    Var<S> total = leaf(tape, Mat<S>::Zero(1, 1));
    for (int l = 0; l < L; ++l) {
        auto [wi, bi] = factor_classifier_slot(cfg, l);
        Var<S> w = leaves[wi], b = leaves[bi];
        for (int k = 0; k < K; ++k) {
            Var<S> logits = add_rowvec(matmul(factor_chunks[l][k], w), b);
            std::vector<int> pseudo(logits.rows(), k);
            total = add(total, cross_entropy(logits, pseudo, edge_nonempty));
        }
    }
    return scale(total, S(1) / S(K * L));
}

// total = task + lambda * dis on the tape, with a value-level report.
template <class S>
std::pair<Var<S>, LossReport<S>> combined_loss(Tape<S>& tape, const ForwardResult<S>& fwd,
                                               const std::vector<int>& labels,
                                               const std::vector<std::uint8_t>& mask,
                                               const ModelConfig& cfg) {
    Var<S> task = task_loss(fwd.logits, labels, mask);
    LossReport<S> report;
    report.task_loss = task.value()(0, 0);
    Var<S> total = task;
    if (cfg.lambda > 0.0 && cfg.variant != Variant::HgnnBaseline) {
        Var<S> dis = factor_discrimination_loss(tape, fwd.factor_chunks, fwd.leaves, cfg,
                                                fwd.edge_nonempty);
        report.dis_loss = dis.value()(0, 0);
        total = add(task, scale(dis, static_cast<S>(cfg.lambda)));
    }
    report.total = total.value()(0, 0);
    return {total, report};
}

}  // namespace nhnn
