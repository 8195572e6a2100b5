#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "gzsl/autodiff.hpp"
#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/nn.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

using ad::Var;

// Prototype-Based Detector: an FC projection into a low-dimensional
// prototype space, one learned prototype per seen class and a learned
// per-class rejection threshold.
struct PrototypeModel {
    nn::FcLayer fc1;  // proj_hidden x d_f
    nn::FcLayer fc2;  // proto_dim x proj_hidden
    Var prototypes;   // C_s x proto_dim, one row per seen class
    Var thresholds;   // C_s x 1, raw (unclamped) during training
    double gamma = 0.5;

    PrototypeModel() = default;
    PrototypeModel(std::size_t d_f, std::size_t proj_hidden, std::size_t proto_dim,
                   std::size_t n_classes, Rng& rng)
        : fc1(proj_hidden, d_f, rng), fc2(proto_dim, proj_hidden, rng) {
        prototypes = ad::param(rng.normal_matrix(n_classes, proto_dim, 0.1));
        thresholds = ad::param(Matrix(n_classes, 1));
    }

    std::size_t n_classes() const { return prototypes->value.rows(); }

    // ReLU between the two FC layers; accepts a d_f x n batch.
    Var project(Var h) const { return fc2.forward(ad::relu(fc1.forward(h))); }

    std::vector<Var> params() const {
        return {fc1.w, fc1.b, fc2.w, fc2.b, prototypes, thresholds};
    }
};

// Distance-based cross entropy over softmax of -gamma * squared distances.
inline Var dce_loss(Var p, const std::vector<int>& labels, const PrototypeModel& model) {
    Var d = ad::pairwise_sqdist(p, model.prototypes);
    return ad::softmax_cross_entropy(ad::scale(d, -model.gamma), labels);
}

// Mean squared distance of each projection to its own class prototype.
inline Var prototype_loss(Var p, const std::vector<int>& labels, const PrototypeModel& model) {
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= model.n_classes())
            throw DataError("prototype_loss: label out of range");
    return ad::pick_mean(ad::pairwise_sqdist(p, model.prototypes), labels);
}

struct ThresholdLosses {
    Var hinge;    // mean positive part of (nearest distance - its threshold)
    Var penalty;  // sum of squared thresholds
};

inline ThresholdLosses threshold_losses(Var p, const PrototypeModel& model) {
    Var d = ad::pairwise_sqdist(p, model.prototypes);
    return {ad::threshold_hinge(d, model.thresholds), ad::sq_frobenius(model.thresholds)};
}

// L_dce + beta1 * L_pl + beta2 * L_th1 + beta3 * L_th2.
inline Var pbd_total_loss(Var p, const std::vector<int>& labels, const PrototypeModel& model,
                          double beta1, double beta2, double beta3) {
    Var total = dce_loss(p, labels, model);
    total = ad::add(total, ad::scale(prototype_loss(p, labels, model), beta1));
    ThresholdLosses th = threshold_losses(p, model);
    total = ad::add(total, ad::scale(th.hinge, beta2));
    return ad::add(total, ad::scale(th.penalty, beta3));
}

// Seen/unseen verdict for one projection. Thresholds are clamped to >= 0
// here; training keeps them raw.
struct GateDecision {
    std::size_t nearest_class = 0;
    double delta_d = 0.0;

    bool is_seen() const { return delta_d <= 0.0; }
};

inline GateDecision gate(const Matrix& p, const PrototypeModel& model) {
    const Matrix& m = model.prototypes->value;
    if (p.rows() != m.cols() || p.cols() != 1)
        throw DataError("gate: projection must be a proto_dim x 1 column");
    GateDecision decision;
    double best = 0.0;
    for (std::size_t k = 0; k < m.rows(); ++k) {
        double dist = 0.0;
        for (std::size_t t = 0; t < m.cols(); ++t) {
            const double diff = p(t, 0) - m(k, t);
            dist += diff * diff;
        }
        if (k == 0 || dist < best) {
            best = dist;
            decision.nearest_class = k;
        }
    }
    const double th = std::max(0.0, model.thresholds->value(decision.nearest_class, 0));
    decision.delta_d = best - th;
    return decision;
}

}  // namespace gzsl
