#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "gzsl/autodiff.hpp"
#include "gzsl/error.hpp"
#include "gzsl/graph.hpp"
#include "gzsl/linalg.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl {

using ad::Var;

// Stacked autoencoder with tied weights: the encoder maps features to the
// semantic space through U^T and to the label space through the fixed
// semantic matrix; only U is trained. Attribute columns are the per-class
// semantic prototypes (already l2-normalized on load).
struct StaeModel {
    Var u;            // d_h x d_s
    Matrix a_seen;    // d_s x C_s
    Matrix a_unseen;  // d_s x C_u
    double gamma1 = 1e-3;
    double gamma2 = 1e-4;
    double gamma3 = 0.1;
    std::size_t instance_neighbors = 5;  // q
    std::size_t feature_neighbors = 5;   // r
};

// gamma3-weighted manifold term tr(B L^F B^T) with B = A_s^T U^T and L^F the
// Laplacian of the top-r cosine graph over the feature dimensions (rows) of
// h. The graph is a constant of the batch; gradients flow through U only.
inline Var feature_regularizer(Var h, const StaeModel& model) {
    if (h->value.cols() < 2) throw DataError("feature_regularizer: needs at least 2 samples");
    const std::size_t d = h->value.rows();
    const std::size_t r = std::min(model.feature_neighbors, d - 1);
    Matrix lap = graph_laplacian(knn_cosine_graph(h->value, r, GraphAxis::features));
    Var b = ad::matmul(ad::constant(transpose(model.a_seen)), ad::transpose(model.u));
    // tr(B L B^T) = sum((B L) .* B)
    return ad::sum_all(ad::hadamard(ad::matmul(b, ad::constant(lap)), b));
}

// ||H - U A_s Y^T||_F^2 + gamma1 ||A_s^T U^T H - Y^T||_F^2 + gamma3 R^F.
// y_transpose is C_s x n with one-hot columns.
inline Var stae_train_loss(Var h, const Matrix& y_transpose, const StaeModel& model) {
    if (y_transpose.rows() != model.a_seen.cols() || y_transpose.cols() != h->value.cols())
        throw DataError("stae_train_loss: one-hot label matrix has mismatched shape");
    for (std::size_t j = 0; j < y_transpose.cols(); ++j) {
        double sum = 0.0;
        bool onehot = true;
        for (std::size_t i = 0; i < y_transpose.rows(); ++i) {
            const double v = y_transpose(i, j);
            sum += v;
            onehot = onehot && (v == 0.0 || v == 1.0);
        }
        if (!onehot || sum != 1.0)
            throw DataError("stae_train_loss: columns of y must be one-hot");
    }
    Var a_s = ad::constant(model.a_seen);
    Var yt = ad::constant(y_transpose);
    Var reconstruction = ad::sq_frobenius(ad::sub(h, ad::matmul(ad::matmul(model.u, a_s), yt)));
    Var alignment = ad::sq_frobenius(
        ad::sub(ad::matmul(ad::matmul(ad::transpose(a_s), ad::transpose(model.u)), h), yt));
    Var loss = ad::add(reconstruction, ad::scale(alignment, model.gamma1));
    if (model.gamma3 != 0.0 && h->value.cols() >= 2)
        loss = ad::add(loss, ad::scale(feature_regularizer(h, model), model.gamma3));
    return loss;
}

struct UnseenPrediction {
    Matrix scores;                    // C_u x N, rows index the unseen classes
    std::vector<std::size_t> labels;  // argmax per column, ties to lowest index
};

namespace detail {

inline std::vector<std::size_t> argmax_columns(const Matrix& scores) {
    std::vector<std::size_t> labels(scores.cols());
    for (std::size_t j = 0; j < scores.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.rows(); ++i)
            if (scores(i, j) > scores(best, j)) best = i;
        labels[j] = best;
    }
    return labels;
}

}  // namespace detail

// Transductive inference over a test batch: couples the samples through the
// top-q instance graph and solves the Sylvester system
//   (A_u^T U^T U A_u + gamma1 I) Y^T + Y^T gamma2 (Q - W) = (gamma1+1) A_u^T U^T H.
// per_sample drops the coupling (gamma2 = 0) and solves each column alone.
inline UnseenPrediction stae_infer(const Matrix& h_te, const StaeModel& model,
                                   bool per_sample = false) {
    const std::size_t n = h_te.cols();
    if (n == 0) throw DataError("stae_infer: empty batch");
    const Matrix& u = model.u->value;
    const Matrix& a_u = model.a_unseen;
    if (h_te.rows() != u.rows()) throw DataError("stae_infer: feature dimension mismatch");

    Matrix ua = matmul(u, a_u);                     // d_h x C_u
    Matrix a_sy = matmul_tn(ua, ua);                // C_u x C_u Gram
    for (std::size_t i = 0; i < a_sy.rows(); ++i) a_sy(i, i) += model.gamma1;
    Matrix c_sy = (model.gamma1 + 1.0) * matmul_tn(ua, h_te);  // C_u x n

    UnseenPrediction pred;
    if (per_sample) {
        const Matrix zero(1, 1);
        pred.scores = Matrix(a_sy.rows(), n);
        for (std::size_t j = 0; j < n; ++j) {
            Matrix cj(a_sy.rows(), 1);
            for (std::size_t i = 0; i < a_sy.rows(); ++i) cj(i, 0) = c_sy(i, j);
            Matrix xj = solve_sylvester(a_sy, zero, cj);
            for (std::size_t i = 0; i < a_sy.rows(); ++i) pred.scores(i, j) = xj(i, 0);
        }
    } else {
        Matrix b_sy(n, n);
        const std::size_t q = std::min(model.instance_neighbors, n - 1);
        if (model.gamma2 != 0.0 && q >= 1) {
            Matrix lap = graph_laplacian(knn_cosine_graph(h_te, q, GraphAxis::instances));
            b_sy = model.gamma2 * lap;
        }
        pred.scores = solve_sylvester(a_sy, b_sy, c_sy);
    }
    pred.labels = detail::argmax_columns(pred.scores);
    return pred;
}

}  // namespace gzsl
