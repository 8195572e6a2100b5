#pragma once

#include <cmath>
#include <vector>

#include "gzsl/autodiff.hpp"
#include "gzsl/error.hpp"
#include "gzsl/nn.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

using ad::Var;

// softmax(Q^T K / sqrt(d_k)) V^T for column-sample Q, K (d_k x n) and
// V (d_v x n). Softmax is applied per query row; the result is n x d_v.
inline Var scaled_dot_attention(Var q, Var k, Var v) {
    if (q->value.cols() != k->value.cols() || k->value.cols() != v->value.cols())
        throw DataError("scaled_dot_attention: column counts disagree");
    if (q->value.rows() != k->value.rows())
        throw DataError("scaled_dot_attention: query/key dimensions disagree");
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(k->value.rows()));
    Var scores = ad::scale(ad::matmul(ad::transpose(q), k), inv_sqrt_dk);
    return ad::matmul(ad::softmax_rows(scores), ad::transpose(v));
}

// Per-head projections of the same input plus the output projection that
// mixes the concatenated heads back to the input dimension.
struct SelfAttentionParams {
    struct Head {
        Var wq, wk, wv;  // d_x x d_x each
    };
    std::vector<Head> heads;
    Var wo;  // d_x x (h * d_x)

    SelfAttentionParams() = default;
    SelfAttentionParams(std::size_t d_x, std::size_t n_heads, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d_x));
        heads.reserve(n_heads);
        for (std::size_t i = 0; i < n_heads; ++i)
            heads.push_back({ad::param(rng.uniform_matrix(d_x, d_x, -bound, bound)),
                             ad::param(rng.uniform_matrix(d_x, d_x, -bound, bound)),
                             ad::param(rng.uniform_matrix(d_x, d_x, -bound, bound))});
        const double obound = 1.0 / std::sqrt(static_cast<double>(n_heads * d_x));
        wo = ad::param(rng.uniform_matrix(d_x, n_heads * d_x, -obound, obound));
    }

    std::vector<Var> params() const {
        std::vector<Var> ps;
        for (const auto& h : heads) {
            ps.push_back(h.wq);
            ps.push_back(h.wk);
            ps.push_back(h.wv);
        }
        ps.push_back(wo);
        return ps;
    }
};

// MultiHead(x, x, x): heads attend over the same sequence, are stacked and
// projected by W^O. Output shape equals the input shape d_x x l_x.
inline Var multi_head_self_attention(Var x, const SelfAttentionParams& p) {
    if (x->value.cols() == 0) throw DataError("multi_head_self_attention: empty sequence");
    std::vector<Var> stacked;
    stacked.reserve(p.heads.size());
    for (const auto& head : p.heads) {
        Var h = scaled_dot_attention(ad::matmul(head.wq, x), ad::matmul(head.wk, x),
                                     ad::matmul(head.wv, x));
        stacked.push_back(ad::transpose(h));
    }
    return ad::matmul(p.wo, ad::vstack(stacked));
}

// Hidden FC layer producing per-component attention weights, Eq.-style
// H = softmax(W^at f + b^at) .* f applied per sample (column).
struct BranchAttentionParams {
    Var w;  // d_f x d_f
    Var b;  // d_f x 1

    BranchAttentionParams() = default;
    BranchAttentionParams(std::size_t d_f, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d_f));
        w = ad::param(rng.uniform_matrix(d_f, d_f, -bound, bound));
        b = ad::param(Matrix(d_f, 1));
    }

    std::vector<Var> params() const { return {w, b}; }
};

inline Var branch_attention(Var f, const BranchAttentionParams& p) {
    if (f->value.rows() != p.w->value.cols())
        throw DataError("branch_attention: feature dimension mismatch");
    Var weights = ad::softmax_cols(ad::add_bias(ad::matmul(p.w, f), p.b));
    return ad::hadamard(weights, f);
}

}  // namespace gzsl
