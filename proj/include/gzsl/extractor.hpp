#pragma once

#include <vector>

#include "gzsl/attention.hpp"
#include "gzsl/autodiff.hpp"
#include "gzsl/error.hpp"
#include "gzsl/nn.hpp"

namespace gzsl {

// How the per-timestep BLSTM outputs collapse to one feature vector.
enum class Pooling {
    last_first,  // final forward hidden state + first-timestep backward hidden state
    mean,        // mean over timesteps of the concatenated states
};

// Shared front end: multi-head self-attention over the raw sequence followed
// by a stacked BLSTM, pooled to a d_f = 2*hidden feature column.
struct FeatureExtractor {
    SelfAttentionParams attention;
    nn::BlstmStack blstm;
    Pooling pooling = Pooling::last_first;

    FeatureExtractor() = default;
    FeatureExtractor(std::size_t d_x, std::size_t n_heads, std::size_t n_layers,
                     std::size_t hidden, Rng& rng)
        : attention(d_x, n_heads, rng), blstm(n_layers, hidden, d_x, rng) {}

    std::size_t feature_dim() const { return 2 * blstm.hidden; }

    // x is one sequence as a d_x x l matrix (columns are frames).
    Var extract(Var x) const {
        if (x->value.cols() == 0) throw DataError("FeatureExtractor: empty sequence");
        Var attended = multi_head_self_attention(x, attention);
        std::vector<Var> frames;
        frames.reserve(attended->value.cols());
        for (std::size_t t = 0; t < attended->value.cols(); ++t)
            frames.push_back(ad::col(attended, t));
        nn::BlstmOutput out = blstm.forward(frames);
        if (pooling == Pooling::last_first)
            return ad::vstack({out.fwd.back(), out.bwd.front()});
        Var acc = ad::vstack({out.fwd[0], out.bwd[0]});
        for (std::size_t t = 1; t < out.fwd.size(); ++t)
            acc = ad::add(acc, ad::vstack({out.fwd[t], out.bwd[t]}));
        return ad::scale(acc, 1.0 / static_cast<double>(out.fwd.size()));
    }

    std::vector<Var> params() const {
        std::vector<Var> ps = attention.params();
        for (const auto& p : blstm.params()) ps.push_back(p);
        return ps;
    }
};

}  // namespace gzsl
