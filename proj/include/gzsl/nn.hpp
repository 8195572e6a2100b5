#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gzsl/autodiff.hpp"
#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/rng.hpp"

namespace gzsl::nn {

using ad::Var;

inline Var fc_forward(Var x, Var w, Var b) { return ad::add_bias(ad::matmul(w, x), b); }

// Fully connected layer, weights uniform(-1/sqrt(d_in), 1/sqrt(d_in)).
struct FcLayer {
    Var w;
    Var b;

    FcLayer() = default;
    FcLayer(std::size_t d_out, std::size_t d_in, Rng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
        w = ad::param(rng.uniform_matrix(d_out, d_in, -bound, bound));
        b = ad::param(Matrix(d_out, 1));
    }

    Var forward(Var x) const { return fc_forward(x, w, b); }
};

// Gate parameters of one LSTM direction: per gate an input matrix, a
// recurrent matrix and a bias. Forget bias starts at 1.0.
struct LstmCellParams {
    Var wi, wf, wo, wg;  // hidden x d_in
    Var ri, rf, ro, rg;  // hidden x hidden
    Var bi, bf, bo, bg;  // hidden x 1

    LstmCellParams() = default;
    LstmCellParams(std::size_t hidden, std::size_t d_in, Rng& rng) {
        const double wb = 1.0 / std::sqrt(static_cast<double>(d_in));
        const double rb = 1.0 / std::sqrt(static_cast<double>(hidden));
        wi = ad::param(rng.uniform_matrix(hidden, d_in, -wb, wb));
        wf = ad::param(rng.uniform_matrix(hidden, d_in, -wb, wb));
        wo = ad::param(rng.uniform_matrix(hidden, d_in, -wb, wb));
        wg = ad::param(rng.uniform_matrix(hidden, d_in, -wb, wb));
        ri = ad::param(rng.uniform_matrix(hidden, hidden, -rb, rb));
        rf = ad::param(rng.uniform_matrix(hidden, hidden, -rb, rb));
        ro = ad::param(rng.uniform_matrix(hidden, hidden, -rb, rb));
        rg = ad::param(rng.uniform_matrix(hidden, hidden, -rb, rb));
        bi = ad::param(Matrix(hidden, 1));
        bf = ad::param(Matrix(hidden, 1, 1.0));
        bo = ad::param(Matrix(hidden, 1));
        bg = ad::param(Matrix(hidden, 1));
    }

    std::size_t hidden() const { return wi->value.rows(); }

    std::vector<Var> params() const { return {wi, wf, wo, wg, ri, rf, ro, rg, bi, bf, bo, bg}; }
};

struct LstmState {
    Var h;
    Var c;
};

inline LstmState lstm_step(const LstmCellParams& p, Var x, const LstmState& prev) {
    Var i = ad::sigmoid(ad::add_bias(ad::add(ad::matmul(p.wi, x), ad::matmul(p.ri, prev.h)), p.bi));
    Var f = ad::sigmoid(ad::add_bias(ad::add(ad::matmul(p.wf, x), ad::matmul(p.rf, prev.h)), p.bf));
    Var o = ad::sigmoid(ad::add_bias(ad::add(ad::matmul(p.wo, x), ad::matmul(p.ro, prev.h)), p.bo));
    Var g = ad::tanh(ad::add_bias(ad::add(ad::matmul(p.wg, x), ad::matmul(p.rg, prev.h)), p.bg));
    Var c = ad::add(ad::hadamard(i, g), ad::hadamard(f, prev.c));
    Var h = ad::hadamard(o, ad::tanh(c));
    return {h, c};
}

// One bidirectional layer: an independent forward and backward LSTM.
struct BlstmLayer {
    LstmCellParams fwd;
    LstmCellParams bwd;

    BlstmLayer() = default;
    BlstmLayer(std::size_t hidden, std::size_t d_in, Rng& rng)
        : fwd(hidden, d_in, rng), bwd(hidden, d_in, rng) {}
};

// Per-timestep top-layer hidden states of both directions.
struct BlstmOutput {
    std::vector<Var> fwd;
    std::vector<Var> bwd;
};

// Stack of bidirectional layers; layer inputs above the first are the
// concatenated (2*hidden) outputs of the layer below. Initial hidden and
// cell states are zero.
struct BlstmStack {
    std::vector<BlstmLayer> layers;
    std::size_t hidden = 0;

    BlstmStack() = default;
    BlstmStack(std::size_t n_layers, std::size_t hidden, std::size_t d_in, Rng& rng)
        : hidden(hidden) {
        layers.reserve(n_layers);
        for (std::size_t l = 0; l < n_layers; ++l)
            layers.emplace_back(hidden, l == 0 ? d_in : 2 * hidden, rng);
    }

    BlstmOutput forward(const std::vector<Var>& sequence) const {
        if (sequence.empty()) throw DataError("BlstmStack: empty sequence");
        std::vector<Var> input = sequence;
        BlstmOutput out;
        for (const BlstmLayer& layer : layers) {
            const std::size_t l = input.size();
            LstmState zero{ad::constant(Matrix(hidden, 1)), ad::constant(Matrix(hidden, 1))};
            out.fwd.assign(l, nullptr);
            out.bwd.assign(l, nullptr);
            LstmState state = zero;
            for (std::size_t t = 0; t < l; ++t) {
                state = lstm_step(layer.fwd, input[t], state);
                out.fwd[t] = state.h;
            }
            state = zero;
            for (std::size_t t = l; t > 0; --t) {
                state = lstm_step(layer.bwd, input[t - 1], state);
                out.bwd[t - 1] = state.h;
            }
            if (&layer != &layers.back()) {
                for (std::size_t t = 0; t < l; ++t)
                    input[t] = ad::vstack({out.fwd[t], out.bwd[t]});
            }
        }
        return out;
    }

    std::vector<Var> params() const {
        std::vector<Var> ps;
        for (const auto& layer : layers) {
            for (const auto& p : layer.fwd.params()) ps.push_back(p);
            for (const auto& p : layer.bwd.params()) ps.push_back(p);
        }
        return ps;
    }
};

// Per-timestep concatenation of forward and backward top-layer hidden
// states, as a (2*hidden) x l matrix.
inline Var blstm_forward(const BlstmStack& stack, const std::vector<Var>& sequence) {
    BlstmOutput out = stack.forward(sequence);
    std::vector<Var> cols;
    cols.reserve(out.fwd.size());
    for (std::size_t t = 0; t < out.fwd.size(); ++t)
        cols.push_back(ad::vstack({out.fwd[t], out.bwd[t]}));
    return ad::hstack(cols);
}

// A named set of parameters updated with one learning rate.
struct ParamGroup {
    std::string name;
    std::vector<Var> params;
    double learning_rate = 0.0;
};

// Adam with independent step counts per group.
class Adam {
public:
    Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<ParamGroup>& groups) {
        for (ParamGroup& group : groups) {
            const std::uint64_t t = ++steps_[group.name];
            const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
            for (Var& p : group.params) {
                p->ensure_grad();
                State& st = state_[p.get()];
                if (!st.m.same_shape(p->value)) {
                    st.m = Matrix(p->value.rows(), p->value.cols());
                    st.v = Matrix(p->value.rows(), p->value.cols());
                }
                for (std::size_t i = 0; i < p->value.size(); ++i) {
                    const double g = p->grad.data()[i];
                    double& m = st.m.data()[i];
                    double& v = st.v.data()[i];
                    m = beta1_ * m + (1.0 - beta1_) * g;
                    v = beta2_ * v + (1.0 - beta2_) * g * g;
                    const double mhat = m / bc1;
                    const double vhat = v / bc2;
                    p->value.data()[i] -= group.learning_rate * mhat / (std::sqrt(vhat) + eps_);
                }
            }
        }
    }

private:
    struct State {
        Matrix m;
        Matrix v;
    };

    double beta1_, beta2_, eps_;
    std::unordered_map<std::string, std::uint64_t> steps_;
    std::unordered_map<ad::Node*, State> state_;
};

}  // namespace gzsl::nn
