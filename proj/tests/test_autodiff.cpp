#include <gtest/gtest.h>

#include <cmath>

#include "gzsl/autodiff.hpp"
#include "gzsl/nn.hpp"
#include "gzsl/rng.hpp"
#include "testing_util.hpp"

namespace {

using namespace gzsl;
using ad::Var;

TEST(Backward, SumGradientIsOnes) {
    Var p = ad::param(Matrix(3, 2, 0.5));
    Var loss = ad::sum_all(p);
    ad::backward(loss);
    for (std::size_t i = 0; i < p->grad.size(); ++i) EXPECT_EQ(p->grad.data()[i], 1.0);
}

TEST(Backward, SquaredNormGradientIsTwoP) {
    Rng rng(1);
    Var p = ad::param(rng.uniform_matrix(4, 3, -1.0, 1.0));
    ad::backward(ad::sq_frobenius(p));
    for (std::size_t i = 0; i < p->value.size(); ++i)
        EXPECT_NEAR(p->grad.data()[i], 2.0 * p->value.data()[i], 1e-12);
}

TEST(Backward, RejectsNonScalarLoss) {
    Var p = ad::param(Matrix(2, 2, 1.0));
    EXPECT_THROW(ad::backward(p), DataError);
}

TEST(Backward, ReusedNodeAccumulatesOnce) {
    // loss = sum(p + p) -> dp = 2.
    Var p = ad::param(Matrix(2, 2, 1.0));
    ad::backward(ad::sum_all(ad::add(p, p)));
    for (std::size_t i = 0; i < p->grad.size(); ++i) EXPECT_EQ(p->grad.data()[i], 2.0);
}

TEST(Backward, ThreeLayerCompositeMatchesFiniteDifferences) {
    Rng rng(2);
    Var w1 = ad::param(rng.uniform_matrix(5, 4, -0.5, 0.5));
    Var b1 = ad::param(rng.uniform_matrix(5, 1, -0.5, 0.5));
    Var w2 = ad::param(rng.uniform_matrix(3, 5, -0.5, 0.5));
    Var b2 = ad::param(rng.uniform_matrix(3, 1, -0.5, 0.5));
    Var w3 = ad::param(rng.uniform_matrix(2, 3, -0.5, 0.5));
    Var x = ad::constant(rng.uniform_matrix(4, 6, -1.0, 1.0));
    auto build = [&]() {
        Var h1 = ad::tanh(nn::fc_forward(x, w1, b1));
        Var h2 = ad::sigmoid(nn::fc_forward(h1, w2, b2));
        Var h3 = ad::relu(ad::matmul(w3, h2));
        return ad::sq_frobenius(h3);
    };
    gzsl::testing::check_gradients(build, {w1, b1, w2, b2, w3});
}

TEST(Ops, FcForwardExamples) {
    Rng rng(3);
    Matrix xv = rng.uniform_matrix(4, 5, -1.0, 1.0);
    Var x = ad::constant(xv);
    // w = I, b = 0 -> x
    Var out = nn::fc_forward(x, ad::constant(Matrix::identity(4)), ad::constant(Matrix(4, 1)));
    EXPECT_LE(frobenius_norm(out->value - xv), 1e-14);
    // w = 0, b = c -> all columns c
    Var c = ad::constant(Matrix(3, 1, 2.5));
    Var out2 = nn::fc_forward(x, ad::constant(Matrix(3, 4)), c);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(out2->value(i, j), 2.5);
    // random case against a naive triple loop
    Matrix wv = rng.uniform_matrix(3, 4, -1.0, 1.0);
    Matrix bv = rng.uniform_matrix(3, 1, -1.0, 1.0);
    Var out3 = nn::fc_forward(x, ad::constant(wv), ad::constant(bv));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double s = bv(i, 0);
            for (std::size_t k = 0; k < 4; ++k) s += wv(i, k) * xv(k, j);
            EXPECT_NEAR(out3->value(i, j), s, 1e-12);
        }
}

TEST(Ops, SoftmaxCrossEntropyUniformLogits) {
    Var logits = ad::constant(Matrix(5, 3, 0.7));
    Var loss = ad::softmax_cross_entropy(logits, {0, 2, 4});
    EXPECT_NEAR(loss->value(0, 0), std::log(5.0), 1e-12);
}

TEST(Ops, SoftmaxCrossEntropySaturates) {
    double prev = 1e9;
    for (double margin : {2.0, 5.0, 10.0, 30.0}) {
        Matrix z(4, 1);
        z(1, 0) = margin;
        Var loss = ad::softmax_cross_entropy(ad::constant(z), {1});
        EXPECT_LT(loss->value(0, 0), prev);
        prev = loss->value(0, 0);
    }
    EXPECT_LT(prev, 1e-10);
}

TEST(Ops, SoftmaxCrossEntropyMatchesDirectFormula) {
    Rng rng(4);
    Matrix z = rng.uniform_matrix(6, 4, -2.0, 2.0);
    std::vector<int> labels = {3, 0, 5, 2};
    Var loss = ad::softmax_cross_entropy(ad::constant(z), labels);
    double direct = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        double denom = 0.0;
        for (std::size_t i = 0; i < 6; ++i) denom += std::exp(z(i, j));
        direct += -std::log(std::exp(z(labels[j], j)) / denom);
    }
    direct /= 4.0;
    EXPECT_NEAR(loss->value(0, 0), direct, 1e-12);
    EXPECT_GE(loss->value(0, 0), 0.0);
}

TEST(Ops, SoftmaxCrossEntropyGradient) {
    Rng rng(5);
    Var z = ad::param(rng.uniform_matrix(5, 3, -1.0, 1.0));
    std::vector<int> labels = {1, 4, 0};
    gzsl::testing::check_gradients([&]() { return ad::softmax_cross_entropy(z, labels); }, {z});
}

TEST(Ops, LabelOutOfRange) {
    Var z = ad::constant(Matrix(3, 2, 0.1));
    EXPECT_THROW(ad::softmax_cross_entropy(z, {0, 3}), DataError);
    EXPECT_THROW(ad::softmax_cross_entropy(z, {-1, 0}), DataError);
}

TEST(Ops, SoftmaxColsRowsSumToOne) {
    Rng rng(6);
    Var a = ad::param(rng.uniform_matrix(5, 4, -3.0, 3.0));
    Var sc = ad::softmax_cols(a);
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 5; ++i) s += sc->value(i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    Var sr = ad::softmax_rows(a);
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) s += sr->value(i, j);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    gzsl::testing::check_gradients([&]() { return ad::sq_frobenius(ad::softmax_cols(a)); }, {a});
}

TEST(Ops, StackAndSliceGradients) {
    Rng rng(7);
    Var a = ad::param(rng.uniform_matrix(2, 3, -1.0, 1.0));
    Var b = ad::param(rng.uniform_matrix(4, 3, -1.0, 1.0));
    auto build = [&]() {
        Var stacked = ad::vstack({a, b});
        Var c0 = ad::col(stacked, 0);
        Var c2 = ad::col(stacked, 2);
        return ad::sq_frobenius(ad::hstack({c0, c2}));
    };
    gzsl::testing::check_gradients(build, {a, b});
}

TEST(Ops, PairwiseSqdistGradient) {
    Rng rng(8);
    Var p = ad::param(rng.uniform_matrix(3, 4, -1.0, 1.0));
    Var m = ad::param(rng.uniform_matrix(5, 3, -1.0, 1.0));
    Var d = ad::pairwise_sqdist(p, m);
    for (std::size_t k = 0; k < 5; ++k)
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < 3; ++t) {
                const double diff = p->value(t, i) - m->value(k, t);
                s += diff * diff;
            }
            EXPECT_NEAR(d->value(k, i), s, 1e-12);
        }
    gzsl::testing::check_gradients(
        [&]() { return ad::mean_all(ad::pairwise_sqdist(p, m)); }, {p, m});
}

TEST(Lstm, ZeroParametersGiveZeroOutput) {
    // All-zero weights and biases: gates are sigmoid(0), candidate tanh(0)=0,
    // so cell and hidden states stay exactly zero.
    nn::LstmCellParams cell;
    Rng rng(9);
    nn::LstmCellParams init(4, 3, rng);
    for (Var p : init.params()) p->value.fill(0.0);
    nn::LstmState state{ad::constant(Matrix(4, 1)), ad::constant(Matrix(4, 1))};
    for (int t = 0; t < 3; ++t) {
        state = nn::lstm_step(init, ad::constant(Matrix(3, 1, 0.7)), state);
        EXPECT_EQ(frobenius_norm(state.h->value), 0.0);
        EXPECT_EQ(frobenius_norm(state.c->value), 0.0);
    }
}

TEST(Lstm, ForgetBiasInitializedToOne) {
    Rng rng(10);
    nn::LstmCellParams cell(4, 3, rng);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(cell.bf->value(i, 0), 1.0);
    EXPECT_EQ(frobenius_norm(cell.bi->value), 0.0);
}

// Independent scalar re-implementation of the LSTM recurrence.
TEST(Lstm, MatchesScalarRecurrenceOracle) {
    Rng rng(11);
    const std::size_t hidden = 3, d_in = 2, len = 4;
    nn::LstmCellParams cell(hidden, d_in, rng);
    std::vector<Matrix> xs;
    for (std::size_t t = 0; t < len; ++t) xs.push_back(rng.uniform_matrix(d_in, 1, -1.0, 1.0));

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    std::vector<double> h(hidden, 0.0), c(hidden, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        std::vector<double> nh(hidden), nc(hidden);
        for (std::size_t u = 0; u < hidden; ++u) {
            auto gate = [&](const Var& w, const Var& r, const Var& b) {
                double s = b->value(u, 0);
                for (std::size_t k = 0; k < d_in; ++k) s += w->value(u, k) * xs[t](k, 0);
                for (std::size_t k = 0; k < hidden; ++k) s += r->value(u, k) * h[k];
                return s;
            };
            const double i = sig(gate(cell.wi, cell.ri, cell.bi));
            const double f = sig(gate(cell.wf, cell.rf, cell.bf));
            const double o = sig(gate(cell.wo, cell.ro, cell.bo));
            const double g = std::tanh(gate(cell.wg, cell.rg, cell.bg));
            nc[u] = i * g + f * c[u];
            nh[u] = o * std::tanh(nc[u]);
        }
        h = nh;
        c = nc;
    }

    nn::LstmState state{ad::constant(Matrix(hidden, 1)), ad::constant(Matrix(hidden, 1))};
    for (std::size_t t = 0; t < len; ++t) state = nn::lstm_step(cell, ad::constant(xs[t]), state);
    for (std::size_t u = 0; u < hidden; ++u) EXPECT_NEAR(state.h->value(u, 0), h[u], 1e-12);
}

TEST(Blstm, SingleFrameSeesSameInputBothWays) {
    Rng rng(12);
    nn::BlstmStack stack(1, 3, 2, rng);
    // Make both directions identical so a single frame yields equal halves.
    auto fp = stack.layers[0].fwd.params();
    auto bp = stack.layers[0].bwd.params();
    for (std::size_t i = 0; i < fp.size(); ++i) bp[i]->value = fp[i]->value;
    Var x = ad::constant(rng.uniform_matrix(2, 1, -1.0, 1.0));
    Var out = nn::blstm_forward(stack, {x});
    ASSERT_EQ(out->value.rows(), 6u);
    ASSERT_EQ(out->value.cols(), 1u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(out->value(i, 0), out->value(3 + i, 0), 1e-14);
}

TEST(Blstm, EmptySequenceRejected) {
    Rng rng(13);
    nn::BlstmStack stack(1, 2, 2, rng);
    EXPECT_THROW(stack.forward({}), DataError);
}

TEST(Blstm, GradientThroughStack) {
    Rng rng(14);
    nn::BlstmStack stack(2, 2, 3, rng);
    std::vector<Var> seq;
    for (int t = 0; t < 3; ++t) seq.push_back(ad::constant(rng.uniform_matrix(3, 1, -1.0, 1.0)));
    auto build = [&]() { return ad::sq_frobenius(nn::blstm_forward(stack, seq)); };
    gzsl::testing::check_gradients(build, stack.params(), 1e-5, 2e-4);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
    Rng rng(15);
    Var p = ad::param(rng.uniform_matrix(3, 3, -1.0, 1.0));
    Matrix before = p->value;
    p->ensure_grad();
    p->grad.fill(0.0);
    std::vector<nn::ParamGroup> groups{{"g", {p}, 1e-2}};
    nn::Adam adam;
    adam.step(groups);
    EXPECT_EQ(frobenius_norm(p->value - before), 0.0);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
    // Bias-corrected first step: lr * g / (|g| + eps) ~= lr * sign(g).
    Var p = ad::param(Matrix(2, 2, 1.0));
    p->ensure_grad();
    p->grad.fill(0.37);
    Matrix before = p->value;
    std::vector<nn::ParamGroup> groups{{"g", {p}, 1e-3}};
    nn::Adam adam;
    adam.step(groups);
    for (std::size_t i = 0; i < p->value.size(); ++i)
        EXPECT_NEAR(before.data()[i] - p->value.data()[i], 1e-3, 1e-7);
}

TEST(Adam, GroupLearningRatesScaleIndependently) {
    Var a = ad::param(Matrix(1, 1, 0.0));
    Var b = ad::param(Matrix(1, 1, 0.0));
    a->ensure_grad();
    b->ensure_grad();
    a->grad.fill(1.0);
    b->grad.fill(1.0);
    std::vector<nn::ParamGroup> groups{{"fast", {a}, 1e-4}, {"slow", {b}, 2e-5}};
    nn::Adam adam;
    adam.step(groups);
    EXPECT_NEAR(-a->value(0, 0) / -b->value(0, 0), 5.0, 1e-9);
}

TEST(Adam, LrZeroIsIdentityOverManySteps) {
    Rng rng(16);
    Var p = ad::param(rng.uniform_matrix(2, 2, -1.0, 1.0));
    Matrix before = p->value;
    std::vector<nn::ParamGroup> groups{{"g", {p}, 0.0}};
    nn::Adam adam;
    for (int i = 0; i < 5; ++i) {
        p->ensure_grad();
        p->grad.fill(rng.uniform(-1.0, 1.0));
        adam.step(groups);
    }
    EXPECT_EQ(frobenius_norm(p->value - before), 0.0);
}

}  // namespace
