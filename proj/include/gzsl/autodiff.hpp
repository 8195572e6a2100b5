#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl::ad {

class Node;
using Var = std::shared_ptr<Node>;

// One entry of the reverse-mode tape: a value, its gradient buffer and the
// closure that scatters the gradient back into the parents.
class Node {
public:
    Node(Matrix v, bool requires_grad) : value(std::move(v)), requires_grad(requires_grad) {}

    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backprop;

    void ensure_grad() {
        if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    }
};

inline Var constant(Matrix v) { return std::make_shared<Node>(std::move(v), false); }

inline Var param(Matrix v) { return std::make_shared<Node>(std::move(v), true); }

inline Var scalar(double v) { return constant(Matrix(1, 1, v)); }

namespace detail {

inline Var make_op(Matrix value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->requires_grad;
    auto node = std::make_shared<Node>(std::move(value), needs);
    if (needs) {
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
    }
    return node;
}

inline void accumulate(const Var& target, const Matrix& delta) {
    if (!target->requires_grad) return;
    target->ensure_grad();
    target->grad += delta;
}

}  // namespace detail

inline Var matmul(Var a, Var b) {
    Matrix v = gzsl::matmul(a->value, b->value);
    return detail::make_op(std::move(v), {a, b}, [a, b](Node& out) {
        if (a->requires_grad) detail::accumulate(a, matmul_nt(out.grad, b->value));
        if (b->requires_grad) detail::accumulate(b, matmul_tn(a->value, out.grad));
    });
}

inline Var add(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw DataError("ad::add: shape mismatch");
    return detail::make_op(a->value + b->value, {a, b}, [a, b](Node& out) {
        detail::accumulate(a, out.grad);
        detail::accumulate(b, out.grad);
    });
}

// a (m x n) plus a column bias (m x 1) broadcast over the columns.
inline Var add_bias(Var a, Var bias) {
    if (bias->value.cols() != 1 || bias->value.rows() != a->value.rows())
        throw DataError("ad::add_bias: bias must be a column matching a's rows");
    Matrix v = a->value;
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) += bias->value(i, 0);
    return detail::make_op(std::move(v), {a, bias}, [a, bias](Node& out) {
        detail::accumulate(a, out.grad);
        if (bias->requires_grad) {
            Matrix db(bias->value.rows(), 1);
            for (std::size_t i = 0; i < out.grad.rows(); ++i)
                for (std::size_t j = 0; j < out.grad.cols(); ++j) db(i, 0) += out.grad(i, j);
            detail::accumulate(bias, db);
        }
    });
}

inline Var sub(Var a, Var b) {
    if (!a->value.same_shape(b->value)) throw DataError("ad::sub: shape mismatch");
    return detail::make_op(a->value - b->value, {a, b}, [a, b](Node& out) {
        detail::accumulate(a, out.grad);
        if (b->requires_grad) detail::accumulate(b, -1.0 * out.grad);
    });
}

inline Var scale(Var a, double s) {
    return detail::make_op(a->value * s, {a}, [a, s](Node& out) {
        detail::accumulate(a, out.grad * s);
    });
}

inline Var hadamard(Var a, Var b) {
    return detail::make_op(gzsl::hadamard(a->value, b->value), {a, b}, [a, b](Node& out) {
        if (a->requires_grad) detail::accumulate(a, gzsl::hadamard(out.grad, b->value));
        if (b->requires_grad) detail::accumulate(b, gzsl::hadamard(out.grad, a->value));
    });
}

inline Var transpose(Var a) {
    return detail::make_op(gzsl::transpose(a->value), {a}, [a](Node& out) {
        detail::accumulate(a, gzsl::transpose(out.grad));
    });
}

inline Var relu(Var a) {
    Matrix v = a->value;
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = std::max(0.0, v.data()[i]);
    return detail::make_op(std::move(v), {a}, [a](Node& out) {
        Matrix d = out.grad;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (a->value.data()[i] <= 0.0) d.data()[i] = 0.0;
        detail::accumulate(a, d);
    });
}

inline Var tanh(Var a) {
    Matrix v = a->value;
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = std::tanh(v.data()[i]);
    Matrix y = v;
    return detail::make_op(std::move(v), {a}, [a, y = std::move(y)](Node& out) {
        Matrix d = out.grad;
        for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] *= 1.0 - y.data()[i] * y.data()[i];
        detail::accumulate(a, d);
    });
}

inline Var sigmoid(Var a) {
    Matrix v = a->value;
    for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] = 1.0 / (1.0 + std::exp(-v.data()[i]));
    Matrix y = v;
    return detail::make_op(std::move(v), {a}, [a, y = std::move(y)](Node& out) {
        Matrix d = out.grad;
        for (std::size_t i = 0; i < d.size(); ++i)
            d.data()[i] *= y.data()[i] * (1.0 - y.data()[i]);
        detail::accumulate(a, d);
    });
}

namespace detail {

inline Matrix softmax_columns(const Matrix& a) {
    Matrix y = a;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double mx = a(0, j);
        for (std::size_t i = 1; i < a.rows(); ++i) mx = std::max(mx, a(i, j));
        double z = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) z += (y(i, j) = std::exp(a(i, j) - mx));
        for (std::size_t i = 0; i < a.rows(); ++i) y(i, j) /= z;
    }
    return y;
}

}  // namespace detail

// Softmax over the rows of each column: every column sums to one.
inline Var softmax_cols(Var a) {
    Matrix y = detail::softmax_columns(a->value);
    Matrix yc = y;
    return detail::make_op(std::move(y), {a}, [a, yc = std::move(yc)](Node& out) {
        Matrix d(yc.rows(), yc.cols());
        for (std::size_t j = 0; j < yc.cols(); ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < yc.rows(); ++i) dot += out.grad(i, j) * yc(i, j);
            for (std::size_t i = 0; i < yc.rows(); ++i)
                d(i, j) = yc(i, j) * (out.grad(i, j) - dot);
        }
        detail::accumulate(a, d);
    });
}

// Softmax along each row: every row sums to one.
inline Var softmax_rows(Var a) { return transpose(softmax_cols(transpose(a))); }

inline Var vstack(const std::vector<Var>& parts) {
    if (parts.empty()) throw DataError("ad::vstack: no parts");
    std::size_t rows = 0;
    const std::size_t cols = parts.front()->value.cols();
    for (const auto& p : parts) {
        if (p->value.cols() != cols) throw DataError("ad::vstack: column mismatch");
        rows += p->value.rows();
    }
    Matrix v(rows, cols);
    std::size_t r0 = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p->value.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) v(r0 + i, j) = p->value(i, j);
        r0 += p->value.rows();
    }
    return detail::make_op(std::move(v), parts, [parts](Node& out) {
        std::size_t r0 = 0;
        for (const auto& p : parts) {
            if (p->requires_grad) {
                Matrix d(p->value.rows(), p->value.cols());
                for (std::size_t i = 0; i < d.rows(); ++i)
                    for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = out.grad(r0 + i, j);
                detail::accumulate(p, d);
            }
            r0 += p->value.rows();
        }
    });
}

inline Var hstack(const std::vector<Var>& parts) {
    if (parts.empty()) throw DataError("ad::hstack: no parts");
    std::size_t cols = 0;
    const std::size_t rows = parts.front()->value.rows();
    for (const auto& p : parts) {
        if (p->value.rows() != rows) throw DataError("ad::hstack: row mismatch");
        cols += p->value.cols();
    }
    Matrix v(rows, cols);
    std::size_t c0 = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < p->value.cols(); ++j) v(i, c0 + j) = p->value(i, j);
        c0 += p->value.cols();
    }
    return detail::make_op(std::move(v), parts, [parts](Node& out) {
        std::size_t c0 = 0;
        for (const auto& p : parts) {
            if (p->requires_grad) {
                Matrix d(p->value.rows(), p->value.cols());
                for (std::size_t i = 0; i < d.rows(); ++i)
                    for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = out.grad(i, c0 + j);
                detail::accumulate(p, d);
            }
            c0 += p->value.cols();
        }
    });
}

inline Var col(Var a, std::size_t j) {
    if (j >= a->value.cols()) throw DataError("ad::col: column index out of range");
    Matrix v(a->value.rows(), 1);
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, 0) = a->value(i, j);
    return detail::make_op(std::move(v), {a}, [a, j](Node& out) {
        if (!a->requires_grad) return;
        Matrix d(a->value.rows(), a->value.cols());
        for (std::size_t i = 0; i < d.rows(); ++i) d(i, j) = out.grad(i, 0);
        detail::accumulate(a, d);
    });
}

inline Var sum_all(Var a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i) s += a->value.data()[i];
    return detail::make_op(Matrix(1, 1, s), {a}, [a](Node& out) {
        Matrix d(a->value.rows(), a->value.cols(), out.grad(0, 0));
        detail::accumulate(a, d);
    });
}

// Squared Frobenius norm as a 1x1 scalar.
inline Var sq_frobenius(Var a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a->value.size(); ++i)
        s += a->value.data()[i] * a->value.data()[i];
    return detail::make_op(Matrix(1, 1, s), {a}, [a](Node& out) {
        detail::accumulate(a, (2.0 * out.grad(0, 0)) * a->value);
    });
}

inline Var mean_all(Var a) { return scale(sum_all(a), 1.0 / static_cast<double>(a->value.size())); }

// Mean negative log softmax probability of the labelled row, per column;
// max-shifted for stability.
inline Var softmax_cross_entropy(Var logits, const std::vector<int>& labels) {
    const Matrix& z = logits->value;
    if (labels.size() != z.cols())
        throw DataError("softmax_cross_entropy: one label per column required");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= z.rows())
            throw DataError("softmax_cross_entropy: label out of range");

    Matrix probs = detail::softmax_columns(z);
    const double inv_n = 1.0 / static_cast<double>(z.cols());
    double loss = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
        double mx = z(0, j);
        for (std::size_t i = 1; i < z.rows(); ++i) mx = std::max(mx, z(i, j));
        double lse = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) lse += std::exp(z(i, j) - mx);
        loss += mx + std::log(lse) - z(labels[j], j);
    }
    loss *= inv_n;

    return detail::make_op(Matrix(1, 1, loss), {logits},
                           [logits, labels, probs = std::move(probs), inv_n](Node& out) {
                               const double g = out.grad(0, 0) * inv_n;
                               Matrix d = probs;
                               for (std::size_t j = 0; j < d.cols(); ++j) d(labels[j], j) -= 1.0;
                               detail::accumulate(logits, g * d);
                           });
}

// D[k][i] = ||p_i - m_k||^2 for projections P (d x n) and prototypes M (C x d).
inline Var pairwise_sqdist(Var p, Var m) {
    const Matrix& pv = p->value;
    const Matrix& mv = m->value;
    if (pv.rows() != mv.cols()) throw DataError("pairwise_sqdist: dimension mismatch");
    Matrix d(mv.rows(), pv.cols());
    for (std::size_t k = 0; k < mv.rows(); ++k)
        for (std::size_t i = 0; i < pv.cols(); ++i) {
            double s = 0.0;
            for (std::size_t t = 0; t < pv.rows(); ++t) {
                const double diff = pv(t, i) - mv(k, t);
                s += diff * diff;
            }
            d(k, i) = s;
        }
    return detail::make_op(std::move(d), {p, m}, [p, m](Node& out) {
        const Matrix& pv = p->value;
        const Matrix& mv = m->value;
        Matrix dp(pv.rows(), pv.cols());
        Matrix dm(mv.rows(), mv.cols());
        for (std::size_t k = 0; k < mv.rows(); ++k)
            for (std::size_t i = 0; i < pv.cols(); ++i) {
                const double g = out.grad(k, i);
                if (g == 0.0) continue;
                for (std::size_t t = 0; t < pv.rows(); ++t) {
                    const double diff = pv(t, i) - mv(k, t);
                    dp(t, i) += 2.0 * g * diff;
                    dm(k, t) -= 2.0 * g * diff;
                }
            }
        if (p->requires_grad) detail::accumulate(p, dp);
        if (m->requires_grad) detail::accumulate(m, dm);
    });
}

// (1/n) sum_i D[labels[i]][i].
inline Var pick_mean(Var d, const std::vector<int>& labels) {
    const Matrix& dv = d->value;
    if (labels.size() != dv.cols()) throw DataError("pick_mean: one label per column required");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= dv.rows())
            throw DataError("pick_mean: label out of range");
    const double inv_n = 1.0 / static_cast<double>(dv.cols());
    double s = 0.0;
    for (std::size_t i = 0; i < dv.cols(); ++i) s += dv(labels[i], i);
    return detail::make_op(Matrix(1, 1, s * inv_n), {d}, [d, labels, inv_n](Node& out) {
        Matrix dd(d->value.rows(), d->value.cols());
        const double g = out.grad(0, 0) * inv_n;
        for (std::size_t i = 0; i < dd.cols(); ++i) dd(labels[i], i) += g;
        detail::accumulate(d, dd);
    });
}

// Mean hinge on the margin between each sample's nearest-prototype distance
// and that prototype's threshold: (1/n) sum_i max(0, min_k D[k][i] - th[k*]).
// Distance ties pick the lowest k; the hinge subgradient at zero is zero.
inline Var threshold_hinge(Var d, Var th) {
    const Matrix& dv = d->value;
    const Matrix& tv = th->value;
    if (tv.cols() != 1 || tv.rows() != dv.rows())
        throw DataError("threshold_hinge: thresholds must be a column matching D's rows");
    const std::size_t n = dv.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<std::size_t> nearest(n);
    std::vector<bool> active(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < dv.rows(); ++k)
            if (dv(k, i) < dv(best, i)) best = k;
        nearest[i] = best;
        const double margin = dv(best, i) - tv(best, 0);
        active[i] = margin > 0.0;
        if (active[i]) loss += margin;
    }
    return detail::make_op(Matrix(1, 1, loss * inv_n), {d, th},
                           [d, th, nearest, active, inv_n](Node& out) {
                               const double g = out.grad(0, 0) * inv_n;
                               Matrix dd(d->value.rows(), d->value.cols());
                               Matrix dt(th->value.rows(), 1);
                               for (std::size_t i = 0; i < nearest.size(); ++i) {
                                   if (!active[i]) continue;
                                   dd(nearest[i], i) += g;
                                   dt(nearest[i], 0) -= g;
                               }
                               if (d->requires_grad) detail::accumulate(d, dd);
                               if (th->requires_grad) detail::accumulate(th, dt);
                           });
}

namespace detail {

inline void topo_order(const Var& root, std::vector<Node*>& order) {
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second)
                stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace detail

// Reverse-mode sweep from a scalar loss. Gradients of every node reachable
// from the loss are zeroed first, then accumulated in reverse topological
// order; each node's backprop runs exactly once.
inline void backward(const Var& loss) {
    if (loss->value.rows() != 1 || loss->value.cols() != 1)
        throw DataError("ad::backward: loss must be a 1x1 scalar");
    std::vector<Node*> order;
    detail::topo_order(loss, order);
    for (Node* n : order) {
        n->ensure_grad();
        n->grad.fill(0.0);
    }
    loss->ensure_grad();
    loss->grad(0, 0) = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

}  // namespace gzsl::ad
