#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl {

enum class GraphAxis { instances, features };

// Symmetric cosine similarity graph over the top-k neighborhoods; zero
// diagonal, entries in [-1, 1].
struct SimilarityGraph {
    Matrix weights;
    std::size_t neighbor_count = 0;
};

// Builds the mutual/inclusive top-k cosine graph: W[a][b] = cos(v_a, v_b)
// iff b is among a's top-k neighbors or a is among b's. Vertices are the
// columns of h (instances) or its rows (feature dimensions). Cosine ties
// break toward the lower vertex index.
inline SimilarityGraph knn_cosine_graph(const Matrix& h, std::size_t k, GraphAxis axis) {
    const std::size_t n = axis == GraphAxis::instances ? h.cols() : h.rows();
    const std::size_t dim = axis == GraphAxis::instances ? h.rows() : h.cols();
    if (k < 1 || k >= n) throw DataError("knn_cosine_graph: k must satisfy 1 <= k < vertex count");

    auto at = [&](std::size_t vertex, std::size_t i) {
        return axis == GraphAxis::instances ? h(i, vertex) : h(vertex, i);
    };

    std::vector<double> norms(n);
    for (std::size_t a = 0; a < n; ++a) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += at(a, i) * at(a, i);
        if (s == 0.0) throw DataError("knn_cosine_graph: zero vertex vector, cosine undefined");
        norms[a] = std::sqrt(s);
    }

    Matrix cos(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dot += at(a, i) * at(b, i);
            cos(a, b) = cos(b, a) = dot / (norms[a] * norms[b]);
        }
    }

    std::vector<std::vector<bool>> chosen(n, std::vector<bool>(n, false));
    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < n; ++a) {
        order.resize(0);
        for (std::size_t b = 0; b < n; ++b)
            if (b != a) order.push_back(b);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (cos(a, x) != cos(a, y)) return cos(a, x) > cos(a, y);
            return x < y;
        });
        for (std::size_t j = 0; j < k; ++j) chosen[a][order[j]] = true;
    }

    SimilarityGraph g;
    g.neighbor_count = k;
    g.weights = Matrix(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (chosen[a][b] || chosen[b][a]) g.weights(a, b) = g.weights(b, a) = cos(a, b);
    return g;
}

// L = Q - W with Q = diag(row sums of W). Row sums of L are zero.
inline Matrix graph_laplacian(const SimilarityGraph& g) {
    const Matrix& w = g.weights;
    if (w.rows() != w.cols()) throw DataError("graph_laplacian: weights must be square");
    Matrix l(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) {
            degree += w(i, j);
            l(i, j) = -w(i, j);
        }
        l(i, i) += degree;
    }
    return l;
}

}  // namespace gzsl
