#include <gtest/gtest.h>

#include <cmath>

#include "gzsl/graph.hpp"
#include "gzsl/linalg.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/rng.hpp"

namespace {

using namespace gzsl;

Matrix random_symmetric(std::size_t n, Rng& rng) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.uniform(-1.0, 1.0);
    return a;
}

Matrix random_spd(std::size_t n, Rng& rng) {
    Matrix b = rng.uniform_matrix(n, n, -1.0, 1.0);
    Matrix a = matmul_tn(b, b);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 0.5;
    return a;
}

// Brute-force determinant by cofactor expansion, for n <= 4.
double det_minor_expansion(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 1) return a(0, 0);
    double det = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Matrix minor(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t cc = 0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == j) continue;
                minor(r - 1, cc++) = a(r, c);
            }
        }
        det += (j % 2 ? -1.0 : 1.0) * a(0, j) * det_minor_expansion(minor);
    }
    return det;
}

TEST(Matrix, MatmulAgainstTripleLoop) {
    Rng rng(7);
    Matrix a = rng.uniform_matrix(4, 6, -2.0, 2.0);
    Matrix b = rng.uniform_matrix(6, 3, -2.0, 2.0);
    Matrix c = matmul(a, b);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * b(k, j);
            EXPECT_NEAR(c(i, j), s, 1e-12);
        }
    Matrix cnt = matmul_nt(a, transpose(b));
    Matrix ctn = matmul_tn(transpose(a), b);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_NEAR(cnt(i, j), c(i, j), 1e-12);
            EXPECT_NEAR(ctn(i, j), c(i, j), 1e-12);
        }
}

TEST(SymEig, Identity) {
    EigenPair e = sym_eig(Matrix::identity(3));
    for (double v : e.values) EXPECT_NEAR(v, 1.0, 1e-12);
    Matrix vtv = matmul_tn(e.vectors, e.vectors);
    EXPECT_LE(frobenius_norm(vtv - Matrix::identity(3)), 1e-8);
}

TEST(SymEig, TwoByTwoHandComputed) {
    // Characteristic polynomial of [[2,1],[1,2]]: (2-l)^2 - 1 = 0 -> l = 1, 3.
    EigenPair e = sym_eig(Matrix{{2, 1}, {1, 2}});
    ASSERT_EQ(e.values.size(), 2u);
    EXPECT_NEAR(e.values[0], 1.0, 1e-10);
    EXPECT_NEAR(e.values[1], 3.0, 1e-10);
}

TEST(SymEig, ReconstructionAndOrthonormality) {
    Rng rng(42);
    Matrix a = random_symmetric(8, rng);
    EigenPair e = sym_eig(a);
    for (std::size_t k = 1; k < e.values.size(); ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
    Matrix lam(8, 8);
    for (std::size_t i = 0; i < 8; ++i) lam(i, i) = e.values[i];
    Matrix recon = matmul_nt(matmul(e.vectors, lam), e.vectors);
    EXPECT_LE(frobenius_norm(recon - a), 1e-8 * (1.0 + frobenius_norm(a)));
    Matrix vtv = matmul_tn(e.vectors, e.vectors);
    EXPECT_LE(frobenius_norm(vtv - Matrix::identity(8)), 1e-8);
}

TEST(SymEig, TraceAndDeterminantIdentities) {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rng.below(3);  // n in [2, 4]
        Matrix a = random_symmetric(n, rng);
        EigenPair e = sym_eig(a);
        double sum = 0.0, prod = 1.0;
        for (double v : e.values) {
            sum += v;
            prod *= v;
        }
        EXPECT_NEAR(sum, trace(a), 1e-9 * (1.0 + std::abs(trace(a))));
        const double det = det_minor_expansion(a);
        EXPECT_NEAR(prod, det, 1e-8 * (1.0 + std::abs(det)));
    }
}

TEST(SymEig, RejectsBadInput) {
    EXPECT_THROW(sym_eig(Matrix(2, 3)), DataError);
    EXPECT_THROW(sym_eig(Matrix{{1, 2}, {0, 1}}), DataError);
}

TEST(Sylvester, ZeroBReducesToLinearSolve) {
    Rng rng(11);
    Matrix a = random_spd(4, rng);
    Matrix c = rng.uniform_matrix(4, 3, -1.0, 1.0);
    Matrix x = solve_sylvester(a, Matrix(3, 3), c);
    EXPECT_LE(frobenius_norm(matmul(a, x) - c), 1e-9 * (1.0 + frobenius_norm(c)));
}

TEST(Sylvester, IdentityCoefficientsHalveC) {
    Rng rng(12);
    Matrix c = rng.uniform_matrix(3, 5, -1.0, 1.0);
    Matrix x = solve_sylvester(Matrix::identity(3), Matrix::identity(5), c);
    EXPECT_LE(frobenius_norm(x - 0.5 * c), 1e-10);
}

TEST(Sylvester, ResidualOnRandomInstance) {
    Rng rng(13);
    Matrix a = random_spd(5, rng);
    Matrix bmat = rng.uniform_matrix(7, 9, -1.0, 1.0);
    Matrix b = matmul_nt(bmat, bmat);  // PSD
    Matrix c = rng.uniform_matrix(5, 7, -1.0, 1.0);
    Matrix x = solve_sylvester(a, b, c);
    const double resid = frobenius_norm(matmul(a, x) + matmul(x, b) - c);
    EXPECT_LE(resid, 1e-8 * (1.0 + frobenius_norm(c)));
}

TEST(Sylvester, ResidualProperty) {
    Rng rng(14);
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t m = 1 + rng.below(20);
        const std::size_t n = 1 + rng.below(20);
        Matrix a = random_spd(m, rng);
        Matrix bmat = rng.uniform_matrix(n, n + 2, -1.0, 1.0);
        Matrix b = matmul_nt(bmat, bmat);
        Matrix c = rng.uniform_matrix(m, n, -2.0, 2.0);
        Matrix x = solve_sylvester(a, b, c);
        const double resid = frobenius_norm(matmul(a, x) + matmul(x, b) - c);
        EXPECT_LE(resid, 1e-8 * (1.0 + frobenius_norm(c)));
    }
}

TEST(Sylvester, SingularPencilDetected) {
    // A has eigenvalue 0 and B = 0, so some denominator is <= 1e-12.
    Matrix a{{1, 1}, {1, 1}};
    EXPECT_THROW(solve_sylvester(a, Matrix(2, 2), Matrix(2, 2, 1.0)), NumericError);
}

TEST(Sylvester, DimensionMismatch) {
    EXPECT_THROW(solve_sylvester(Matrix::identity(2), Matrix::identity(3), Matrix(3, 3)),
                 DataError);
}

TEST(KnnGraph, IdenticalVectorsFullWeight) {
    Matrix h(3, 2);
    h(0, 0) = h(0, 1) = 1.0;
    h(1, 0) = h(1, 1) = 2.0;
    h(2, 0) = h(2, 1) = 0.5;
    SimilarityGraph g = knn_cosine_graph(h, 1, GraphAxis::instances);
    EXPECT_NEAR(g.weights(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(g.weights(1, 0), 1.0, 1e-12);
    EXPECT_EQ(g.weights(0, 0), 0.0);
    EXPECT_EQ(g.weights(1, 1), 0.0);
}

TEST(KnnGraph, OrthogonalVectorsZeroWeight) {
    Matrix h{{1, 0}, {0, 1}};  // columns [1,0] and [0,1]
    SimilarityGraph g = knn_cosine_graph(h, 1, GraphAxis::instances);
    EXPECT_NEAR(g.weights(0, 1), 0.0, 1e-12);
    EXPECT_NEAR(g.weights(1, 0), 0.0, 1e-12);
}

TEST(KnnGraph, MatchesBruteForceOracle) {
    Rng rng(21);
    const std::size_t n = 6, d = 4, k = 2;
    Matrix h = rng.uniform_matrix(d, n, -1.0, 1.0);

    // Independent oracle: exhaustive cosine ranking per vertex.
    auto cosine = [&](std::size_t a, std::size_t b) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < d; ++i) {
            dot += h(i, a) * h(i, b);
            na += h(i, a) * h(i, a);
            nb += h(i, b) * h(i, b);
        }
        return dot / std::sqrt(na * nb);
    };
    std::vector<std::vector<bool>> top(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<std::size_t> others;
        for (std::size_t b = 0; b < n; ++b)
            if (b != a) others.push_back(b);
        std::sort(others.begin(), others.end(), [&](std::size_t x, std::size_t y) {
            if (cosine(a, x) != cosine(a, y)) return cosine(a, x) > cosine(a, y);
            return x < y;
        });
        for (std::size_t j = 0; j < k; ++j) top[a][others[j]] = true;
    }

    SimilarityGraph g = knn_cosine_graph(h, k, GraphAxis::instances);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double expected = (a != b && (top[a][b] || top[b][a])) ? cosine(a, b) : 0.0;
            EXPECT_NEAR(g.weights(a, b), expected, 1e-12);
        }
}

TEST(KnnGraph, SymmetricByConstruction) {
    Rng rng(22);
    Matrix h = rng.uniform_matrix(5, 9, -1.0, 1.0);
    SimilarityGraph g = knn_cosine_graph(h, 3, GraphAxis::instances);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(g.weights(i, j), g.weights(j, i));
}

TEST(KnnGraph, FeatureAxisUsesRows) {
    Matrix h(2, 3);
    h(0, 0) = 1.0; h(0, 1) = 2.0; h(0, 2) = 3.0;
    h(1, 0) = 2.0; h(1, 1) = 4.0; h(1, 2) = 6.0;  // parallel rows
    SimilarityGraph g = knn_cosine_graph(h, 1, GraphAxis::features);
    EXPECT_NEAR(g.weights(0, 1), 1.0, 1e-12);
}

TEST(KnnGraph, Errors) {
    Matrix h(3, 4);
    EXPECT_THROW(knn_cosine_graph(h, 1, GraphAxis::instances), DataError);  // zero vectors
    Rng rng(23);
    Matrix ok = rng.uniform_matrix(3, 4, 0.1, 1.0);
    EXPECT_THROW(knn_cosine_graph(ok, 4, GraphAxis::instances), DataError);  // k too large
    EXPECT_THROW(knn_cosine_graph(ok, 0, GraphAxis::instances), DataError);
}

TEST(Laplacian, TwoNodeGraph) {
    SimilarityGraph g;
    g.weights = Matrix{{0, 1}, {1, 0}};
    g.neighbor_count = 1;
    Matrix l = graph_laplacian(g);
    EXPECT_EQ(l(0, 0), 1.0);
    EXPECT_EQ(l(0, 1), -1.0);
    EXPECT_EQ(l(1, 0), -1.0);
    EXPECT_EQ(l(1, 1), 1.0);
}

TEST(Laplacian, ZeroGraph) {
    SimilarityGraph g;
    g.weights = Matrix(4, 4);
    Matrix l = graph_laplacian(g);
    EXPECT_EQ(frobenius_norm(l), 0.0);
}

TEST(Laplacian, QuadraticFormIdentity) {
    Rng rng(31);
    // Positive-orthant vectors give nonnegative cosine weights.
    Matrix h = rng.uniform_matrix(5, 8, 0.05, 1.0);
    SimilarityGraph g = knn_cosine_graph(h, 3, GraphAxis::instances);
    Matrix l = graph_laplacian(g);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix x = rng.uniform_matrix(8, 1, -1.0, 1.0);
        const double quad = matmul_tn(x, matmul(l, x))(0, 0);
        double direct = 0.0;
        for (std::size_t a = 0; a < 8; ++a)
            for (std::size_t b = 0; b < 8; ++b)
                direct += 0.5 * g.weights(a, b) * (x(a, 0) - x(b, 0)) * (x(a, 0) - x(b, 0));
        EXPECT_NEAR(quad, direct, 1e-10);
    }
}

TEST(Laplacian, PositiveSemidefiniteOnNonnegativeGraphs) {
    Rng rng(32);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix h = rng.uniform_matrix(6, 10, 0.05, 1.0);
        Matrix l = graph_laplacian(knn_cosine_graph(h, 3, GraphAxis::instances));
        EigenPair e = sym_eig(l);
        EXPECT_GE(e.values.front(), -1e-10);
        double row_sum_max = 0.0;
        for (std::size_t i = 0; i < l.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < l.cols(); ++j) s += l(i, j);
            row_sum_max = std::max(row_sum_max, std::abs(s));
        }
        EXPECT_LE(row_sum_max, 1e-12);
    }
}

// Negative cosines are allowed by construction; the solver must still be
// usable for the scaled Laplacians the inference step produces.
TEST(Laplacian, NegativeWeightSensitivity) {
    Rng rng(33);
    Matrix h = rng.uniform_matrix(4, 8, -1.0, 1.0);
    Matrix l = graph_laplacian(knn_cosine_graph(h, 3, GraphAxis::instances));
    Matrix a = random_spd(3, rng);
    Matrix c = rng.uniform_matrix(3, 8, -1.0, 1.0);
    Matrix x = solve_sylvester(a, 1e-4 * l, c);
    const double resid = frobenius_norm(matmul(a, x) + matmul(x, 1e-4 * l) - c);
    EXPECT_LE(resid, 1e-8 * (1.0 + frobenius_norm(c)));
}

}  // namespace
