#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl {

// Eigendecomposition of a real symmetric matrix: A = V diag(values) V^T,
// eigenvalues ascending, eigenvector columns orthonormal.
struct EigenPair {
    std::vector<double> values;
    Matrix vectors;
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi rotations. Converges when the off-diagonal norm drops below
// 1e-12 relative to max(1, ||A||_F); at most 100 sweeps.
inline EigenPair sym_eig(const Matrix& a) {
    if (a.rows() != a.cols()) throw DataError("sym_eig: matrix is not square");
    const std::size_t n = a.rows();
    const double scale = 1e-9 * (1.0 + max_abs(a));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(a(i, j) - a(j, i)) > scale)
                throw DataError("sym_eig: matrix is not symmetric");

    Matrix w = a;
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (w(i, j) + w(j, i));
            w(i, j) = w(j, i) = m;
        }
    Matrix v = Matrix::identity(n);

    const double tol = 1e-12 * std::max(1.0, frobenius_norm(a));
    bool converged = n < 2 || detail::off_diagonal_norm(w) <= tol;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (apq == 0.0) continue;
                const double tau = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = w(p, p), aqq = w(q, q);
                w(p, p) = app - t * apq;
                w(q, q) = aqq + t * apq;
                w(p, q) = w(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = w(i, p), aiq = w(i, q);
                    w(i, p) = w(p, i) = c * aip - s * aiq;
                    w(i, q) = w(q, i) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        converged = detail::off_diagonal_norm(w) <= tol;
    }
    if (!converged) throw NumericError("sym_eig: Jacobi sweeps did not converge");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return w(i, i) < w(j, j); });

    EigenPair result;
    result.values.resize(n);
    result.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        result.values[k] = w(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) result.vectors(i, k) = v(i, order[k]);
    }
    return result;
}

// Solves A X + X B = C for symmetric A (positive definite) and B (positive
// semidefinite) by diagonalizing both coefficients: with A = Va La Va^T and
// B = Vb Lb Vb^T, the transformed system is diagonal and divides entrywise
// by la_i + lb_j.
inline Matrix solve_sylvester(const Matrix& a_sy, const Matrix& b_sy, const Matrix& c_sy) {
    if (a_sy.rows() != a_sy.cols() || b_sy.rows() != b_sy.cols())
        throw DataError("solve_sylvester: coefficient matrices must be square");
    if (c_sy.rows() != a_sy.rows() || c_sy.cols() != b_sy.rows())
        throw DataError("solve_sylvester: right-hand side has mismatched shape");

    const EigenPair ea = sym_eig(a_sy);
    const EigenPair eb = sym_eig(b_sy);

    Matrix ct = matmul_tn(ea.vectors, matmul(c_sy, eb.vectors));
    for (std::size_t i = 0; i < ct.rows(); ++i) {
        for (std::size_t j = 0; j < ct.cols(); ++j) {
            const double denom = ea.values[i] + eb.values[j];
            if (denom <= 1e-12)
                throw NumericError("solve_sylvester: singular pencil (eigenvalue sum <= 1e-12)");
            ct(i, j) /= denom;
        }
    }
    return matmul_nt(matmul(ea.vectors, ct), eb.vectors);
}

}  // namespace gzsl
