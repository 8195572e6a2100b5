#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gzsl/autodiff.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl::testing {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / (std::max(std::abs(a), std::abs(b)) + 1e-8);
}

// Central finite-difference check of a scalar loss against the analytic
// gradients from backward(). build_loss must rebuild the graph from the
// current parameter values on every call.
inline void check_gradients(const std::function<ad::Var()>& build_loss,
                            const std::vector<ad::Var>& params, double eps = 1e-5,
                            double tol = 1e-4) {
    ad::Var loss = build_loss();
    ad::backward(loss);
    std::vector<Matrix> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        p->ensure_grad();
        analytic.push_back(p->grad);
    }
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Matrix& value = params[pi]->value;
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value.data()[i];
            value.data()[i] = saved + eps;
            const double up = build_loss()->value(0, 0);
            value.data()[i] = saved - eps;
            const double down = build_loss()->value(0, 0);
            value.data()[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double an = analytic[pi].data()[i];
            if (std::abs(fd) < 1e-7 && std::abs(an) < 1e-7) continue;
            EXPECT_LE(rel_err(an, fd), tol)
                << "param " << pi << " entry " << i << ": analytic " << an << " vs fd " << fd;
        }
    }
}

}  // namespace gzsl::testing
