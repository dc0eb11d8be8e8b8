#pragma once

#include <functional>

#include "nhnn/common.hpp"

namespace nhnn {

// Central-difference gradient of a scalar-valued function, f64 only. This is
// the independent oracle used by the gradient-check suites; it never touches
// the tape.
inline MatD finite_difference_gradient(const std::function<double(const MatD&)>& f, MatD x,
                                       double h = 1e-5) {
    MatD grad(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double orig = x(i, j);
            x(i, j) = orig + h;
            const double fp = f(x);
            x(i, j) = orig - h;
            const double fm = f(x);
            x(i, j) = orig;
            grad(i, j) = (fp - fm) / (2.0 * h);
        }
    }
    return grad;
}

// Max relative error between two gradients, with an absolute floor so that
// near-zero entries compare absolutely.
inline double max_relative_error(const MatD& a, const MatD& b, double floor = 1e-6) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), floor});
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
        }
    return worst;
}

}  // namespace nhnn
