#pragma once

#include "wqf/matrix_function.hpp"

namespace wqf {

// v_t(alpha) = integral over [0, t] of (alpha(t) alpha(s)^{-1})(alpha(t) alpha(s)^{-1})^T ds.
// Symmetric positive definite; the Cholesky factor is kept for density evaluation.
struct Covariance {
    std::size_t t_index = 0;
    double t = 0.0;
    Mat matrix;
    Mat chol_lower;
};

Covariance covariance(const MatrixFunction& alpha, std::size_t t_index);

// E[e^{p_sigma} | theta(t) = x] = prefactor * g_v(x) * sqrt(2 pi t)^d * e^{|x|^2 / (2t)},
// with g_v the centered Gaussian density of covariance v and
// prefactor = e^{int tr(chi - sigma) / 2}.
double cond_exp(double prefactor, const Covariance& v, const Vec& x);

} // namespace wqf
