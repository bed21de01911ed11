#include "wqf/condexp.hpp"

#include <cmath>

#include "wqf/errors.hpp"

namespace wqf {

Covariance covariance(const MatrixFunction& alpha, std::size_t t_index) {
    if (t_index < 1 || t_index >= alpha.grid().nodes())
        fail(ErrorCode::spec_error, "covariance: t_index must be a grid node >= 1");
    const std::size_t d = alpha.dim();
    const Mat& a_t = alpha.at(t_index);

    Covariance out;
    out.t_index = t_index;
    out.t = alpha.grid().node(t_index);
    out.matrix = Mat(d);
    const double half_dt = 0.5 * alpha.grid().dt();
    Mat prev_term(d);
    for (std::size_t s = 0; s <= t_index; ++s) {
        const Mat m = a_t * inverse(alpha.at(s));
        const Mat term = m * transpose(m);
        if (s > 0)
            out.matrix += half_dt * (prev_term + term);
        prev_term = term;
    }
    auto chol = cholesky_lower(out.matrix);
    if (!chol)
        fail(ErrorCode::not_positive_definite, "covariance: v_t is not positive definite");
    out.chol_lower = std::move(*chol);
    return out;
}

double cond_exp(double prefactor, const Covariance& v, const Vec& x) {
    const std::size_t d = v.matrix.dim();
    if (x.size() != d)
        fail(ErrorCode::spec_error, "cond_exp: x has wrong dimension");
    if (!(v.t > 0.0))
        fail(ErrorCode::spec_error, "cond_exp: need t > 0");

    double log_det_v = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        log_det_v += 2.0 * std::log(v.chol_lower(i, i));
    const Vec vinv_x = cholesky_solve(v.chol_lower, x);
    const double quad_v = dot(vinv_x, x);

    // prefactor * g_v(x) * sqrt(2 pi t)^d * e^{|x|^2/(2t)}, assembled in logs.
    const double dd = static_cast<double>(d);
    const double log_val = std::log(prefactor) - 0.5 * quad_v - 0.5 * log_det_v -
                           0.5 * dd * std::log(2.0 * M_PI) + 0.5 * dd * std::log(2.0 * M_PI * v.t) +
                           norm_sq(x) / (2.0 * v.t);
    return std::exp(log_val);
}

} // namespace wqf
