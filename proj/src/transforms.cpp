#include "wqf/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "wqf/errors.hpp"
#include "wqf/ode.hpp"

namespace wqf {

WienerPath forward_transform(const MatrixFunction& chi, const WienerPath& w) {
    require_same_grid(chi.grid(), w.grid(), "forward_transform");
    if (chi.dim() != w.dim())
        fail(ErrorCode::grid_mismatch, "forward_transform: dimension mismatch");
    const TimeGrid& grid = w.grid();
    const std::size_t n = grid.steps;
    const std::size_t d = w.dim();
    const double half_dt = 0.5 * grid.dt();

    WienerPath out(grid, d);
    Vec cum(d, 0.0);
    Vec prev = mat_vec(chi.at(0), w.at(0));
    for (std::size_t i = 1; i <= n; ++i) {
        Vec cur = mat_vec(chi.at(i), w.at(i));
        for (std::size_t c = 0; c < d; ++c) {
            cum[c] += half_dt * (prev[c] + cur[c]);
            out.value(i, c) = w.value(i, c) - cum[c];
        }
        prev = std::move(cur);
    }
    return out;
}

AlphaSolution solve_alpha(const MatrixFunction& chi) {
    auto rhs = [&chi](double t, const Mat& a) { return chi(t) * a; };
    MatrixFunction alpha =
        rk4_solve(rhs, Mat::identity(chi.dim()), Direction::backward, chi.grid());
    alpha.set_role(Role::alpha);
    double min_det = std::abs(det(alpha.at(0)));
    for (std::size_t i = 1; i < alpha.grid().nodes(); ++i)
        min_det = std::min(min_det, std::abs(det(alpha.at(i))));
    return {std::move(alpha), min_det};
}

InverseTransform::InverseTransform(const MatrixFunction& chi, const MatrixFunction& alpha)
    : grid_(chi.grid()), dim_(chi.dim()) {
    require_same_grid(chi.grid(), alpha.grid(), "InverseTransform");
    const std::size_t nodes = grid_.nodes();
    alpha_.reserve(nodes);
    ainv_chi_.reserve(nodes);
    double max_det = 0.0;
    std::vector<double> dets(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        dets[i] = std::abs(det(alpha.at(i)));
        max_det = std::max(max_det, dets[i]);
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        if (dets[i] <= 1e-12 * max_det)
            fail(ErrorCode::singular, "inverse_transform: det alpha vanished at node " + std::to_string(i));
        alpha_.push_back(alpha.at(i));
        ainv_chi_.push_back(inverse(alpha.at(i)) * chi.at(i));
    }
}

WienerPath InverseTransform::operator()(const WienerPath& w) const {
    require_same_grid(grid_, w.grid(), "inverse_transform");
    if (w.dim() != dim_)
        fail(ErrorCode::grid_mismatch, "inverse_transform: dimension mismatch");
    const std::size_t n = grid_.steps;
    const std::size_t d = dim_;
    const double half_dt = 0.5 * grid_.dt();

    WienerPath out(grid_, d);
    Vec cum(d, 0.0);
    Vec prev = mat_vec(ainv_chi_[0], w.at(0));
    for (std::size_t i = 1; i <= n; ++i) {
        Vec cur = mat_vec(ainv_chi_[i], w.at(i));
        for (std::size_t c = 0; c < d; ++c)
            cum[c] += half_dt * (prev[c] + cur[c]);
        Vec shift = mat_vec(alpha_[i], cum);
        for (std::size_t c = 0; c < d; ++c)
            out.value(i, c) = w.value(i, c) + shift[c];
        prev = std::move(cur);
    }
    return out;
}

WienerPath inverse_transform(const MatrixFunction& chi, const MatrixFunction& alpha, const WienerPath& w) {
    return InverseTransform(chi, alpha)(w);
}

AdmissibilityReport admissibility(const MatrixFunction& chi, const MatrixFunction* sigma) {
    const double T = chi.grid().horizon;
    const double sd = std::sqrt(static_cast<double>(chi.dim()));
    const double chi_sup = sup_norm(chi);

    AdmissibilityReport rep;
    rep.t_chi_norm = T * chi_sup;
    rep.inv_condition = T * sd * chi_sup * std::exp(T * chi_sup);
    rep.k0 = k0_bound(chi.dim());

    if (sigma) {
        const double eps = sup_norm(*sigma);
        const MatrixFunction sigma_prime = sigma->derivative();
        const MatrixFunction sigma_a = sigma->transformed([](const Mat& m) { return antisym_part(m); });
        const double delta =
            frob_norm(sigma->at(sigma->grid().steps)) + sup_norm(sigma_prime) + 2.0 * sup_norm(sigma_a);
        const double grow_eps = std::exp(T * (sd + 2.0 * eps + eps * eps));
        rep.eps_value = eps;
        rep.delta_value = delta;
        rep.eps_lhs_1 = 2.0 * eps * T * sd * (1.0 + T * sd * (1.0 + eps)) * grow_eps;
        rep.eps_lhs_2 = eps * T * (1.0 + T * sd * rep.k0 * (1.0 + eps) * grow_eps);
        const double grow_delta = std::exp(T * (sd + delta));
        rep.delta_lhs = delta * T * std::max(2.0 * sd, rep.k0) * (1.0 + T * (sd + delta) * grow_delta);
    }
    return rep;
}

} // namespace wqf
