#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "wqf/matrix_function.hpp"
#include "wqf/wiener_path.hpp"

namespace wqf {

// Discretization of a kernel eta(t, s) with eta(t, s)^T = eta(s, t). Only the
// strict lower triangle t_i > t_j is stored (row-contiguous); the upper
// triangle follows from the symmetry and the diagonal from the convention
// eta(t, t) = sym(adjacent below-diagonal value). The diagonal never enters
// Ito sums and carries no quadrature weight of its own.
class Kernel {
public:
    Kernel(TimeGrid grid, std::size_t dim)
        : grid_(grid), dim_(dim), block_(dim * dim),
          lower_(grid.steps * (grid.steps + 1) / 2 * dim * dim, 0.0) {}

    static Kernel from_function(const TimeGrid& grid, std::size_t dim,
                                const std::function<Mat(double, double)>& lower_fn);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }

    // Raw d*d block at strict lower-triangle position (i > j).
    const double* entry(std::size_t i, std::size_t j) const { return lower_.data() + offset(i, j); }
    double* entry(std::size_t i, std::size_t j) { return lower_.data() + offset(i, j); }

    Mat lower_value(std::size_t i, std::size_t j) const;
    void set_lower(std::size_t i, std::size_t j, const Mat& m);

    // Value at any pair of nodes: stored below, transposed above, symmetrized
    // adjacent value on the diagonal.
    Mat value(std::size_t i, std::size_t j) const;

    std::vector<double>& raw() { return lower_; }
    const std::vector<double>& raw() const { return lower_; }

private:
    std::size_t offset(std::size_t i, std::size_t j) const { return (i * (i - 1) / 2 + j) * block_; }

    TimeGrid grid_;
    std::size_t dim_;
    std::size_t block_;
    std::vector<double> lower_;
};

// ||eta||_2 via the triangular trapezoid rule (twice the lower triangle); the
// inner integral's diagonal endpoint takes the limit from inside the triangle.
double l2_norm(const Kernel& k);

double l2_distance(const Kernel& a, const Kernel& b);

// eta_chi(t, s) = chi(t) for t > s.
Kernel embed_chi(const MatrixFunction& chi);

// (a * b)(t, s) = integral over u in [t, T] of a(t, u) b(u, s), for s < t.
Kernel triangular_composition(const Kernel& a, const Kernel& b);

// rho(t, s) = eta(t, s) - (eta * eta)(t, s).
Kernel compose_rho(const Kernel& eta);

// Fixed-point inversion of compose_rho: iterates eta <- rho + eta * eta, a
// contraction on the ball ||eta||_2 <= 1/2 whenever ||rho||_2 < 1/4.
struct InversionResult {
    Kernel eta;
    std::size_t iterations = 0;
    double residual = 0.0;
};

InversionResult invert_rho(const Kernel& rho, double tol, std::size_t max_iter);

// Partial sum of the resolvent series phi = sum_n rho^{*n}, where
// rho^{*n}(t, s) = integral over [0, T] of rho(t, u) rho^{*(n-1)}(u, s) du.
// Requires ||rho||_2 < 1/3.
struct ResolventSeries {
    Kernel phi;
    std::vector<double> term_norms;
    double tail_bound = 0.0;
};

ResolventSeries resolvent_series(const Kernel& rho, std::size_t terms);

// I(t_m) = sum_{k < m} eta(t_m, t_k) dw_k, flat (n+1) x d.
std::vector<double> inner_ito_sums(const Kernel& k, const WienerPath& w);

// q_eta = sum_i < I(t_i), dw_i >.
double quad_form(const Kernel& k, const WienerPath& w);
double quad_form_from_sums(const std::vector<double>& sums, const WienerPath& w);

// h_eta = 1/2 * trapezoid over t of |I(t)|^2.
double h_eta(const Kernel& k, const WienerPath& w);
double h_eta_from_sums(const std::vector<double>& sums, const TimeGrid& grid, std::size_t dim);

// G_eta(w) as a path: G(t) = -integral over [0, t] of I(s) ds, G(0) = 0.
WienerPath apply_G(const Kernel& k, const WienerPath& w);
WienerPath apply_G_from_sums(const std::vector<double>& sums, const TimeGrid& grid, std::size_t dim);

} // namespace wqf
