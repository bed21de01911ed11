#include "wqf/kernel.hpp"

#include <cmath>
#include <cstring>

#include "wqf/errors.hpp"

namespace wqf {

namespace {

double block_norm_sq(const double* e, std::size_t dd) {
    double s = 0.0;
    for (std::size_t k = 0; k < dd; ++k)
        s += e[k] * e[k];
    return s;
}

double block_dist_sq(const double* a, const double* b, std::size_t dd) {
    double s = 0.0;
    for (std::size_t k = 0; k < dd; ++k) {
        const double v = a[k] - b[k];
        s += v * v;
    }
    return s;
}

// acc += w * A^T B for raw d x d blocks.
void acc_transposed_product(double* acc, const double* a, const double* b, double w, std::size_t d) {
    for (std::size_t m = 0; m < d; ++m)
        for (std::size_t r = 0; r < d; ++r) {
            const double f = w * a[m * d + r];
            if (f == 0.0)
                continue;
            for (std::size_t c = 0; c < d; ++c)
                acc[r * d + c] += f * b[m * d + c];
        }
}

// acc += w * A B for raw d x d blocks.
void acc_product(double* acc, const double* a, const double* b, double w, std::size_t d) {
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t m = 0; m < d; ++m) {
            const double f = w * a[r * d + m];
            if (f == 0.0)
                continue;
            for (std::size_t c = 0; c < d; ++c)
                acc[r * d + c] += f * b[m * d + c];
        }
}

// Generic quadrature of |k|^2 over the strict lower triangle (times two); the
// inner trapezoid's endpoint on the diagonal takes the adjacent below-diagonal
// block, which is the limit of |k(t, s)| from inside the triangle.
template <class BlockAt>
double triangle_norm(const TimeGrid& grid, const BlockAt& sq_at) {
    const std::size_t n = grid.steps;
    const double dt = grid.dt();
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        double inner = 0.5 * sq_at(i, 0) + 0.5 * sq_at(i, i - 1);
        for (std::size_t j = 1; j < i; ++j)
            inner += sq_at(i, j);
        inner *= dt;
        total += (i == n ? 0.5 * dt : dt) * inner;
    }
    return std::sqrt(2.0 * total);
}

} // namespace

Kernel Kernel::from_function(const TimeGrid& grid, std::size_t dim,
                             const std::function<Mat(double, double)>& lower_fn) {
    Kernel k(grid, dim);
    for (std::size_t i = 1; i <= grid.steps; ++i)
        for (std::size_t j = 0; j < i; ++j)
            k.set_lower(i, j, lower_fn(grid.node(i), grid.node(j)));
    return k;
}

Mat Kernel::lower_value(std::size_t i, std::size_t j) const {
    Mat m(dim_);
    std::memcpy(m.raw(), entry(i, j), block_ * sizeof(double));
    return m;
}

void Kernel::set_lower(std::size_t i, std::size_t j, const Mat& m) {
    std::memcpy(entry(i, j), m.raw(), block_ * sizeof(double));
}

Mat Kernel::value(std::size_t i, std::size_t j) const {
    if (i > j)
        return lower_value(i, j);
    if (i < j)
        return transpose(lower_value(j, i));
    const std::size_t r = (i == 0) ? 1 : i;
    return sym_part(lower_value(r, r - 1));
}

double l2_norm(const Kernel& k) {
    const std::size_t dd = k.dim() * k.dim();
    return triangle_norm(k.grid(),
                         [&](std::size_t i, std::size_t j) { return block_norm_sq(k.entry(i, j), dd); });
}

double l2_distance(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid(), b.grid(), "l2_distance");
    const std::size_t dd = a.dim() * a.dim();
    return triangle_norm(a.grid(), [&](std::size_t i, std::size_t j) {
        return block_dist_sq(a.entry(i, j), b.entry(i, j), dd);
    });
}

Kernel embed_chi(const MatrixFunction& chi) {
    const TimeGrid& grid = chi.grid();
    Kernel k(grid, chi.dim());
    for (std::size_t i = 1; i <= grid.steps; ++i)
        for (std::size_t j = 0; j < i; ++j)
            k.set_lower(i, j, chi.at(i));
    return k;
}

Kernel triangular_composition(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid(), b.grid(), "triangular_composition");
    const TimeGrid& grid = a.grid();
    const std::size_t n = grid.steps;
    const std::size_t d = a.dim();
    const double dt = grid.dt();
    Kernel out(grid, d);
    // Row i == n integrates over the empty interval [T, T]; stays zero.
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double* acc = out.entry(i, j);
            for (std::size_t k = i; k <= n; ++k) {
                const double w = (k == i || k == n) ? 0.5 * dt : dt;
                // a(t_i, u_k) = a(u_k, t_i)^T; at u = t_i take the limit from
                // u > t_i, i.e. the block one row below.
                const double* left = (k > i) ? a.entry(k, i) : a.entry(i + 1, i);
                acc_transposed_product(acc, left, b.entry(k, j), w, d);
            }
        }
    }
    return out;
}

Kernel compose_rho(const Kernel& eta) {
    Kernel comp = triangular_composition(eta, eta);
    Kernel out = eta;
    std::vector<double>& o = out.raw();
    const std::vector<double>& c = comp.raw();
    for (std::size_t k = 0; k < o.size(); ++k)
        o[k] -= c[k];
    return out;
}

namespace {

// Full-range composition used by the resolvent series. Diagonal crossings use
// the stored symmetrized-diagonal convention; they carry O(dt) weight only.
Kernel full_composition(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid(), b.grid(), "full_composition");
    const TimeGrid& grid = a.grid();
    const std::size_t n = grid.steps;
    const std::size_t d = a.dim();
    const double dt = grid.dt();
    Kernel out(grid, d);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double* acc = out.entry(i, j);
            for (std::size_t k = 0; k <= n; ++k) {
                const double w = (k == 0 || k == n) ? 0.5 * dt : dt;
                const Mat lm = a.value(i, k);
                const Mat rm = b.value(k, j);
                acc_product(acc, lm.raw(), rm.raw(), w, d);
            }
        }
    }
    return out;
}

} // namespace

InversionResult invert_rho(const Kernel& rho, double tol, std::size_t max_iter) {
    const double rho_norm = l2_norm(rho);
    if (!(rho_norm < 0.25))
        fail(ErrorCode::precondition_violated,
             "invert_rho: need ||rho||_2 < 1/4 for the fixed-point contraction, got " + std::to_string(rho_norm));
    Kernel eta = rho;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        Kernel comp = triangular_composition(eta, eta);
        Kernel next = rho;
        std::vector<double>& nx = next.raw();
        const std::vector<double>& cp = comp.raw();
        for (std::size_t k = 0; k < nx.size(); ++k)
            nx[k] += cp[k];
        const double delta = l2_distance(next, eta);
        eta = std::move(next);
        if (delta <= 0.5 * tol) {
            const double residual = l2_distance(compose_rho(eta), rho);
            if (residual <= tol)
                return {std::move(eta), it, residual};
        }
    }
    fail(ErrorCode::no_convergence, "invert_rho: residual above tolerance after max_iter iterations");
}

ResolventSeries resolvent_series(const Kernel& rho, std::size_t terms) {
    const double r = l2_norm(rho);
    if (!(r < 1.0 / 3.0))
        fail(ErrorCode::precondition_violated,
             "resolvent_series: need ||rho||_2 < 1/3, got " + std::to_string(r));
    ResolventSeries out{Kernel(rho.grid(), rho.dim()), {}, 0.0};
    if (terms >= 1) {
        out.phi = rho;
        out.term_norms.push_back(r);
        Kernel cur = rho;
        for (std::size_t m = 2; m <= terms; ++m) {
            cur = full_composition(rho, cur);
            out.term_norms.push_back(l2_norm(cur));
            std::vector<double>& ph = out.phi.raw();
            const std::vector<double>& cu = cur.raw();
            for (std::size_t k = 0; k < ph.size(); ++k)
                ph[k] += cu[k];
        }
    }
    out.tail_bound = std::pow(r, static_cast<double>(terms + 1)) / (1.0 - r);
    return out;
}

std::vector<double> inner_ito_sums(const Kernel& k, const WienerPath& w) {
    require_same_grid(k.grid(), w.grid(), "inner_ito_sums");
    if (k.dim() != w.dim())
        fail(ErrorCode::grid_mismatch, "inner_ito_sums: dimension mismatch");
    const std::size_t n = k.grid().steps;
    const std::size_t d = k.dim();
    const std::size_t dd = d * d;
    std::vector<double> dw(n * d);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t c = 0; c < d; ++c)
            dw[s * d + c] = w.increment(s, c);
    std::vector<double> out((n + 1) * d, 0.0);
    for (std::size_t m = 1; m <= n; ++m) {
        const double* row = k.entry(m, 0);
        double* o = out.data() + m * d;
        if (d == 1) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                s += row[j] * dw[j];
            o[0] = s;
        } else {
            for (std::size_t j = 0; j < m; ++j) {
                const double* blk = row + j * dd;
                const double* x = dw.data() + j * d;
                for (std::size_t r = 0; r < d; ++r) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < d; ++c)
                        s += blk[r * d + c] * x[c];
                    o[r] += s;
                }
            }
        }
    }
    return out;
}

double quad_form_from_sums(const std::vector<double>& sums, const WienerPath& w) {
    const std::size_t n = w.grid().steps;
    const std::size_t d = w.dim();
    double q = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c)
            q += sums[i * d + c] * w.increment(i, c);
    return q;
}

double quad_form(const Kernel& k, const WienerPath& w) {
    return quad_form_from_sums(inner_ito_sums(k, w), w);
}

double h_eta_from_sums(const std::vector<double>& sums, const TimeGrid& grid, std::size_t dim) {
    const std::size_t n = grid.steps;
    double acc = 0.0;
    for (std::size_t m = 1; m <= n; ++m) {
        double sq = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double v = sums[m * dim + c];
            sq += v * v;
        }
        acc += (m == n ? 0.5 : 1.0) * sq;
    }
    return 0.5 * grid.dt() * acc;
}

double h_eta(const Kernel& k, const WienerPath& w) {
    return h_eta_from_sums(inner_ito_sums(k, w), w.grid(), w.dim());
}

WienerPath apply_G_from_sums(const std::vector<double>& sums, const TimeGrid& grid, std::size_t dim) {
    const std::size_t n = grid.steps;
    const double half_dt = 0.5 * grid.dt();
    std::vector<double> g((n + 1) * dim, 0.0);
    for (std::size_t m = 1; m <= n; ++m)
        for (std::size_t c = 0; c < dim; ++c)
            g[m * dim + c] = g[(m - 1) * dim + c] - half_dt * (sums[(m - 1) * dim + c] + sums[m * dim + c]);
    return WienerPath(grid, dim, std::move(g));
}

WienerPath apply_G(const Kernel& k, const WienerPath& w) {
    return apply_G_from_sums(inner_ito_sums(k, w), w.grid(), w.dim());
}

} // namespace wqf
