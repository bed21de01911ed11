#include "wqf/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wqf/errors.hpp"
#include "wqf/ode.hpp"

namespace wqf {

namespace {

constexpr double kConjugateRel = 1e-8;

std::vector<double> trace_samples(const MatrixFunction& f) {
    std::vector<double> tr(f.grid().nodes());
    for (std::size_t i = 0; i < tr.size(); ++i)
        tr[i] = trace(f.at(i));
    return tr;
}

// Checks |det| against a scale set by the running maximum, so breakdown
// detection does not depend on the overall magnitude of the solution; a sign
// change between nodes means the determinant vanished in between and is
// flagged as well.
void check_conjugate(double d, double& running_max, double& prev_sign, const char* what,
                     std::size_t node) {
    const double a = std::abs(d);
    running_max = std::max(running_max, a);
    if (a < kConjugateRel * running_max)
        fail(ErrorCode::conjugate_point,
             std::string(what) + ": determinant vanished at node " + std::to_string(node));
    const double s = d > 0.0 ? 1.0 : -1.0;
    if (prev_sign != 0.0 && s != prev_sign)
        fail(ErrorCode::conjugate_point,
             std::string(what) + ": determinant changed sign before node " + std::to_string(node));
    prev_sign = s;
}

} // namespace

MatrixFunction sigma_from_chi(const MatrixFunction& chi) {
    MatrixFunction quad = chi.transformed([](const Mat& m) { return transpose(m) * m; });
    MatrixFunction tail = tail_integral(quad);
    std::vector<Mat> s;
    s.reserve(chi.grid().nodes());
    for (std::size_t i = 0; i < chi.grid().nodes(); ++i)
        s.push_back(chi.at(i) - tail.at(i));
    return MatrixFunction(chi.grid(), std::move(s), Role::sigma);
}

RiccatiSolution solve_riccati(const MatrixFunction& sigma) {
    const TimeGrid& grid = sigma.grid();
    const std::size_t d = sigma.dim();
    const std::size_t n = grid.steps;

    const MatrixFunction sig_rev = sigma.time_reversed();
    BlockLinearSystem sys{
        grid,
        sig_rev.scaled(-1.0),
        MatrixFunction::constant(grid, (-1.0) * Mat::identity(d)),
        sig_rev.transformed([](const Mat& m) { return transpose(m) * m; }),
        sig_rev.transformed([](const Mat& m) { return transpose(m); }),
        Mat::identity(d),
        Mat(d),
    };
    auto [phi1, phi2] = solve_block(sys);

    RiccatiSolution out;
    out.min_abs_det_phi1 = std::numeric_limits<double>::infinity();
    double running_max = 0.0;
    double prev_sign = 0.0;
    const Mat eye = Mat::identity(d);
    std::vector<Mat> s_samples(n + 1, Mat(d));
    for (std::size_t i = 0; i <= n; ++i) {
        const double dp = det(phi1.at(i));
        check_conjugate(dp, running_max, prev_sign, "solve_riccati", i);
        out.min_abs_det_phi1 = std::min(out.min_abs_det_phi1, std::abs(dp));
        out.phi1_dev_sup = std::max(out.phi1_dev_sup, frob_norm(phi1.at(i) - eye));
        // S(t) = S_hat(T - t) with S_hat = phi2 phi1^{-1}.
        s_samples[n - i] = phi2.at(i) * inverse(phi1.at(i));
    }
    out.phi1_within_half = out.phi1_dev_sup < 0.5;
    out.S = MatrixFunction(grid, std::move(s_samples), Role::riccati_s);

    const MatrixFunction s_prime = out.S.derivative();
    for (std::size_t i = 1; i < n; ++i) {
        const Mat& s = out.S.at(i);
        const Mat& sg = sigma.at(i);
        const Mat sgt = transpose(sg);
        const Mat res = s_prime.at(i) + s * s + sgt * s + s * sg + sgt * sg;
        out.max_residual = std::max(out.max_residual, frob_norm(res));
    }
    return out;
}

JacobiSolution solve_jacobi(const MatrixFunction& sigma) {
    JacobiSolution out = solve_jacobi(sigma, sigma.derivative());
    out.sigma_prime_approximated = !sigma.has_analytic_derivative();
    return out;
}

JacobiSolution solve_jacobi(const MatrixFunction& sigma, const MatrixFunction& sigma_prime) {
    const TimeGrid& grid = sigma.grid();
    const std::size_t d = sigma.dim();
    const std::size_t n = grid.steps;

    const MatrixFunction sp_rev = sigma_prime.time_reversed();
    const MatrixFunction sa_rev =
        sigma.transformed([](const Mat& m) { return antisym_part(m); }).time_reversed();
    BlockLinearSystem sys{
        grid,
        MatrixFunction::zero(grid, d),
        MatrixFunction::constant(grid, Mat::identity(d)),
        sp_rev,
        sa_rev.scaled(-2.0),
        Mat::identity(d),
        (-1.0) * sigma.at(n),
    };
    auto [phi1, phi2] = solve_block(sys);

    JacobiSolution out;
    out.min_abs_det = std::numeric_limits<double>::infinity();
    double running_max = 0.0;
    double prev_sign = 0.0;
    std::vector<Mat> a(n + 1, Mat(d)), ap(n + 1, Mat(d));
    for (std::size_t i = 0; i <= n; ++i) {
        const double dp = det(phi1.at(i));
        check_conjugate(dp, running_max, prev_sign, "solve_jacobi", i);
        out.min_abs_det = std::min(out.min_abs_det, std::abs(dp));
        a[n - i] = phi1.at(i);
        ap[n - i] = (-1.0) * phi2.at(i);
    }
    out.det_A0 = det(a[0]);
    out.A = MatrixFunction(grid, std::move(a), Role::jacobi_a);
    out.A_prime = MatrixFunction(grid, std::move(ap));
    return out;
}

LaplaceResult prefactor_riccati(const MatrixFunction& sigma, const RiccatiSolution& sol) {
    LaplaceResult out;
    out.route = Route::riccati;
    out.trace_integral = trapezoid_scalar(sigma.grid(), trace_samples(sol.S));
    out.prefactor = std::exp(0.5 * out.trace_integral);
    out.chi = sol.S + sigma;
    out.chi.set_role(Role::chi);
    return out;
}

LaplaceResult prefactor_jacobi(const MatrixFunction& sigma, const JacobiSolution& sol) {
    if (!(sol.det_A0 > 0.0))
        fail(ErrorCode::negative_determinant,
             "prefactor_jacobi: det A(0) = " + std::to_string(sol.det_A0) + " <= 0");
    const MatrixFunction sigma_s = sigma.transformed([](const Mat& m) { return sym_part(m); });
    LaplaceResult out;
    out.route = Route::jacobi;
    out.trace_integral = -trapezoid_scalar(sigma.grid(), trace_samples(sigma_s));
    out.det_A0 = sol.det_A0;
    out.prefactor = std::exp(0.5 * out.trace_integral) / std::sqrt(sol.det_A0);
    out.sigma_prime_approximated = sol.sigma_prime_approximated;

    std::vector<Mat> chi(sigma.grid().nodes(), Mat(sigma.dim()));
    for (std::size_t i = 0; i < chi.size(); ++i)
        chi[i] = sol.A_prime.at(i) * inverse(sol.A.at(i));
    out.chi = MatrixFunction(sigma.grid(), std::move(chi), Role::chi);
    return out;
}

ChiConsistency chi_consistency(const MatrixFunction& sigma, const RiccatiSolution& ric,
                               const JacobiSolution& jac) {
    const LaplaceResult r = prefactor_riccati(sigma, ric);
    const LaplaceResult j = prefactor_jacobi(sigma, jac);
    const TimeGrid& grid = sigma.grid();
    const std::size_t n = grid.steps;

    ChiConsistency out;
    out.prefactor_diff = std::abs(r.prefactor - j.prefactor);
    for (std::size_t i = 0; i <= n; ++i)
        out.max_chi_diff = std::max(out.max_chi_diff, frob_norm(r.chi.at(i) - j.chi.at(i)));

    // det A(t) = e^{-int_t^T tr chi ds}, evaluated with the jacobi-route chi.
    std::vector<double> tr_chi = trace_samples(j.chi);
    double tail = 0.0;
    const double half_dt = 0.5 * grid.dt();
    out.max_det_identity_err = std::abs(det(jac.A.at(n)) - 1.0);
    for (std::size_t ii = n; ii-- > 0;) {
        tail += half_dt * (tr_chi[ii] + tr_chi[ii + 1]);
        out.max_det_identity_err =
            std::max(out.max_det_identity_err, std::abs(det(jac.A.at(ii)) * std::exp(tail) - 1.0));
    }
    return out;
}

GammaKappaReduction gamma_kappa_reduce(const MatrixFunction& gamma, const MatrixFunction& kappa) {
    require_same_grid(gamma.grid(), kappa.grid(), "gamma_kappa_reduce");
    const MatrixFunction kappa_s = kappa.transformed([](const Mat& m) { return sym_part(m); });
    const MatrixFunction tail = tail_integral(kappa_s);

    GammaKappaReduction out;
    std::vector<Mat> s;
    s.reserve(gamma.grid().nodes());
    for (std::size_t i = 0; i < gamma.grid().nodes(); ++i)
        s.push_back(gamma.at(i) + tail.at(i));
    out.sigma = MatrixFunction(gamma.grid(), std::move(s), Role::sigma);
    // sigma' = gamma' - kappa_S is exact whenever both inputs carry analytic forms.
    if (gamma.has_analytic_derivative() && kappa.has_analytic()) {
        auto gp = gamma.derivative();
        out.sigma.set_analytic_derivative(
            [gp, kappa_s](double t) { return gp(t) - kappa_s(t); });
    }
    out.extra_log_factor = 0.5 * trapezoid_scalar(gamma.grid(), trace_samples(tail));
    return out;
}

MatrixFunction scale_lambda(const MatrixFunction& sigma, double lambda) { return sigma.scaled(lambda); }

} // namespace wqf
