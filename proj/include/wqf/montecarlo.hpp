#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wqf/kernel.hpp"
#include "wqf/laplace.hpp"
#include "wqf/matrix_function.hpp"
#include "wqf/wiener_path.hpp"

namespace wqf {

// Brownian path with i.i.d. N(0, dt) increments, fully determined by
// (seed, path_index) through the counter-based generator.
WienerPath sample_path(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid, std::size_t dim);

// p_sigma = sum_i < sigma(t_i) w(t_i), dw_i >  (left-point Ito rule).
double ito_p_sigma(const MatrixFunction& sigma, const WienerPath& w);

// q = p_gamma + 1/2 * trapezoid of < kappa(t) w(t), w(t) >.
double quad_q(const MatrixFunction& gamma, const MatrixFunction& kappa, const WienerPath& w);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
};

struct McConfig {
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    unsigned workers = 1; // 0 = hardware concurrency
};

using PathFunctional = std::function<double(const WienerPath&)>;
// Writes n_out values per path; used to estimate several functionals on the
// same path stream (common random numbers).
using MultiFunctional = std::function<void(const WienerPath&, double*)>;

// Streaming mean/variance over reproducible paths. Accumulation runs in fixed
// 4096-path chunks merged in index order, so results are byte-identical for
// any worker count.
Estimate estimate(const PathFunctional& fn, const TimeGrid& grid, std::size_t dim, const McConfig& mc);
std::vector<Estimate> estimate_multi(const MultiFunctional& fn, std::size_t n_out, const TimeGrid& grid,
                                     std::size_t dim, const McConfig& mc);

// Bounded cylinder-type test functions (|f| <= 1).
struct TestFunctional {
    enum class Kind { constant_one, cos_terminal, cos_cylinder };
    Kind kind = Kind::constant_one;
    Vec ell;                                          // cos< ell, w(T) >
    std::vector<std::pair<std::size_t, Vec>> legs;    // cos( sum_m < ell_m, w(t_{k_m}) > )

    double operator()(const WienerPath& w) const;

    static TestFunctional one() { return {}; }
    static TestFunctional cosine(Vec ell_) {
        TestFunctional f;
        f.kind = Kind::cos_terminal;
        f.ell = std::move(ell_);
        return f;
    }
    static TestFunctional cylinder(std::vector<std::pair<std::size_t, Vec>> legs_) {
        TestFunctional f;
        f.kind = Kind::cos_cylinder;
        f.legs = std::move(legs_);
        return f;
    }
};

enum class IdentityCase { t_to_q, cv0, cvf2 };

// One identity realized at a fixed resolution: eval fills (lhs_term, rhs_term)
// for a sampled path; the identity asserts E[lhs] = E[rhs].
struct IdentitySides {
    TimeGrid grid;
    std::size_t dim = 1;
    double rhs_constant = 1.0; // the deterministic factor on the rhs (prefactor or e^{||eta||^2/4})
    std::function<void(const WienerPath&, double&, double&)> eval;
    // Advisory smallness record: the chi/sigma conditions for linear cases,
    // the kernel norm for cv0/cvf2.
    std::optional<AdmissibilityReport> admissibility;
    std::optional<double> eta_norm;
};

// Builders solve/precompute everything path-independent once.
//   t_to_q: lhs = e^{p_sigma(w)} f(w),           rhs = pref * f((iota+F_chi)^{-1} w)
//   cv0:    lhs = f(w + G_eta(w)) e^{q_rho(w)},  rhs = e^{||eta||^2/4} f(w)
//   cvf2:   lhs = f(w + G_eta(w)) e^{q_eta - h_eta}, rhs = f(w)
IdentitySides make_t_to_q_sides(const MatrixFunction& sigma, Route route, const TestFunctional& f);
IdentitySides make_cv0_sides(const Kernel& eta, const TestFunctional& f);
IdentitySides make_cvf2_sides(const Kernel& eta, const TestFunctional& f);
// E[e^q f] = e^{extra} pref E[f((iota+F_chi)^{-1})] with q built from (gamma, kappa).
IdentitySides make_gamma_kappa_sides(const MatrixFunction& gamma, const MatrixFunction& kappa, Route route,
                                     const TestFunctional& f);

using IdentityBuilder = std::function<IdentitySides(const TimeGrid&)>;

struct IdentityReport {
    IdentityCase kind = IdentityCase::t_to_q;
    Estimate lhs, rhs, diff;
    double z = 0.0;
    double rhs_constant = 1.0;
    std::optional<AdmissibilityReport> admissibility;
    std::optional<double> eta_norm;
    // Richardson run on the refined grid with an independent seed:
    bool has_bias = false;
    Estimate diff_fine;
    double bias_estimate = 0.0;     // ~ 2 (diff - diff_fine) under an O(dt) weak-error model
    double z_bias_corrected = 0.0;  // (2 diff_fine - diff) / combined std error
};

// Estimates both sides on a common path stream and reports the z-score of the
// difference. With richardson set, repeats on the 2n grid (half the paths,
// decorrelated seed) to size the discretization bias.
IdentityReport run_identity(IdentityCase kind, const IdentityBuilder& builder, const TimeGrid& grid,
                            const McConfig& mc, bool richardson);

} // namespace wqf
