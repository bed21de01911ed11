#pragma once

#include <optional>

#include "wqf/matrix_function.hpp"
#include "wqf/transforms.hpp"

namespace wqf {

// sigma(t) = chi(t) - integral over [t, T] of chi^T chi.
MatrixFunction sigma_from_chi(const MatrixFunction& chi);

// Riccati route: S' = -S^2 - sigma^T S - S sigma - sigma^T sigma, S(T) = 0,
// solved through the time-reversed doubled linear system and S_hat = phi2 phi1^{-1}.
struct RiccatiSolution {
    MatrixFunction S;
    double phi1_dev_sup = 0.0;    // ||phi1 - I||_inf of the linearization
    bool phi1_within_half = false;
    double min_abs_det_phi1 = 0.0;
    double max_residual = 0.0;    // Riccati residual at interior nodes, S' by differences
};

RiccatiSolution solve_riccati(const MatrixFunction& sigma);

// Jacobi route: A'' - 2 sigma_A A' - sigma' A = 0, A(T) = I, A'(T) = sigma(T).
struct JacobiSolution {
    MatrixFunction A;
    MatrixFunction A_prime;
    double det_A0 = 0.0;
    double min_abs_det = 0.0;
    bool sigma_prime_approximated = false;
};

JacobiSolution solve_jacobi(const MatrixFunction& sigma);
JacobiSolution solve_jacobi(const MatrixFunction& sigma, const MatrixFunction& sigma_prime);

enum class Route { riccati, jacobi };

struct LaplaceResult {
    Route route = Route::riccati;
    double prefactor = 1.0;
    double trace_integral = 0.0;  // int tr S dt (riccati) or -int tr sigma_S dt (jacobi)
    double det_A0 = 1.0;          // jacobi only
    MatrixFunction chi;           // S + sigma, or A' A^{-1}
    bool sigma_prime_approximated = false;
};

LaplaceResult prefactor_riccati(const MatrixFunction& sigma, const RiccatiSolution& sol);
// Requires det A(0) > 0; the square root is undefined past a conjugate point.
LaplaceResult prefactor_jacobi(const MatrixFunction& sigma, const JacobiSolution& sol);

// Cross-route diagnostics: chi agreement, prefactor agreement, and the
// identity det A(t) * e^{int_t^T tr chi ds} = 1.
struct ChiConsistency {
    double max_chi_diff = 0.0;
    double prefactor_diff = 0.0;
    double max_det_identity_err = 0.0;
};

ChiConsistency chi_consistency(const MatrixFunction& sigma, const RiccatiSolution& ric,
                               const JacobiSolution& jac);

// q = p_sigma + extra with sigma = gamma + int_t^T kappa_S and
// extra = 1/2 int_0^T (int_t^T tr kappa_S ds) dt; E[e^q f] = e^{extra} E[e^{p_sigma} f].
struct GammaKappaReduction {
    MatrixFunction sigma;
    double extra_log_factor = 0.0;
};

GammaKappaReduction gamma_kappa_reduce(const MatrixFunction& gamma, const MatrixFunction& kappa);

// lambda * sigma; rerun either route on the result.
MatrixFunction scale_lambda(const MatrixFunction& sigma, double lambda);

} // namespace wqf
