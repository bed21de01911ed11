#pragma once

#include <optional>
#include <vector>

#include "wqf/matrix_function.hpp"
#include "wqf/wiener_path.hpp"

namespace wqf {

// (iota + F_chi)(w), with F_chi(w)(t) = -integral over [0, t] of chi(s) w(s) ds.
WienerPath forward_transform(const MatrixFunction& chi, const WienerPath& w);

// Solution of alpha' = chi alpha, alpha(T) = I, solved backward.
struct AlphaSolution {
    MatrixFunction alpha;
    double min_abs_det = 0.0;
};

AlphaSolution solve_alpha(const MatrixFunction& chi);

// (iota + F_chi)^{-1} = iota + F~_chi realized through alpha:
//   out(t) = w(t) + alpha(t) * integral over [0, t] of alpha(s)^{-1} chi(s) w(s) ds,
// using (alpha^{-1})' = -alpha^{-1} chi. Precomputes the node coefficients so
// repeated per-path application is cheap.
class InverseTransform {
public:
    InverseTransform(const MatrixFunction& chi, const MatrixFunction& alpha);

    WienerPath operator()(const WienerPath& w) const;

    const TimeGrid& grid() const { return grid_; }

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<Mat> alpha_;
    std::vector<Mat> ainv_chi_;
};

WienerPath inverse_transform(const MatrixFunction& chi, const MatrixFunction& alpha, const WienerPath& w);

// Left-hand sides of every smallness condition the theory uses. The checks are
// advisory by default: the conditions are sufficient, not necessary, and the
// classical oracle cases violate them while the formulas still hold.
struct AdmissibilityReport {
    double t_chi_norm = 0.0;    // T ||chi||_inf
    double inv_condition = 0.0; // T sqrt(d) ||chi||_inf e^{T ||chi||_inf}
    double k0 = 0.0;            // sqrt(d) + 1 upper bound
    std::optional<double> eps_value;  // ||sigma||_inf
    std::optional<double> delta_value;// |sigma(T)| + ||sigma'||_inf + 2 ||sigma_A||_inf
    std::optional<double> eps_lhs_1;
    std::optional<double> eps_lhs_2;
    std::optional<double> delta_lhs;

    bool pass_t_chi() const { return t_chi_norm < 1.0; }
    bool pass_inv() const { return inv_condition < 1.0; }
    bool pass_eps_1() const { return !eps_lhs_1 || *eps_lhs_1 < 1.0; }
    bool pass_eps_2() const { return !eps_lhs_2 || *eps_lhs_2 < 1.0; }
    bool pass_delta() const { return !delta_lhs || *delta_lhs < 1.0; }
    bool all_pass() const {
        return pass_t_chi() && pass_inv() && pass_eps_1() && pass_eps_2() && pass_delta();
    }
};

AdmissibilityReport admissibility(const MatrixFunction& chi, const MatrixFunction* sigma = nullptr);

} // namespace wqf
