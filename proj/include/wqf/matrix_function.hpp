#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "wqf/mat.hpp"
#include "wqf/time_grid.hpp"

namespace wqf {

enum class Role { generic, chi, sigma, gamma, kappa, riccati_s, jacobi_a, alpha };

// Matrix-valued function of time sampled on a uniform grid. Node samples are
// the ground truth for all quadrature; between nodes the function evaluates by
// linear interpolation, unless an analytic form was attached at construction
// (builtin problems do this so ODE midpoint evaluations stay exact).
class MatrixFunction {
public:
    using TimeFn = std::function<Mat(double)>;

    MatrixFunction() = default;
    MatrixFunction(TimeGrid grid, std::vector<Mat> samples, Role role = Role::generic);

    static MatrixFunction constant(const TimeGrid& grid, const Mat& value, Role role = Role::generic);
    static MatrixFunction zero(const TimeGrid& grid, std::size_t dim, Role role = Role::generic);
    static MatrixFunction from_function(const TimeGrid& grid, TimeFn fn, TimeFn derivative_fn = nullptr,
                                        Role role = Role::generic);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return samples_.empty() ? 0 : samples_.front().dim(); }
    Role role() const { return role_; }
    void set_role(Role r) { role_ = r; }

    const Mat& at(std::size_t i) const { return samples_[i]; }
    Mat& at(std::size_t i) { return samples_[i]; }
    const std::vector<Mat>& samples() const { return samples_; }

    // Analytic value when available, otherwise linear interpolation of samples.
    Mat operator()(double t) const;
    bool has_analytic() const { return static_cast<bool>(analytic_); }
    bool has_analytic_derivative() const { return static_cast<bool>(analytic_deriv_); }

    // f(T - t), carrying the analytic forms along when present.
    MatrixFunction time_reversed() const;

    // Pointwise lambda * f; scales analytic forms too.
    MatrixFunction scaled(double factor) const;

    MatrixFunction transformed(const std::function<Mat(const Mat&)>& entrywise, Role role = Role::generic) const;

    // Central differences inside, second-order one-sided at the endpoints;
    // analytic derivative sampled instead when one was attached.
    MatrixFunction derivative() const;

    void set_analytic_derivative(TimeFn fn) { analytic_deriv_ = std::move(fn); }

    // Same function on another grid; sampled functions fall back to linear
    // interpolation of the existing nodes.
    MatrixFunction resampled(const TimeGrid& g) const;

private:
    TimeGrid grid_;
    std::vector<Mat> samples_;
    Role role_ = Role::generic;
    TimeFn analytic_;
    TimeFn analytic_deriv_;
};

MatrixFunction operator+(const MatrixFunction& a, const MatrixFunction& b);

// Grid approximation of sup_t |f(t)| in the Frobenius norm.
double sup_norm(const MatrixFunction& f);

// Composite trapezoid over node range [a, b].
Mat trapezoid_integral(const MatrixFunction& f, std::size_t a, std::size_t b);
Mat trapezoid_integral(const MatrixFunction& f);

// g(t_i) = integral of f over [t_i, T]; g(T) = 0 exactly.
MatrixFunction tail_integral(const MatrixFunction& f);

double trapezoid_scalar(const TimeGrid& grid, const std::vector<double>& node_values);

} // namespace wqf
