#include "wqf/matrix_function.hpp"

#include <cmath>

#include "wqf/errors.hpp"

namespace wqf {

MatrixFunction::MatrixFunction(TimeGrid grid, std::vector<Mat> samples, Role role)
    : grid_(grid), samples_(std::move(samples)), role_(role) {
    if (samples_.size() != grid_.nodes())
        fail(ErrorCode::spec_error, "MatrixFunction: sample count must be steps + 1");
}

MatrixFunction MatrixFunction::constant(const TimeGrid& grid, const Mat& value, Role role) {
    MatrixFunction f(grid, std::vector<Mat>(grid.nodes(), value), role);
    f.analytic_ = [value](double) { return value; };
    f.analytic_deriv_ = [d = value.dim()](double) { return Mat(d); };
    return f;
}

MatrixFunction MatrixFunction::zero(const TimeGrid& grid, std::size_t dim, Role role) {
    return constant(grid, Mat(dim), role);
}

MatrixFunction MatrixFunction::from_function(const TimeGrid& grid, TimeFn fn, TimeFn derivative_fn, Role role) {
    std::vector<Mat> samples;
    samples.reserve(grid.nodes());
    for (std::size_t i = 0; i < grid.nodes(); ++i)
        samples.push_back(fn(grid.node(i)));
    MatrixFunction f(grid, std::move(samples), role);
    f.analytic_ = std::move(fn);
    f.analytic_deriv_ = std::move(derivative_fn);
    return f;
}

Mat MatrixFunction::operator()(double t) const {
    if (analytic_)
        return analytic_(t);
    const double dt = grid_.dt();
    if (t <= 0.0)
        return samples_.front();
    if (t >= grid_.horizon)
        return samples_.back();
    const double x = t / dt;
    std::size_t i = static_cast<std::size_t>(x);
    if (i >= grid_.steps)
        i = grid_.steps - 1;
    const double w = x - static_cast<double>(i);
    Mat out = samples_[i];
    out *= (1.0 - w);
    Mat hi = samples_[i + 1];
    hi *= w;
    out += hi;
    return out;
}

MatrixFunction MatrixFunction::time_reversed() const {
    std::vector<Mat> rev(samples_.rbegin(), samples_.rend());
    MatrixFunction f(grid_, std::move(rev), role_);
    const double T = grid_.horizon;
    if (analytic_)
        f.analytic_ = [T, fn = analytic_](double t) { return fn(T - t); };
    if (analytic_deriv_)
        f.analytic_deriv_ = [T, fn = analytic_deriv_](double t) { return -1.0 * fn(T - t); };
    return f;
}

MatrixFunction MatrixFunction::scaled(double factor) const {
    std::vector<Mat> s = samples_;
    for (Mat& m : s)
        m *= factor;
    MatrixFunction f(grid_, std::move(s), role_);
    if (analytic_)
        f.analytic_ = [factor, fn = analytic_](double t) { return factor * fn(t); };
    if (analytic_deriv_)
        f.analytic_deriv_ = [factor, fn = analytic_deriv_](double t) { return factor * fn(t); };
    return f;
}

MatrixFunction MatrixFunction::transformed(const std::function<Mat(const Mat&)>& entrywise, Role role) const {
    std::vector<Mat> s;
    s.reserve(samples_.size());
    for (const Mat& m : samples_)
        s.push_back(entrywise(m));
    MatrixFunction f(grid_, std::move(s), role);
    if (analytic_)
        f.analytic_ = [entrywise, fn = analytic_](double t) { return entrywise(fn(t)); };
    return f;
}

MatrixFunction MatrixFunction::derivative() const {
    if (analytic_deriv_)
        return from_function(grid_, analytic_deriv_, nullptr, Role::generic);
    if (grid_.steps < 2)
        fail(ErrorCode::spec_error, "derivative: need at least 2 steps");
    const std::size_t n = grid_.steps;
    const double dt = grid_.dt();
    std::vector<Mat> out(n + 1, Mat(dim()));
    for (std::size_t i = 1; i < n; ++i) {
        Mat m = samples_[i + 1] - samples_[i - 1];
        m *= 1.0 / (2.0 * dt);
        out[i] = m;
    }
    // One-sided second-order stencils at the ends; exact on quadratics.
    Mat lo = (-3.0) * samples_[0] + 4.0 * samples_[1] - samples_[2];
    lo *= 1.0 / (2.0 * dt);
    out[0] = lo;
    Mat hi = 3.0 * samples_[n] - 4.0 * samples_[n - 1] + samples_[n - 2];
    hi *= 1.0 / (2.0 * dt);
    out[n] = hi;
    return MatrixFunction(grid_, std::move(out));
}

MatrixFunction MatrixFunction::resampled(const TimeGrid& g) const {
    if (g == grid_)
        return *this;
    if (analytic_)
        return from_function(g, analytic_, analytic_deriv_, role_);
    std::vector<Mat> s;
    s.reserve(g.nodes());
    for (std::size_t i = 0; i < g.nodes(); ++i)
        s.push_back((*this)(g.node(i)));
    return MatrixFunction(g, std::move(s), role_);
}

MatrixFunction operator+(const MatrixFunction& a, const MatrixFunction& b) {
    require_same_grid(a.grid(), b.grid(), "MatrixFunction +");
    std::vector<Mat> s;
    s.reserve(a.samples().size());
    for (std::size_t i = 0; i < a.samples().size(); ++i)
        s.push_back(a.at(i) + b.at(i));
    return MatrixFunction(a.grid(), std::move(s));
}

double sup_norm(const MatrixFunction& f) {
    double s = 0.0;
    for (const Mat& m : f.samples())
        s = std::max(s, frob_norm(m));
    return s;
}

Mat trapezoid_integral(const MatrixFunction& f, std::size_t a, std::size_t b) {
    if (a > b || b >= f.grid().nodes())
        fail(ErrorCode::spec_error, "trapezoid_integral: bad node range");
    Mat acc(f.dim());
    if (a == b)
        return acc;
    for (std::size_t i = a; i < b; ++i) {
        Mat m = f.at(i) + f.at(i + 1);
        acc += m;
    }
    acc *= 0.5 * f.grid().dt();
    return acc;
}

Mat trapezoid_integral(const MatrixFunction& f) { return trapezoid_integral(f, 0, f.grid().steps); }

MatrixFunction tail_integral(const MatrixFunction& f) {
    const std::size_t n = f.grid().steps;
    const double half_dt = 0.5 * f.grid().dt();
    std::vector<Mat> out(n + 1, Mat(f.dim()));
    for (std::size_t ii = n; ii-- > 0;) {
        Mat seg = f.at(ii) + f.at(ii + 1);
        seg *= half_dt;
        out[ii] = out[ii + 1] + seg;
    }
    return MatrixFunction(f.grid(), std::move(out));
}

double trapezoid_scalar(const TimeGrid& grid, const std::vector<double>& node_values) {
    if (node_values.size() != grid.nodes())
        fail(ErrorCode::spec_error, "trapezoid_scalar: node count mismatch");
    double s = 0.5 * (node_values.front() + node_values.back());
    for (std::size_t i = 1; i < grid.steps; ++i)
        s += node_values[i];
    return s * grid.dt();
}

} // namespace wqf
