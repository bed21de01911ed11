#include "wqf/ode.hpp"

#include <cmath>

#include "wqf/errors.hpp"

namespace wqf {

namespace {

struct MatPair {
    Mat a, b;
};

MatPair operator+(const MatPair& x, const MatPair& y) { return {x.a + y.a, x.b + y.b}; }
MatPair operator*(double s, const MatPair& x) { return {s * x.a, s * x.b}; }

bool finite(const Mat& m) { return m.all_finite(); }
bool finite(const MatPair& p) { return p.a.all_finite() && p.b.all_finite(); }

template <class State, class Rhs>
std::vector<State> rk4_sweep(const Rhs& rhs, State y0, const TimeGrid& grid) {
    const double h = grid.dt();
    std::vector<State> out;
    out.reserve(grid.nodes());
    out.push_back(y0);
    State y = std::move(y0);
    for (std::size_t i = 0; i < grid.steps; ++i) {
        const double t = grid.node(i);
        const State k1 = rhs(t, y);
        const State k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
        const State k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
        const State k4 = rhs(t + h, y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!finite(y))
            fail(ErrorCode::non_finite, "rk4: state blew up at t = " + std::to_string(t + h));
        out.push_back(y);
    }
    return out;
}

} // namespace

MatrixFunction rk4_solve(const OdeRhs& rhs, const Mat& initial, Direction direction, const TimeGrid& grid) {
    if (direction == Direction::forward)
        return MatrixFunction(grid, rk4_sweep(rhs, initial, grid));
    // y(tau) = x(T - tau) turns x' = f(t, x), x(T) given, into y' = -f(T - tau, y).
    const double T = grid.horizon;
    auto reversed = [&](double tau, const Mat& y) { return -1.0 * rhs(T - tau, y); };
    std::vector<Mat> sweep = rk4_sweep(reversed, initial, grid);
    std::vector<Mat> samples(sweep.rbegin(), sweep.rend());
    return MatrixFunction(grid, std::move(samples));
}

std::pair<MatrixFunction, MatrixFunction> solve_block(const BlockLinearSystem& sys) {
    auto rhs = [&](double t, const MatPair& p) -> MatPair {
        return {sys.g11(t) * p.a + sys.g12(t) * p.b, sys.g21(t) * p.a + sys.g22(t) * p.b};
    };
    std::vector<MatPair> sweep = rk4_sweep(rhs, MatPair{sys.xi1, sys.xi2}, sys.grid);
    std::vector<Mat> phi1, phi2;
    phi1.reserve(sweep.size());
    phi2.reserve(sweep.size());
    for (MatPair& p : sweep) {
        phi1.push_back(std::move(p.a));
        phi2.push_back(std::move(p.b));
    }
    return {MatrixFunction(sys.grid, std::move(phi1)), MatrixFunction(sys.grid, std::move(phi2))};
}

GronwallBounds gronwall_bounds(const BlockLinearSystem& sys) {
    const double T = sys.grid.horizon;
    const double xi1 = frob_norm(sys.xi1);
    const double xi2 = frob_norm(sys.xi2);
    const double g11 = sup_norm(sys.g11);
    const double g12 = sup_norm(sys.g12);
    const double g21 = sup_norm(sys.g21);
    const double g22 = sup_norm(sys.g22);
    const double xi_sum = xi1 + xi2;
    const double row2 = g21 + g22;
    const double growth = std::exp(T * (g11 + g12 + g21 + g22));

    GronwallBounds b;
    b.phi2_sup = xi2 + T * xi_sum * row2 * growth;
    b.phi1_dev = T * g11 * xi_sum * growth + T * g12 * (xi2 + T * xi_sum * row2 * growth);
    return b;
}

} // namespace wqf
