#pragma once

#include <functional>
#include <utility>

#include "wqf/matrix_function.hpp"

namespace wqf {

enum class Direction { forward, backward };

using OdeRhs = std::function<Mat(double, const Mat&)>;

// Classical fixed-step RK4 on the grid. Backward problems (terminal data at T)
// are solved by the substitution f_hat(t) = f(T - t) and a forward sweep.
// Throws Error(non_finite) as soon as any state entry stops being finite.
MatrixFunction rk4_solve(const OdeRhs& rhs, const Mat& initial, Direction direction, const TimeGrid& grid);

// Coupled linear system on R^{2d x d}:
//   phi1' = g11 phi1 + g12 phi2,  phi2' = g21 phi1 + g22 phi2,
// integrated forward from t = 0.
struct BlockLinearSystem {
    TimeGrid grid;
    MatrixFunction g11, g12, g21, g22;
    Mat xi1, xi2;
};

std::pair<MatrixFunction, MatrixFunction> solve_block(const BlockLinearSystem& sys);

// Right-hand sides of the two Gronwall inequalities bounding ||phi2||_inf and
// ||phi1 - xi1||_inf in terms of |xi_j| and ||g_ij||_inf.
struct GronwallBounds {
    double phi2_sup = 0.0;
    double phi1_dev = 0.0;
};

GronwallBounds gronwall_bounds(const BlockLinearSystem& sys);

} // namespace wqf
