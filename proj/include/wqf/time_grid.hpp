#pragma once

#include <cstddef>

#include "wqf/errors.hpp"

namespace wqf {

// Uniform grid t_i = i*T/n over [0, T]. Every object in a problem (functions,
// kernels, paths, ODE solutions) shares one grid so Ito sums, quadrature and
// ODE nodes line up without interpolation between resolutions.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t n) : horizon(T), steps(n) {
        if (!(T > 0.0) || n < 1)
            fail(ErrorCode::spec_error, "TimeGrid: need T > 0 and steps >= 1");
    }

    double dt() const { return horizon / static_cast<double>(steps); }
    std::size_t nodes() const { return steps + 1; }
    double node(std::size_t i) const { return horizon * static_cast<double>(i) / static_cast<double>(steps); }

    TimeGrid refined() const { return TimeGrid(horizon, 2 * steps); }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.horizon == b.horizon && a.steps == b.steps;
    }
};

inline void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* where) {
    if (!(a == b))
        fail(ErrorCode::grid_mismatch, std::string(where) + ": operands live on different grids");
}

} // namespace wqf
