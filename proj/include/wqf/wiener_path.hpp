#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wqf/mat.hpp"
#include "wqf/time_grid.hpp"

namespace wqf {

// One R^d-valued path on the grid, starting at the origin. Values are stored
// flat, node-major, so per-path work in Monte Carlo loops stays allocation-free.
class WienerPath {
public:
    WienerPath(TimeGrid grid, std::size_t dim)
        : grid_(grid), dim_(dim), vals_(grid.nodes() * dim, 0.0) {}

    WienerPath(TimeGrid grid, std::size_t dim, std::vector<double> flat_values)
        : grid_(grid), dim_(dim), vals_(std::move(flat_values)) {
        if (vals_.size() != grid_.nodes() * dim_)
            fail(ErrorCode::spec_error, "WienerPath: value count must be (steps + 1) * dim");
        for (std::size_t c = 0; c < dim_; ++c)
            if (vals_[c] != 0.0)
                fail(ErrorCode::spec_error, "WienerPath: path must start at 0");
    }

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }

    double value(std::size_t node, std::size_t coord) const { return vals_[node * dim_ + coord]; }
    double& value(std::size_t node, std::size_t coord) { return vals_[node * dim_ + coord]; }
    const double* node(std::size_t i) const { return vals_.data() + i * dim_; }
    double* node(std::size_t i) { return vals_.data() + i * dim_; }

    double increment(std::size_t step, std::size_t coord) const {
        return vals_[(step + 1) * dim_ + coord] - vals_[step * dim_ + coord];
    }

    Vec at(std::size_t i) const { return Vec(node(i), node(i) + dim_); }
    Vec terminal() const { return at(grid_.steps); }

    const std::vector<double>& flat() const { return vals_; }
    std::vector<double>& flat() { return vals_; }

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> vals_;
};

inline WienerPath operator+(const WienerPath& a, const WienerPath& b) {
    require_same_grid(a.grid(), b.grid(), "path +");
    WienerPath out = a;
    for (std::size_t k = 0; k < out.flat().size(); ++k)
        out.flat()[k] += b.flat()[k];
    return out;
}

} // namespace wqf
