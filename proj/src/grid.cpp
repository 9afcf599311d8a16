#include "fusionop/grid.hpp"

#include "fusionop/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fusionop {

double Grid::x(int i) const noexcept {
    return periodic ? static_cast<double>(i) / nx : static_cast<double>(i) / (nx - 1);
}

double Grid::y(int j) const noexcept {
    return ny > 1 ? static_cast<double>(j) / (ny - 1) : 0.0;
}

double Grid::spacing() const noexcept { return periodic ? 1.0 / nx : 1.0 / (nx - 1); }

Eigen::MatrixXd Grid::coordinates() const {
    Eigen::MatrixXd xy(points(), dim());
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            xy(index(i, j), 0) = x(i);
            if (dim() == 2) xy(index(i, j), 1) = y(j);
        }
    }
    return xy;
}

void Grid::validate() const {
    if (nx < 4 || (ny != 1 && ny < 4) || channels < 1) {
        throw InvalidArgument("grid resolution must be at least 4 per axis (got " +
                              std::to_string(nx) + "x" + std::to_string(ny) + ")");
    }
    if (periodic && ny != 1) throw InvalidArgument("periodic grids are one-dimensional");
}

GridFunction::GridFunction(Grid g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    grid.validate();
    if (values.size() != grid.size()) {
        throw DimensionError("grid function has " + std::to_string(values.size()) +
                             " values, grid expects " + std::to_string(grid.size()));
    }
    if (!values.allFinite()) throw NumericalError("grid function contains non-finite values");
}

namespace {

// Cell index and local coordinate in [0,1] along one non-periodic axis.
std::pair<int, double> locate(double t, int n) {
    const double s = t * (n - 1);
    int cell = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
    return {cell, s - cell};
}

} // namespace

double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v,
                   std::span<const double> point) {
    if (static_cast<int>(point.size()) != grid.dim()) {
        throw DimensionError("query point has dimension " + std::to_string(point.size()) +
                             ", grid has " + std::to_string(grid.dim()));
    }
    if (v.size() != grid.points()) throw DimensionError("channel length does not match grid");
    for (double t : point) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw InvalidArgument("query point " + std::to_string(t) + " outside the unit domain");
        }
    }

    if (grid.dim() == 1) {
        if (grid.periodic) {
            const double s = point[0] * grid.nx;
            int cell = static_cast<int>(std::floor(s));
            const double frac = s - cell;
            cell %= grid.nx;
            const int next = (cell + 1) % grid.nx;
            return (1.0 - frac) * v[cell] + frac * v[next];
        }
        auto [cell, frac] = locate(point[0], grid.nx);
        return (1.0 - frac) * v[cell] + frac * v[cell + 1];
    }

    auto [i, fx] = locate(point[0], grid.nx);
    auto [j, fy] = locate(point[1], grid.ny);
    const double v00 = v[grid.index(i, j)];
    const double v10 = v[grid.index(i + 1, j)];
    const double v01 = v[grid.index(i, j + 1)];
    const double v11 = v[grid.index(i + 1, j + 1)];
    return (1.0 - fx) * (1.0 - fy) * v00 + fx * (1.0 - fy) * v10 + (1.0 - fx) * fy * v01 +
           fx * fy * v11;
}

} // namespace fusionop
