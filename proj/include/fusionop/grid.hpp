#pragma once

#include <Eigen/Dense>
#include <span>

namespace fusionop {

/// Tensor-product sampling grid on the unit square or unit interval.
///
/// Non-periodic grids include both endpoints (x_i = i/(n-1)); the periodic
/// 1-D grid samples the unit torus at x_j = j/n. Values are stored row-major,
/// index i*ny + j for x index i and y index j. Multi-channel functions stack
/// the channels one after another.
struct Grid {
    int nx = 0;
    int ny = 1;
    bool periodic = false;
    int channels = 1;

    static Grid square(int n, int channels = 1) { return Grid{n, n, false, channels}; }
    static Grid torus(int n) { return Grid{n, 1, true, 1}; }

    int dim() const noexcept { return ny > 1 ? 2 : 1; }
    int points() const noexcept { return nx * ny; }
    int size() const noexcept { return points() * channels; }
    int index(int i, int j) const noexcept { return i * ny + j; }

    double x(int i) const noexcept;
    double y(int j) const noexcept;
    double spacing() const noexcept;

    /// points() x dim() matrix of node coordinates in storage order.
    Eigen::MatrixXd coordinates() const;

    /// Throws InvalidArgument unless every axis has at least 4 nodes.
    void validate() const;

    bool operator==(const Grid&) const = default;
};

struct GridFunction {
    Grid grid;
    Eigen::VectorXd values;

    GridFunction() = default;
    GridFunction(Grid g, Eigen::VectorXd v);

    double at(int i, int j = 0, int channel = 0) const {
        return values[channel * grid.points() + grid.index(i, j)];
    }
};

/// Multilinear interpolation of one channel at `point`; throws InvalidArgument
/// if the point lies outside the unit domain.
double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& channel_values,
                   std::span<const double> point);

} // namespace fusionop
