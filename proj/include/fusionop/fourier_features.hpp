#pragma once

#include "fusionop/grid.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace fusionop::features {

/// Random Fourier frequencies, one column b_i per feature.
struct FrequencyMatrix {
    Eigen::MatrixXd b; // d x m
    double scale = 1.0;
    std::uint64_t seed = 0;

    int dim() const noexcept { return static_cast<int>(b.rows()); }
    int count() const noexcept { return static_cast<int>(b.cols()); }
};

/// i.i.d. N(0, scale^2) entries from the counter-based stream keyed by `seed`.
FrequencyMatrix sample_frequencies(int d, int m, double scale, std::uint64_t seed);

struct EncodedCoordinates {
    Eigen::MatrixXd features; // p x 2m, row j = [cos(2 pi B^T x_j), sin(2 pi B^T x_j)]
    Eigen::MatrixXd points;   // p x d
};

EncodedCoordinates encode(const FrequencyMatrix& freq, const Eigen::MatrixXd& points);

/// sigma_k = smin * (smax/smin)^(k/(n-1)), k = 0..n-1. A single band uses smin.
std::vector<double> geometric_scale_schedule(int n, double smin = 1.0, double smax = 20.0);

/// Orthonormal basis of the column space of the encoded grid (thin column-pivoted
/// QR, dropping columns whose R diagonal falls below 1e-10 relative to the
/// largest). For multi-channel grids the basis is repeated block-diagonally, one
/// block per channel, so the result has grid.size() rows.
Eigen::MatrixXd feature_subspace_basis(const FrequencyMatrix& freq, const Grid& grid);

/// Seed of subspace k: the master seed with k XOR-ed in.
inline std::uint64_t subspace_seed(std::uint64_t seed, int k) noexcept {
    return seed ^ static_cast<std::uint64_t>(k);
}

struct SubspaceData {
    FrequencyMatrix frequencies;
    Eigen::MatrixXd projector_basis;     // grid.size() x q, orthonormal columns
    Eigen::MatrixXd snapshots_projected; // grid.size() x N
};

/// Builds one Fourier-feature subspace per entry of `scales` and projects the
/// snapshot matrix (one column per output function) onto each.
std::vector<SubspaceData> build_subspaces(const Eigen::MatrixXd& snapshots, const Grid& grid,
                                          int n_subspaces, int m_per_subspace,
                                          const std::vector<double>& scales, std::uint64_t seed);

/// Writes the 2m channels field * cos(2 pi b_i^T x) and field * sin(2 pi b_i^T x)
/// as 8-bit binary PGM images, min-max normalized per channel. Returns the paths.
std::vector<std::filesystem::path> export_encoding_demo(const FrequencyMatrix& freq,
                                                        const GridFunction& field,
                                                        const std::filesystem::path& dir);

/// Binary P5 graymap writer used by the demo.
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels);

} // namespace fusionop::features
