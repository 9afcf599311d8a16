#pragma once

#include <Eigen/Dense>

namespace fusionop::pod {

/// Mean-centered POD of a snapshot matrix (one snapshot per column).
struct PODBasis {
    Eigen::VectorXd mean_mode;
    Eigen::MatrixXd modes;           // p x r, orthonormal, descending energy
    Eigen::VectorXd singular_values; // r, descending, >= 0
    int numerical_rank = 0;          // modes with sigma_j >= 1e-12 * sigma_1

    int dim() const noexcept { return static_cast<int>(mean_mode.size()); }
    int size() const noexcept { return static_cast<int>(modes.cols()); }
    /// True when trailing modes fall below the numerical-rank threshold.
    bool rank_deficient() const noexcept { return numerical_rank < size(); }
};

/// Top-r left singular vectors of the centered snapshots. Each mode is signed
/// so that its largest-magnitude entry is positive. Requires 1 <= r <= min(p, N).
PODBasis compute_pod(const Eigen::MatrixXd& snapshots, int r);

/// POD of the snapshots after orthogonal projection onto span(basis), computed
/// in the subspace's coordinates and lifted back. r is clamped to the subspace
/// dimension (and N).
PODBasis compute_pod_in_subspace(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& snapshots,
                                 int r);

/// modes^T (f - mean_mode).
Eigen::VectorXd project(const PODBasis& basis, const Eigen::VectorXd& f);

/// mean_mode + modes * coeffs.
Eigen::VectorXd reconstruct(const PODBasis& basis, const Eigen::VectorXd& coeffs);

/// Squared Frobenius norm of the mean-centered snapshot matrix.
double centered_energy(const Eigen::MatrixXd& snapshots);

/// sum sigma_j^2 / total_energy.
double energy_fraction(const PODBasis& basis, double total_energy);

} // namespace fusionop::pod
