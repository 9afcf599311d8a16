#pragma once

// Finite-dimensional frames and fusion frames.
//
// A frame is stored as the d x n synthesis matrix whose columns are the frame
// vectors f_i. Frame operators are assembled as dense d x d matrices and
// inverted with a Cholesky solve.

#include <Eigen/Dense>
#include <vector>

namespace fusionop::frames {

/// Relative threshold below which the lower bound counts as zero: A < 1e-12 * B.
inline constexpr double kNonFrameTolerance = 1e-12;

class FrameSpec {
public:
    /// Columns of `vectors` are the frame elements.
    explicit FrameSpec(Eigen::MatrixXd vectors);

    int dim() const noexcept { return static_cast<int>(vectors_.rows()); }
    int size() const noexcept { return static_cast<int>(vectors_.cols()); }
    const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }

private:
    Eigen::MatrixXd vectors_;
};

struct Bounds {
    double lower = 0.0;
    double upper = 0.0;
    bool is_frame = false;

    bool tight(double tol = 1e-12) const noexcept {
        return is_frame && upper - lower <= tol * upper;
    }
};

Eigen::VectorXd analysis(const FrameSpec& frame, const Eigen::VectorXd& f);

/// Synthesis: sum_i c_i f_i.
Eigen::VectorXd synthesis(const FrameSpec& frame, const Eigen::VectorXd& coeffs);

/// S = sum_i f_i f_i^T.
Eigen::MatrixXd frame_operator(const FrameSpec& frame);
Eigen::VectorXd frame_operator_apply(const FrameSpec& frame, const Eigen::VectorXd& f);

/// Extreme eigenvalues of the frame operator. A non-frame reports lower = 0.
Bounds frame_bounds(const FrameSpec& frame);

/// {S^-1 f_i}. Throws NumericalError when the family does not span.
FrameSpec dual_frame(const FrameSpec& frame);

/// sum_i c_i S^-1 f_i.
Eigen::VectorXd reconstruct(const FrameSpec& frame, const Eigen::VectorXd& coeffs);

/// Orthonormal basis of a subspace W. Bases that are off orthonormal by more
/// than 1e-8 are re-orthonormalized with a thin QR on construction.
class SubspaceBasis {
public:
    explicit SubspaceBasis(Eigen::MatrixXd basis);

    int ambient_dim() const noexcept { return static_cast<int>(basis_.rows()); }
    int dim() const noexcept { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& basis() const noexcept { return basis_; }

    /// Dense orthogonal projector basis * basis^T.
    Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }

private:
    Eigen::MatrixXd basis_;
};

Eigen::VectorXd project_subspace(const SubspaceBasis& w, const Eigen::VectorXd& f);

class FusionFrameSpec {
public:
    FusionFrameSpec(std::vector<SubspaceBasis> subspaces, std::vector<double> weights);

    int dim() const noexcept { return subspaces_.front().ambient_dim(); }
    int size() const noexcept { return static_cast<int>(subspaces_.size()); }
    const std::vector<SubspaceBasis>& subspaces() const noexcept { return subspaces_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<SubspaceBasis> subspaces_;
    std::vector<double> weights_;
};

/// S = sum_i w_i^2 P_{W_i}.
Eigen::MatrixXd fusion_frame_operator(const FusionFrameSpec& ff);
Eigen::VectorXd fusion_frame_operator_apply(const FusionFrameSpec& ff, const Eigen::VectorXd& f);
Bounds fusion_frame_bounds(const FusionFrameSpec& ff);

/// S^-1 sum_i w_i^2 P_{W_i} f, which recovers f whenever the subspaces span.
Eigen::VectorXd fusion_reconstruct(const FusionFrameSpec& ff, const Eigen::VectorXd& f);

/// Extreme eigenvalues of any symmetric positive semidefinite operator, with
/// the non-frame rule applied.
Bounds operator_bounds(const Eigen::MatrixXd& s);

} // namespace fusionop::frames
