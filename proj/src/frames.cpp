#include "fusionop/frames.hpp"

#include "fusionop/error.hpp"

#include <cmath>
#include <string>

namespace fusionop::frames {

namespace {

void check_dim(int expected, Eigen::Index got, const char* what) {
    if (got != expected) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                             ", got " + std::to_string(got));
    }
}

Eigen::LLT<Eigen::MatrixXd> factor_or_throw(const Eigen::MatrixXd& s, const char* what) {
    const Bounds b = operator_bounds(s);
    if (!b.is_frame) {
        throw NumericalError(std::string(what) + ": operator is singular (lower bound " +
                             std::to_string(b.lower) + ", upper bound " +
                             std::to_string(b.upper) + ")");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(what) + ": Cholesky factorization failed");
    }
    return llt;
}

} // namespace

FrameSpec::FrameSpec(Eigen::MatrixXd vectors) : vectors_(std::move(vectors)) {
    if (vectors_.cols() == 0 || vectors_.rows() == 0) {
        throw InvalidArgument("frame must contain at least one nonempty vector");
    }
    if (!vectors_.allFinite()) throw InvalidArgument("frame vectors must be finite");
}

Eigen::VectorXd analysis(const FrameSpec& frame, const Eigen::VectorXd& f) {
    check_dim(frame.dim(), f.size(), "analysis");
    return frame.vectors().transpose() * f;
}

Eigen::VectorXd synthesis(const FrameSpec& frame, const Eigen::VectorXd& coeffs) {
    check_dim(frame.size(), coeffs.size(), "synthesis");
    return frame.vectors() * coeffs;
}

Eigen::MatrixXd frame_operator(const FrameSpec& frame) {
    return frame.vectors() * frame.vectors().transpose();
}

Eigen::VectorXd frame_operator_apply(const FrameSpec& frame, const Eigen::VectorXd& f) {
    check_dim(frame.dim(), f.size(), "frame_operator_apply");
    return frame.vectors() * (frame.vectors().transpose() * f);
}

Bounds operator_bounds(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
    const auto& ev = eig.eigenvalues();
    Bounds b;
    b.upper = ev.maxCoeff();
    b.lower = ev.minCoeff();
    b.is_frame = b.upper > 0.0 && b.lower >= kNonFrameTolerance * b.upper;
    if (!b.is_frame) b.lower = 0.0;
    return b;
}

Bounds frame_bounds(const FrameSpec& frame) { return operator_bounds(frame_operator(frame)); }

FrameSpec dual_frame(const FrameSpec& frame) {
    auto llt = factor_or_throw(frame_operator(frame), "dual_frame");
    return FrameSpec(llt.solve(frame.vectors()));
}

Eigen::VectorXd reconstruct(const FrameSpec& frame, const Eigen::VectorXd& coeffs) {
    check_dim(frame.size(), coeffs.size(), "reconstruct");
    auto llt = factor_or_throw(frame_operator(frame), "reconstruct");
    return llt.solve(frame.vectors() * coeffs);
}

SubspaceBasis::SubspaceBasis(Eigen::MatrixXd basis) : basis_(std::move(basis)) {
    if (basis_.rows() == 0 || basis_.cols() == 0) {
        throw InvalidArgument("subspace basis must be nonempty");
    }
    if (basis_.cols() > basis_.rows()) {
        throw DimensionError("subspace basis has more columns than the ambient dimension");
    }
    if (!basis_.allFinite()) throw InvalidArgument("subspace basis must be finite");
    const Eigen::Index k = basis_.cols();
    const double drift =
        (basis_.transpose() * basis_ - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    if (drift > 1e-8) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_);
        qr.setThreshold(1e-10);
        const Eigen::Index rank = qr.rank();
        if (rank == 0) throw InvalidArgument("subspace basis has rank zero");
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis_.rows(), rank);
        basis_ = std::move(q);
    }
}

Eigen::VectorXd project_subspace(const SubspaceBasis& w, const Eigen::VectorXd& f) {
    check_dim(w.ambient_dim(), f.size(), "project_subspace");
    return w.basis() * (w.basis().transpose() * f);
}

FusionFrameSpec::FusionFrameSpec(std::vector<SubspaceBasis> subspaces, std::vector<double> weights)
    : subspaces_(std::move(subspaces)), weights_(std::move(weights)) {
    if (subspaces_.empty()) throw InvalidArgument("fusion frame needs at least one subspace");
    if (subspaces_.size() != weights_.size()) {
        throw DimensionError("fusion frame: " + std::to_string(subspaces_.size()) +
                             " subspaces but " + std::to_string(weights_.size()) + " weights");
    }
    const int d = subspaces_.front().ambient_dim();
    for (std::size_t i = 0; i < subspaces_.size(); ++i) {
        if (subspaces_[i].ambient_dim() != d) {
            throw DimensionError("fusion frame subspaces live in different ambient spaces");
        }
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw InvalidArgument("fusion frame weights must be finite and nonnegative");
        }
    }
}

Eigen::MatrixXd fusion_frame_operator(const FusionFrameSpec& ff) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ff.dim(), ff.dim());
    for (int i = 0; i < ff.size(); ++i) {
        const auto& q = ff.subspaces()[i].basis();
        const double w2 = ff.weights()[i] * ff.weights()[i];
        s.noalias() += w2 * q * q.transpose();
    }
    return s;
}

Eigen::VectorXd fusion_frame_operator_apply(const FusionFrameSpec& ff, const Eigen::VectorXd& f) {
    check_dim(ff.dim(), f.size(), "fusion_frame_operator_apply");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ff.dim());
    for (int i = 0; i < ff.size(); ++i) {
        const double w2 = ff.weights()[i] * ff.weights()[i];
        out += w2 * project_subspace(ff.subspaces()[i], f);
    }
    return out;
}

Bounds fusion_frame_bounds(const FusionFrameSpec& ff) {
    return operator_bounds(fusion_frame_operator(ff));
}

Eigen::VectorXd fusion_reconstruct(const FusionFrameSpec& ff, const Eigen::VectorXd& f) {
    check_dim(ff.dim(), f.size(), "fusion_reconstruct");
    auto llt = factor_or_throw(fusion_frame_operator(ff), "fusion_reconstruct");
    return llt.solve(fusion_frame_operator_apply(ff, f));
}

} // namespace fusionop::frames
