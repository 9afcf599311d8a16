#include "fusionop/pod.hpp"

#include "fusionop/error.hpp"

#include <algorithm>
#include <string>

namespace fusionop::pod {

namespace {

void apply_sign_convention(Eigen::MatrixXd& modes) {
    for (Eigen::Index j = 0; j < modes.cols(); ++j) {
        Eigen::Index at = 0;
        modes.col(j).cwiseAbs().maxCoeff(&at);
        if (modes(at, j) < 0.0) modes.col(j) *= -1.0;
    }
}

int count_rank(const Eigen::VectorXd& sv) {
    if (sv.size() == 0 || sv[0] <= 0.0) return 0;
    int rank = 0;
    while (rank < sv.size() && sv[rank] >= 1e-12 * sv[0]) ++rank;
    return rank;
}

// Centered SVD of `data`; returns (mean, top-r left singular vectors, sigmas).
PODBasis centered_svd(const Eigen::MatrixXd& data, int r) {
    PODBasis out;
    out.mean_mode = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - out.mean_mode;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    out.modes = svd.matrixU().leftCols(r);
    out.singular_values = svd.singularValues().head(r);
    return out;
}

} // namespace

PODBasis compute_pod(const Eigen::MatrixXd& snapshots, int r) {
    const auto p = snapshots.rows();
    const auto n = snapshots.cols();
    if (r < 1 || r > std::min(p, n)) {
        throw InvalidArgument("POD mode count " + std::to_string(r) + " outside [1, " +
                              std::to_string(std::min(p, n)) + "]");
    }
    if (!snapshots.allFinite()) throw NumericalError("snapshots contain non-finite values");
    PODBasis out = centered_svd(snapshots, r);
    apply_sign_convention(out.modes);
    out.numerical_rank = count_rank(out.singular_values);
    return out;
}

PODBasis compute_pod_in_subspace(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& snapshots,
                                 int r) {
    if (basis.rows() != snapshots.rows()) {
        throw DimensionError("subspace basis and snapshots have different lengths");
    }
    if (r < 1) throw InvalidArgument("POD mode count must be positive");
    const Eigen::MatrixXd reduced = basis.transpose() * snapshots;
    const int r_eff = static_cast<int>(std::min<Eigen::Index>(
        {static_cast<Eigen::Index>(r), reduced.rows(), reduced.cols()}));
    PODBasis local = centered_svd(reduced, r_eff);

    PODBasis out;
    out.mean_mode = basis * local.mean_mode;
    out.modes = basis * local.modes;
    out.singular_values = std::move(local.singular_values);
    apply_sign_convention(out.modes);
    out.numerical_rank = count_rank(out.singular_values);
    return out;
}

Eigen::VectorXd project(const PODBasis& basis, const Eigen::VectorXd& f) {
    if (f.size() != basis.dim()) {
        throw DimensionError("POD project: function length " + std::to_string(f.size()) +
                             ", basis length " + std::to_string(basis.dim()));
    }
    return basis.modes.transpose() * (f - basis.mean_mode);
}

Eigen::VectorXd reconstruct(const PODBasis& basis, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != basis.size()) {
        throw DimensionError("POD reconstruct: " + std::to_string(coeffs.size()) +
                             " coefficients for " + std::to_string(basis.size()) + " modes");
    }
    return basis.mean_mode + basis.modes * coeffs;
}

double centered_energy(const Eigen::MatrixXd& snapshots) {
    const Eigen::VectorXd mean = snapshots.rowwise().mean();
    return (snapshots.colwise() - mean).squaredNorm();
}

double energy_fraction(const PODBasis& basis, double total_energy) {
    if (!(total_energy > 0.0)) throw InvalidArgument("total energy must be positive");
    return basis.singular_values.squaredNorm() / total_energy;
}

} // namespace fusionop::pod
