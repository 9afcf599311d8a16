#include "fusionop/losses.hpp"

#include "fusionop/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fusionop::model {

namespace {

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("prediction is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", target is " +
                             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    if (a.size() == 0) throw DimensionError("empty prediction batch");
}

// Pairwise squared distances between the columns of a and b.
Eigen::MatrixXd sq_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd an = a.colwise().squaredNorm().transpose();
    const Eigen::RowVectorXd bn = b.colwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * (a.transpose() * b);
    d.colwise() += an;
    d.rowwise() += bn;
    return d.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h) {
    return (sq_distances(a, b) / (-2.0 * h * h)).array().exp().matrix();
}

void check_ceod_args(const Eigen::MatrixXd& s, const Eigen::MatrixXd& t, double h) {
    if (!(h > 0.0)) throw InvalidArgument("kernel bandwidth must be positive");
    if (s.cols() == 0 || t.cols() == 0) throw InvalidArgument("discrepancy needs nonempty batches");
    if (s.rows() != t.rows()) throw DimensionError("feature widths of the two batches differ");
}

} // namespace

double regression_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    check_same_shape(pred, target);
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double regression_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                       Eigen::MatrixXd& d_pred) {
    check_same_shape(pred, target);
    const double denom = static_cast<double>(pred.size());
    d_pred = pred - target;
    const double value = d_pred.squaredNorm() / denom;
    d_pred *= 2.0 / denom;
    return value;
}

double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double bandwidth) {
    return std::exp(-(a - b).squaredNorm() / (2.0 * bandwidth * bandwidth));
}

double ceod_loss(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double bandwidth) {
    check_ceod_args(source, target, bandwidth);
    return kernel_matrix(source, source, bandwidth).mean() +
           kernel_matrix(target, target, bandwidth).mean() -
           2.0 * kernel_matrix(source, target, bandwidth).mean();
}

double ceod_loss(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double bandwidth,
                 Eigen::MatrixXd& d_target) {
    check_ceod_args(source, target, bandwidth);
    const double ns = static_cast<double>(source.cols());
    const double nt = static_cast<double>(target.cols());
    const double h2 = bandwidth * bandwidth;
    const Eigen::MatrixXd kss = kernel_matrix(source, source, bandwidth);
    const Eigen::MatrixXd ktt = kernel_matrix(target, target, bandwidth);
    const Eigen::MatrixXd kst = kernel_matrix(source, target, bandwidth); // ns x nt

    // d k(a, t_j) / d t_j = k(a, t_j) (a - t_j) / h^2
    // term T,T:  (1/nt^2) sum_{a,b} k(t_a, t_b); each pair contributes twice.
    const Eigen::VectorXd ktt_sum = ktt.colwise().sum().transpose();
    const Eigen::VectorXd kst_sum = kst.colwise().sum().transpose();
    d_target = (2.0 / (nt * nt * h2)) * (target * ktt - target * ktt_sum.asDiagonal());
    d_target -= (2.0 / (ns * nt * h2)) * (source * kst - target * kst_sum.asDiagonal());

    return kss.mean() + ktt.mean() - 2.0 * kst.mean();
}

double median_bandwidth(const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.cols();
    if (n < 2) return 1.0;
    const Eigen::MatrixXd d2 = sq_distances(features, features);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) dist.push_back(std::sqrt(d2(i, j)));
    }
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    const double h = *mid;
    return h > 0.0 && std::isfinite(h) ? h : 1.0;
}

double parameter_norm_sq(const OperatorModel& model) {
    double s = 0.0;
    for (const auto& p : model.trainable()) {
        for (double v : p.values) s += v * v;
    }
    return s;
}

double total_loss(const OperatorModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const Eigen::MatrixXd* source_reference,
                  const LossWeights& weights) {
    double value = regression_loss(model.predict(inputs), targets);
    if (weights.lambda != 0.0) value += weights.lambda * parameter_norm_sq(model);
    if (source_reference && weights.ceod_weight != 0.0) {
        value += weights.ceod_weight *
                 ceod_loss(*source_reference, model.features(inputs), weights.bandwidth);
    }
    return value;
}

} // namespace fusionop::model
