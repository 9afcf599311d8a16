#pragma once

#include "fusionop/model.hpp"

#include <Eigen/Dense>

namespace fusionop::model {

/// (1/N) sum_i ||pred_i - target_i||^2 / p over columns.
double regression_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// Regression loss and its gradient with respect to `pred`.
double regression_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                       Eigen::MatrixXd& d_pred);

/// Gaussian kernel exp(-||a - b||^2 / (2 h^2)).
double gaussian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double bandwidth);

/// Squared maximum mean discrepancy between two batches of feature columns
/// under the Gaussian kernel:
///   mean k(S,S) + mean k(T,T) - 2 mean k(S,T).
double ceod_loss(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double bandwidth);

/// Same, also returning the gradient with respect to the target features.
double ceod_loss(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target, double bandwidth,
                 Eigen::MatrixXd& d_target);

/// Median pairwise Euclidean distance between columns; 1 when degenerate.
double median_bandwidth(const Eigen::MatrixXd& features);

/// Squared L2 norm of every trainable tensor.
double parameter_norm_sq(const OperatorModel& model);

struct LossWeights {
    double lambda = 0.0;      // weight of the parameter-norm regularizer
    double ceod_weight = 0.0; // weight of the discrepancy term
    double bandwidth = 1.0;
};

/// regression + lambda ||theta||^2 + ceod_weight * ceod(source_reference, features).
/// The discrepancy term is skipped when `source_reference` is null.
double total_loss(const OperatorModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const Eigen::MatrixXd* source_reference,
                  const LossWeights& weights);

} // namespace fusionop::model
