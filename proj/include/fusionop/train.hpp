#pragma once

#include "fusionop/model.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fusionop::model {

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 500;
    int batch_size = 32;
    double lambda = 1e-6;
    double ceod_weight = 0.0;
    double ceod_bandwidth = 0.0; // <= 0 selects the median-distance heuristic
    std::uint64_t seed = 0;
    std::string optimizer = "adam";
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// Adam with bias correction over a fixed list of parameter tensors.
class Adam {
public:
    Adam(const std::vector<ParamRef>& params, double lr, double beta1, double beta2, double eps);

    void step(std::vector<ParamRef>& params, const Gradients& grads);
    long steps() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Eigen::VectorXd> m_, v_;
};

struct TrainHistory {
    std::vector<double> epoch_loss;
};

/// Mini-batch training of every trainable tensor under
/// regression + lambda ||theta||^2 (+ ceod_weight * discrepancy against
/// `source_reference` when given). Batches follow a seeded shuffle per epoch;
/// the per-epoch loss is the sample-weighted mean of the batch losses.
/// Throws NumericalError as soon as a loss or parameter turns non-finite.
TrainHistory train(OperatorModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& outputs, const TrainConfig& config,
                   const Eigen::MatrixXd* source_reference = nullptr);

/// Mean squared error over the whole dataset, no updates.
double evaluate(const OperatorModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& outputs);

/// Predictions in fixed-size chunks to bound memory.
Eigen::MatrixXd predict_all(const OperatorModel& model, const Eigen::MatrixXd& inputs);

} // namespace fusionop::model
