#include "fusionop/train.hpp"

#include "fusionop/error.hpp"
#include "fusionop/losses.hpp"
#include "fusionop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fusionop::model {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidArgument("learning rate must be finite and nonnegative");
    }
    if (epochs < 0) throw InvalidArgument("epochs must be nonnegative");
    if (batch_size < 1) throw InvalidArgument("batch size must be positive");
    if (!(lambda >= 0.0)) throw InvalidArgument("regularization coefficient must be nonnegative");
    if (!(ceod_weight >= 0.0)) throw InvalidArgument("ceod weight must be nonnegative");
    if (optimizer != "adam") throw InvalidArgument("unsupported optimizer '" + optimizer + "'");
}

Adam::Adam(const std::vector<ParamRef>& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params) {
        m_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.values.size())));
        v_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
}

void Adam::step(std::vector<ParamRef>& params, const Gradients& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw DimensionError("optimizer state does not match the parameter list");
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const double step = lr_ / c1;
    for (std::size_t k = 0; k < params.size(); ++k) {
        Eigen::Map<Eigen::VectorXd> theta(params[k].values.data(),
                                          static_cast<Eigen::Index>(params[k].values.size()));
        if (grads[k].size() != theta.size()) {
            throw DimensionError("gradient for " + params[k].name + " has the wrong length");
        }
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grads[k];
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grads[k].cwiseAbs2();
        theta.array() -= step * m_[k].array() / ((v_[k].array() / c2).sqrt() + eps_);
    }
}

TrainHistory train(OperatorModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& outputs, const TrainConfig& config,
                   const Eigen::MatrixXd* source_reference) {
    config.validate();
    const int n = static_cast<int>(inputs.cols());
    if (n == 0) throw InvalidArgument("training set is empty");
    if (outputs.cols() != n) throw DimensionError("inputs and outputs differ in sample count");
    if (inputs.rows() != model.input_width() || outputs.rows() != model.output_width()) {
        throw DimensionError("training data shape does not match the model");
    }

    const bool use_ceod = source_reference != nullptr && config.ceod_weight > 0.0;
    double bandwidth = config.ceod_bandwidth;
    if (use_ceod && !(bandwidth > 0.0)) bandwidth = median_bandwidth(*source_reference);

    auto params = model.trainable();
    Adam adam(params, config.learning_rate, config.beta1, config.beta2, config.epsilon);

    TrainHistory history;
    history.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));
    std::vector<int> order(static_cast<std::size_t>(n));
    Gradients grads;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        CounterRng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        shuffle(order, rng);

        double epoch_sum = 0.0;
        for (int start = 0; start < n; start += config.batch_size) {
            const int count = std::min(config.batch_size, n - start);
            Eigen::MatrixXd xb(inputs.rows(), count);
            Eigen::MatrixXd yb(outputs.rows(), count);
            for (int j = 0; j < count; ++j) {
                xb.col(j) = inputs.col(order[static_cast<std::size_t>(start + j)]);
                yb.col(j) = outputs.col(order[static_cast<std::size_t>(start + j)]);
            }

            LossFn loss = [&](const Eigen::MatrixXd& pred, const Eigen::MatrixXd& feats,
                              Eigen::MatrixXd& d_pred, Eigen::MatrixXd& d_feats) {
                double value = regression_loss(pred, yb, d_pred);
                if (use_ceod) {
                    Eigen::MatrixXd d_ceod;
                    value += config.ceod_weight *
                             ceod_loss(*source_reference, feats, bandwidth, d_ceod);
                    d_feats = config.ceod_weight * d_ceod;
                }
                return value;
            };
            double value = model.loss_and_gradients(xb, loss, grads);

            if (config.lambda != 0.0) {
                for (std::size_t k = 0; k < params.size(); ++k) {
                    Eigen::Map<const Eigen::VectorXd> theta(
                        params[k].values.data(), static_cast<Eigen::Index>(params[k].values.size()));
                    value += config.lambda * theta.squaredNorm();
                    grads[k] += (2.0 * config.lambda) * theta;
                }
            }
            if (!std::isfinite(value)) {
                throw NumericalError("training diverged: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", batch starting at " +
                                     std::to_string(start) + " (try a smaller learning rate)");
            }
            adam.step(params, grads);
            epoch_sum += value * count;
        }

        for (const auto& p : params) {
            for (double v : p.values) {
                if (!std::isfinite(v)) {
                    throw NumericalError("training diverged: parameter " + p.name +
                                         " became non-finite at epoch " + std::to_string(epoch));
                }
            }
        }
        history.epoch_loss.push_back(epoch_sum / n);
    }
    return history;
}

Eigen::MatrixXd predict_all(const OperatorModel& model, const Eigen::MatrixXd& inputs) {
    constexpr Eigen::Index chunk = 256;
    Eigen::MatrixXd out(model.output_width(), inputs.cols());
    for (Eigen::Index start = 0; start < inputs.cols(); start += chunk) {
        const Eigen::Index count = std::min(chunk, inputs.cols() - start);
        out.middleCols(start, count) = model.predict(inputs.middleCols(start, count));
    }
    return out;
}

double evaluate(const OperatorModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& outputs) {
    if (inputs.cols() != outputs.cols() || inputs.cols() == 0) {
        throw DimensionError("evaluation needs a nonempty, equal number of inputs and outputs");
    }
    return regression_loss(predict_all(model, inputs), outputs);
}

} // namespace fusionop::model
