#pragma once

#include "fusionop/model.hpp"
#include "fusionop/train.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fusionop::transfer {

/// Target model plus the bookkeeping needed to fine-tune it.
struct TransferPlan {
    std::unique_ptr<model::OperatorModel> model;
    bool reinit_branches = false;
    std::vector<std::string> frozen_names;
    std::uint64_t frozen_digest = 0;
    /// Branch features of the source model on a fixed batch of source inputs.
    Eigen::MatrixXd source_reference;
    /// Median pairwise distance of the reference features.
    double bandwidth = 1.0;
};

inline constexpr int kReferenceBatch = 256;

/// Deep-copies `source`; warm-starts (or, with `reinit`, re-draws from `seed`)
/// the branch nets, always keeps the fusion weights. The reference batch holds
/// the source features of the first min(256, N) columns of `source_inputs`.
TransferPlan prepare_transfer(const model::OperatorModel& source,
                              const Eigen::MatrixXd& source_inputs, bool reinit,
                              std::uint64_t seed = 0);

/// Optimizes only the trainable tensors of the plan's model under
/// regression + lambda ||theta||^2 + ceod_weight * discrepancy. Throws if a
/// frozen tensor changed.
model::TrainHistory fine_tune(TransferPlan& plan, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& outputs, const model::TrainConfig& config);

/// Digest of the model's frozen tensors.
std::uint64_t frozen_digest(const model::OperatorModel& model);

/// Builds a fresh model from target training pairs (used for the from-scratch
/// baseline).
using ModelBuilder = std::function<std::unique_ptr<model::OperatorModel>(
    const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs, std::uint64_t seed)>;

enum class Method { fine_tune, scratch };
std::string to_string(Method m);

struct Cell {
    Method method = Method::fine_tune;
    int sample_size = 0;
    std::uint64_t seed = 0;
    double mse = 0.0;
};

struct Row {
    Method method = Method::fine_tune;
    int sample_size = 0;
    double median = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct Table {
    std::vector<Cell> cells;
    std::vector<Row> rows;

    /// Row for (method, N); throws if absent.
    const Row& row(Method method, int sample_size) const;
};

struct ExperimentOptions {
    std::vector<int> sample_sizes;
    std::vector<std::uint64_t> seeds;
    model::TrainConfig config;
    bool reinit_branches = false;
    /// N values that also get a from-scratch run; requires `scratch_builder`.
    std::vector<int> scratch_sizes;
    ModelBuilder scratch_builder;
};

/// For every N and seed: draw N target training pairs (seeded permutation of
/// the pool), fine-tune a copy of `source` on them and evaluate on the fixed
/// test split. Seed s drives the subsample, the branch re-initialization and
/// the batch order.
Table transfer_experiment(const model::OperatorModel& source, const Eigen::MatrixXd& source_inputs,
                          const Eigen::MatrixXd& target_train_inputs,
                          const Eigen::MatrixXd& target_train_outputs,
                          const Eigen::MatrixXd& target_test_inputs,
                          const Eigen::MatrixXd& target_test_outputs,
                          const ExperimentOptions& options);

/// Aggregates cells into per-(method, N) rows; rows follow first appearance.
std::vector<Row> aggregate(const std::vector<Cell>& cells);

/// Plain-text table: one line per N, median and mean +- std per method.
std::string format_table(const Table& table);

} // namespace fusionop::transfer
