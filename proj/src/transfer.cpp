#include "fusionop/transfer.hpp"

#include "fusionop/checkpoint.hpp"
#include "fusionop/error.hpp"
#include "fusionop/losses.hpp"
#include "fusionop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fusionop::transfer {

using model::OperatorModel;

std::uint64_t frozen_digest(const OperatorModel& m) {
    const auto tensors = m.frozen();
    return model::tensor_digest(tensors);
}

TransferPlan prepare_transfer(const OperatorModel& source, const Eigen::MatrixXd& source_inputs,
                              bool reinit, std::uint64_t seed) {
    if (source.trainable().empty()) throw InvalidArgument("source model has no trainable tensors");
    if (source_inputs.cols() < 2) {
        throw InvalidArgument("at least two source inputs are needed for the reference batch");
    }
    if (source_inputs.rows() != source.input_width()) {
        throw DimensionError("source inputs do not match the model input width");
    }

    TransferPlan plan;
    plan.model = source.clone();
    if (auto* don = dynamic_cast<model::DeepONetModel*>(plan.model.get())) {
        // The trunk plays the role of the frozen output basis.
        don->freeze_trunk = true;
    }
    plan.reinit_branches = reinit;
    if (reinit) plan.model->reinit_branches(seed);

    for (const auto& t : plan.model->frozen()) plan.frozen_names.push_back(t.name);
    plan.frozen_digest = frozen_digest(*plan.model);

    const Eigen::Index count = std::min<Eigen::Index>(kReferenceBatch, source_inputs.cols());
    plan.source_reference = source.features(source_inputs.leftCols(count));
    plan.bandwidth = model::median_bandwidth(plan.source_reference);
    return plan;
}

model::TrainHistory fine_tune(TransferPlan& plan, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& outputs, const model::TrainConfig& config) {
    if (!plan.model) throw InvalidArgument("transfer plan has no model");
    model::TrainConfig cfg = config;
    if (!(cfg.ceod_bandwidth > 0.0)) cfg.ceod_bandwidth = plan.bandwidth;
    const Eigen::MatrixXd* reference = cfg.ceod_weight > 0.0 ? &plan.source_reference : nullptr;
    auto history = model::train(*plan.model, inputs, outputs, cfg, reference);
    if (frozen_digest(*plan.model) != plan.frozen_digest) {
        throw Error("frozen tensors changed during fine-tuning");
    }
    return history;
}

std::string to_string(Method m) { return m == Method::fine_tune ? "fine-tune" : "scratch"; }

const Row& Table::row(Method method, int sample_size) const {
    for (const auto& r : rows) {
        if (r.method == method && r.sample_size == sample_size) return r;
    }
    throw InvalidArgument("no " + to_string(method) + " row for N=" + std::to_string(sample_size));
}

std::vector<Row> aggregate(const std::vector<Cell>& cells) {
    std::vector<Row> rows;
    std::vector<std::vector<double>> values;
    for (const auto& c : cells) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) {
            return r.method == c.method && r.sample_size == c.sample_size;
        });
        if (it == rows.end()) {
            rows.push_back(Row{c.method, c.sample_size, 0.0, 0.0, 0.0});
            values.emplace_back();
            it = rows.end() - 1;
        }
        values[static_cast<std::size_t>(it - rows.begin())].push_back(c.mse);
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        auto v = values[k];
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        rows[k].median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        double sum = 0.0;
        for (double x : v) sum += x;
        rows[k].mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (double x : v) ss += (x - rows[k].mean) * (x - rows[k].mean);
        rows[k].stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    return rows;
}

Table transfer_experiment(const OperatorModel& source, const Eigen::MatrixXd& source_inputs,
                          const Eigen::MatrixXd& target_train_inputs,
                          const Eigen::MatrixXd& target_train_outputs,
                          const Eigen::MatrixXd& target_test_inputs,
                          const Eigen::MatrixXd& target_test_outputs,
                          const ExperimentOptions& options) {
    const int pool = static_cast<int>(target_train_inputs.cols());
    if (target_train_outputs.cols() != pool) {
        throw DimensionError("target training inputs and outputs differ in sample count");
    }
    if (target_test_inputs.cols() == 0) throw InvalidArgument("target test split is empty");
    if (options.seeds.empty()) throw InvalidArgument("seed list is empty");
    if (options.sample_sizes.empty()) throw InvalidArgument("sample size list is empty");
    for (int n : options.sample_sizes) {
        if (n < 1 || n > pool) {
            throw InvalidArgument("sample size " + std::to_string(n) +
                                  " exceeds the target training pool of " + std::to_string(pool));
        }
    }
    if (!options.scratch_sizes.empty() && !options.scratch_builder) {
        throw InvalidArgument("from-scratch sizes given without a model builder");
    }

    Table table;
    for (int n : options.sample_sizes) {
        for (std::uint64_t seed : options.seeds) {
            const auto perm = permutation(pool, derive_seed(seed, 0x5A5A0000ULL + static_cast<std::uint64_t>(n)));
            Eigen::MatrixXd x(target_train_inputs.rows(), n);
            Eigen::MatrixXd y(target_train_outputs.rows(), n);
            for (int j = 0; j < n; ++j) {
                x.col(j) = target_train_inputs.col(perm[static_cast<std::size_t>(j)]);
                y.col(j) = target_train_outputs.col(perm[static_cast<std::size_t>(j)]);
            }
            model::TrainConfig cfg = options.config;
            cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(n));

            TransferPlan plan = prepare_transfer(source, source_inputs, options.reinit_branches, seed);
            fine_tune(plan, x, y, cfg);
            table.cells.push_back(Cell{Method::fine_tune, n, seed,
                                       model::evaluate(*plan.model, target_test_inputs, target_test_outputs)});

            if (std::find(options.scratch_sizes.begin(), options.scratch_sizes.end(), n) !=
                options.scratch_sizes.end()) {
                auto fresh = options.scratch_builder(x, y, seed);
                model::TrainConfig scfg = cfg;
                scfg.ceod_weight = 0.0;
                model::train(*fresh, x, y, scfg);
                table.cells.push_back(Cell{Method::scratch, n, seed,
                                           model::evaluate(*fresh, target_test_inputs, target_test_outputs)});
            }
        }
    }
    table.rows = aggregate(table.cells);
    return table;
}

std::string format_table(const Table& table) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %8s %14s %14s %14s\n", "method", "N", "median MSE",
                  "mean MSE", "std");
    out << line;
    for (const auto& r : table.rows) {
        std::snprintf(line, sizeof line, "%-10s %8d %14.6e %14.6e %14.6e\n", to_string(r.method).c_str(),
                      r.sample_size, r.median, r.mean, r.stddev);
        out << line;
    }
    return out.str();
}

} // namespace fusionop::transfer
