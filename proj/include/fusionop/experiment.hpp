#pragma once

#include "fusionop/model.hpp"
#include "fusionop/pde_data.hpp"
#include "fusionop/train.hpp"
#include "fusionop/transfer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fusionop::experiment {

inline constexpr int kMetricsSchemaVersion = 1;

/// Every knob of a generate / train / transfer run. Unset JSON keys fall back
/// to the scenario defaults from `default_config`.
struct ExperimentConfig {
    std::string scenario = "darcy-dist-shift";
    std::string model = "ff-pod-deeponet";

    // Data
    int resolution = 32;
    int n_source_train = 1000;
    int n_source_test = 200;
    int n_target_train = 600;
    int n_target_test = 200;
    std::uint64_t data_seed = 0;
    /// Field overrides applied to the scenario's source / target specs.
    nlohmann::json source_overrides = nlohmann::json::object();
    nlohmann::json target_overrides = nlohmann::json::object();

    // Architecture
    int n_subspaces = 20;
    int modes_per_subspace = 80;
    int features_per_subspace = 40;
    double scale_min = 1.0;
    double scale_max = 20.0;
    std::vector<int> hidden = {128, 128};
    std::vector<int> trunk_hidden = {128, 128};
    int deeponet_basis = 80;
    std::string activation = "tanh";
    std::string combine = "sum";
    bool inverse_operator = false;

    // Optimization
    model::TrainConfig train;         // source training
    int transfer_epochs = 200;
    double transfer_ceod_weight = 1e-3;
    bool reinit_branches = false;

    std::vector<int> sample_sizes = {20, 50, 100, 500};
    std::vector<int> scratch_sizes;   // sizes that also get a from-scratch baseline
    std::vector<std::uint64_t> seeds = {0};

    void validate() const;
};

const std::vector<std::string>& scenario_names();
const std::vector<std::string>& model_names();

/// Default settings for a scenario (subspace / mode counts, resolutions,
/// transfer sample sizes).
ExperimentConfig default_config(const std::string& scenario);

/// Defaults of `scenario` (or of the file's "scenario" key) overlaid with `j`.
/// Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& scenario = "");
nlohmann::json to_json(const ExperimentConfig& c);

/// FNV-1a of the canonical JSON serialization.
std::string config_hash(const ExperimentConfig& c);

pde::ScenarioSpec source_spec(const ExperimentConfig& c);
pde::ScenarioSpec target_spec(const ExperimentConfig& c);

/// Model named by c.model, built from training pairs on `grid`.
std::unique_ptr<model::OperatorModel> build_model(const ExperimentConfig& c,
                                                  const Eigen::MatrixXd& inputs,
                                                  const Eigen::MatrixXd& outputs, const Grid& grid,
                                                  std::uint64_t seed);

struct SplitData {
    pde::PairedDataset train;
    pde::PairedDataset test;
};

SplitData split(const pde::PairedDataset& ds, int n_train, int n_test);

// ---------------------------------------------------------------------------
// Commands. Each writes its artifacts under `out` and a short summary to `log`.

void cmd_generate(const ExperimentConfig& c, const std::filesystem::path& out, std::ostream& log);

/// Trains c.model on the source split of `data` for every seed; writes
/// checkpoint-<model>-seed<s>/ and metrics-train-<model>-seed<s>.json.
void cmd_train(const ExperimentConfig& c, const std::filesystem::path& data,
               const std::filesystem::path& out, std::ostream& log);

/// Fine-tunes the source checkpoint of every seed (training it first when
/// absent) on target subsamples; writes per-seed metrics plus
/// transfer-<model>.txt / transfer-<model>.json.
void cmd_transfer(const ExperimentConfig& c, const std::filesystem::path& data,
                  const std::filesystem::path& out, std::ostream& log);

/// Consolidated comparison table (one per scenario, methods as columns).
std::string cmd_report(const std::vector<std::filesystem::path>& metrics_files);

std::vector<std::filesystem::path> cmd_encode_demo(const std::filesystem::path& dataset, int index,
                                                   int m, double scale, std::uint64_t seed,
                                                   const std::filesystem::path& out);

/// Metrics record {schema_version, scenario, model, seed, config_hash,
/// source_mse?, rows: [{sample_size, mse}]}.
nlohmann::json metrics_record(const ExperimentConfig& c, std::uint64_t seed,
                              const double* source_mse,
                              const std::vector<std::pair<int, double>>& rows);

} // namespace fusionop::experiment
