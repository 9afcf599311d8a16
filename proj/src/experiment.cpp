#include "fusionop/experiment.hpp"

#include "fusionop/checkpoint.hpp"
#include "fusionop/error.hpp"
#include "fusionop/fourier_features.hpp"
#include "fusionop/io_util.hpp"
#include "fusionop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace fusionop::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"darcy-dist-shift", "darcy-forcing", "burgers-nu",
                                                   "elasticity-l"};
    return names;
}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {"pod-deeponet", "deeponet", "ff-pod-deeponet"};
    return names;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void require_positive(int v, const char* what) {
    if (v < 1) throw InvalidArgument(std::string(what) + " must be positive");
}

} // namespace

void ExperimentConfig::validate() const {
    if (!contains(scenario_names(), scenario)) throw InvalidArgument("unknown scenario '" + scenario + "'");
    if (!contains(model_names(), model)) throw InvalidArgument("unknown model '" + model + "'");
    require_positive(resolution, "resolution");
    require_positive(n_source_train, "n_source_train");
    require_positive(n_source_test, "n_source_test");
    require_positive(n_target_train, "n_target_train");
    require_positive(n_target_test, "n_target_test");
    require_positive(n_subspaces, "n_subspaces");
    require_positive(modes_per_subspace, "modes_per_subspace");
    require_positive(features_per_subspace, "features_per_subspace");
    require_positive(deeponet_basis, "deeponet_basis");
    if (!(scale_min > 0.0) || !(scale_max >= scale_min)) {
        throw InvalidArgument("frequency scales need 0 < scale_min <= scale_max");
    }
    for (int h : hidden) require_positive(h, "hidden width");
    for (int h : trunk_hidden) require_positive(h, "trunk width");
    nn::parse_activation(activation);
    model::parse_combine_rule(combine);
    train.validate();
    if (transfer_epochs < 0) throw InvalidArgument("transfer_epochs must be nonnegative");
    if (!(transfer_ceod_weight >= 0.0)) throw InvalidArgument("transfer_ceod_weight must be nonnegative");
    if (seeds.empty()) throw InvalidArgument("seed list is empty");
    if (sample_sizes.empty()) throw InvalidArgument("sample size list is empty");
    for (int n : sample_sizes) {
        if (n < 1 || n > n_target_train) {
            throw InvalidArgument("sample size " + std::to_string(n) + " outside [1, n_target_train=" +
                                  std::to_string(n_target_train) + "]");
        }
    }
    for (int n : scratch_sizes) {
        if (std::find(sample_sizes.begin(), sample_sizes.end(), n) == sample_sizes.end()) {
            throw InvalidArgument("scratch size " + std::to_string(n) + " is not among sample_sizes");
        }
    }
}

ExperimentConfig default_config(const std::string& scenario) {
    if (!contains(scenario_names(), scenario)) throw InvalidArgument("unknown scenario '" + scenario + "'");
    ExperimentConfig c;
    c.scenario = scenario;
    if (scenario == "burgers-nu") {
        c.resolution = 128;
        c.modes_per_subspace = 30;
        c.deeponet_basis = 30;
        c.sample_sizes = {20, 50, 100};
    } else if (scenario == "elasticity-l") {
        c.sample_sizes = {20, 50, 100};
    }
    return c;
}

namespace {

json train_to_json(const model::TrainConfig& t) {
    return {{"learning_rate", t.learning_rate}, {"epochs", t.epochs},
            {"batch_size", t.batch_size},       {"lambda", t.lambda},
            {"ceod_weight", t.ceod_weight},     {"ceod_bandwidth", t.ceod_bandwidth},
            {"optimizer", t.optimizer}};
}

void train_from_json(model::TrainConfig& t, const json& j) {
    for (const auto& [key, v] : j.items()) {
        if (key == "learning_rate") t.learning_rate = v.get<double>();
        else if (key == "epochs") t.epochs = v.get<int>();
        else if (key == "batch_size") t.batch_size = v.get<int>();
        else if (key == "lambda") t.lambda = v.get<double>();
        else if (key == "ceod_weight") t.ceod_weight = v.get<double>();
        else if (key == "ceod_bandwidth") t.ceod_bandwidth = v.get<double>();
        else if (key == "optimizer") t.optimizer = v.get<std::string>();
        else throw InvalidArgument("unknown train config key '" + key + "'");
    }
}

} // namespace

ExperimentConfig config_from_json(const json& j, const std::string& scenario) {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    std::string name = scenario;
    if (name.empty()) name = j.value("scenario", std::string("darcy-dist-shift"));
    ExperimentConfig c = default_config(name);
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "scenario") continue;
            if (key == "model") c.model = v.get<std::string>();
            else if (key == "resolution") c.resolution = v.get<int>();
            else if (key == "n_source_train") c.n_source_train = v.get<int>();
            else if (key == "n_source_test") c.n_source_test = v.get<int>();
            else if (key == "n_target_train") c.n_target_train = v.get<int>();
            else if (key == "n_target_test") c.n_target_test = v.get<int>();
            else if (key == "data_seed") c.data_seed = v.get<std::uint64_t>();
            else if (key == "source_overrides") c.source_overrides = v;
            else if (key == "target_overrides") c.target_overrides = v;
            else if (key == "n_subspaces") c.n_subspaces = v.get<int>();
            else if (key == "modes_per_subspace") c.modes_per_subspace = v.get<int>();
            else if (key == "features_per_subspace") c.features_per_subspace = v.get<int>();
            else if (key == "scale_min") c.scale_min = v.get<double>();
            else if (key == "scale_max") c.scale_max = v.get<double>();
            else if (key == "hidden") c.hidden = v.get<std::vector<int>>();
            else if (key == "trunk_hidden") c.trunk_hidden = v.get<std::vector<int>>();
            else if (key == "deeponet_basis") c.deeponet_basis = v.get<int>();
            else if (key == "activation") c.activation = v.get<std::string>();
            else if (key == "combine") c.combine = v.get<std::string>();
            else if (key == "inverse_operator") c.inverse_operator = v.get<bool>();
            else if (key == "train") train_from_json(c.train, v);
            else if (key == "transfer_epochs") c.transfer_epochs = v.get<int>();
            else if (key == "transfer_ceod_weight") c.transfer_ceod_weight = v.get<double>();
            else if (key == "reinit_branches") c.reinit_branches = v.get<bool>();
            else if (key == "sample_sizes") c.sample_sizes = v.get<std::vector<int>>();
            else if (key == "scratch_sizes") c.scratch_sizes = v.get<std::vector<int>>();
            else if (key == "seeds") c.seeds = v.get<std::vector<std::uint64_t>>();
            else throw InvalidArgument("unknown config key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    return {{"scenario", c.scenario},
            {"model", c.model},
            {"resolution", c.resolution},
            {"n_source_train", c.n_source_train},
            {"n_source_test", c.n_source_test},
            {"n_target_train", c.n_target_train},
            {"n_target_test", c.n_target_test},
            {"data_seed", c.data_seed},
            {"source_overrides", c.source_overrides},
            {"target_overrides", c.target_overrides},
            {"n_subspaces", c.n_subspaces},
            {"modes_per_subspace", c.modes_per_subspace},
            {"features_per_subspace", c.features_per_subspace},
            {"scale_min", c.scale_min},
            {"scale_max", c.scale_max},
            {"hidden", c.hidden},
            {"trunk_hidden", c.trunk_hidden},
            {"deeponet_basis", c.deeponet_basis},
            {"activation", c.activation},
            {"combine", c.combine},
            {"inverse_operator", c.inverse_operator},
            {"train", train_to_json(c.train)},
            {"transfer_epochs", c.transfer_epochs},
            {"transfer_ceod_weight", c.transfer_ceod_weight},
            {"reinit_branches", c.reinit_branches},
            {"sample_sizes", c.sample_sizes},
            {"scratch_sizes", c.scratch_sizes},
            {"seeds", c.seeds}};
}

std::string config_hash(const ExperimentConfig& c) { return io::hex64(io::fnv1a(to_json(c).dump())); }

namespace {

void apply_overrides(pde::ScenarioSpec& s, const json& o) {
    for (const auto& [key, v] : o.items()) {
        if (key == "alpha") s.alpha = v.get<double>();
        else if (key == "tau") s.tau = v.get<double>();
        else if (key == "forcing") s.forcing = v.get<std::string>();
        else if (key == "nu") s.nu = v.get<double>();
        else if (key == "u0_length") s.u0_length = v.get<double>();
        else if (key == "t_final") s.t_final = v.get<double>();
        else if (key == "length") s.length = v.get<double>();
        else if (key == "youngs") s.youngs = v.get<double>();
        else if (key == "poisson") s.poisson = v.get<double>();
        else throw InvalidArgument("unknown scenario override '" + key + "'");
    }
}

pde::ScenarioSpec base_spec(const ExperimentConfig& c, pde::Role role) {
    pde::ScenarioSpec s;
    s.role = role;
    s.resolution = c.resolution;
    const bool src = role == pde::Role::source;
    if (c.scenario == "darcy-dist-shift") {
        s.equation = pde::Equation::darcy;
        s.alpha = s.tau = src ? 2.2 : 1.2;
        s.forcing = "one";
    } else if (c.scenario == "darcy-forcing") {
        s.equation = pde::Equation::darcy;
        s.alpha = s.tau = 2.2;
        s.forcing = src ? "5xy" : "one";
    } else if (c.scenario == "burgers-nu") {
        s.equation = pde::Equation::burgers;
        s.nu = src ? 0.001 : 0.1;
        s.u0_length = 0.1;
        s.t_final = 1.0;
    } else {
        s.equation = pde::Equation::elasticity;
        s.length = src ? 0.04 : 0.12;
        s.youngs = 1.0;
        s.poisson = 0.3;
    }
    apply_overrides(s, src ? c.source_overrides : c.target_overrides);
    s.n_samples = src ? c.n_source_train + c.n_source_test : c.n_target_train + c.n_target_test;
    s.seed = derive_seed(c.data_seed, src ? 1 : 2);
    s.validate();
    return s;
}

} // namespace

pde::ScenarioSpec source_spec(const ExperimentConfig& c) { return base_spec(c, pde::Role::source); }
pde::ScenarioSpec target_spec(const ExperimentConfig& c) { return base_spec(c, pde::Role::target); }

std::unique_ptr<model::OperatorModel> build_model(const ExperimentConfig& c,
                                                  const Eigen::MatrixXd& inputs,
                                                  const Eigen::MatrixXd& outputs, const Grid& grid,
                                                  std::uint64_t seed) {
    const auto act = nn::parse_activation(c.activation);
    const auto kind = model::parse_model_kind(c.model);
    const int n = static_cast<int>(outputs.cols());
    switch (kind) {
    case model::ModelKind::ff_pod_deeponet: {
        model::FFPodOptions o;
        o.n_subspaces = c.n_subspaces;
        o.modes_per_subspace = c.modes_per_subspace;
        o.features_per_subspace = c.features_per_subspace;
        o.scale_min = c.scale_min;
        o.scale_max = c.scale_max;
        o.hidden = c.hidden;
        o.activation = act;
        o.combine = model::parse_combine_rule(c.combine);
        o.apply_inverse_operator = c.inverse_operator;
        o.seed = seed;
        return std::make_unique<model::FFPodModel>(model::build_ff_pod_deeponet(inputs, outputs, grid, o));
    }
    case model::ModelKind::pod_deeponet: {
        const int r = std::min({c.modes_per_subspace, n, grid.size()});
        return std::make_unique<model::FFPodModel>(
            model::build_pod_deeponet(inputs, outputs, grid, r, c.hidden, act, seed));
    }
    case model::ModelKind::deeponet:
        return std::make_unique<model::DeepONetModel>(
            model::build_deeponet(inputs, grid, c.deeponet_basis, c.hidden, c.trunk_hidden, act, seed));
    }
    throw InvalidArgument("unknown model kind");
}

SplitData split(const pde::PairedDataset& ds, int n_train, int n_test) {
    if (n_train + n_test > ds.size()) {
        throw InvalidArgument("dataset holds " + std::to_string(ds.size()) + " samples, split needs " +
                              std::to_string(n_train + n_test));
    }
    return {pde::slice(ds, 0, n_train), pde::slice(ds, n_train, n_test)};
}

json metrics_record(const ExperimentConfig& c, std::uint64_t seed, const double* source_mse,
                    const std::vector<std::pair<int, double>>& rows) {
    json j;
    j["schema_version"] = kMetricsSchemaVersion;
    j["scenario"] = c.scenario;
    j["model"] = c.model;
    j["seed"] = seed;
    j["config_hash"] = config_hash(c);
    if (source_mse) j["source_mse"] = *source_mse;
    j["rows"] = json::array();
    for (const auto& [n, mse] : rows) j["rows"].push_back({{"sample_size", n}, {"mse", mse}});
    return j;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

std::string seed_tag(std::uint64_t s) { return "seed" + std::to_string(s); }

fs::path checkpoint_dir(const ExperimentConfig& c, const fs::path& out, std::uint64_t seed) {
    return out / ("checkpoint-" + c.model + "-" + seed_tag(seed));
}

pde::PairedDataset load_role(const ExperimentConfig& c, const fs::path& data, pde::Role role) {
    const fs::path dir = data / pde::to_string(role);
    if (!fs::exists(dir / "manifest.json")) {
        throw InvalidArgument("no " + pde::to_string(role) + " dataset under " + data.string() +
                              " (run generate first)");
    }
    auto ds = pde::load_dataset(dir);
    const auto expected = role == pde::Role::source ? source_spec(c) : target_spec(c);
    if (ds.spec.equation != expected.equation || ds.spec.resolution != expected.resolution) {
        throw InvalidArgument("dataset under " + dir.string() + " does not belong to scenario " + c.scenario);
    }
    return ds;
}

struct TrainedSource {
    std::unique_ptr<model::OperatorModel> model;
    double source_mse = 0.0;
};

TrainedSource train_source(const ExperimentConfig& c, const SplitData& src, std::uint64_t seed,
                           const fs::path& out, std::ostream& log) {
    TrainedSource t;
    t.model = build_model(c, src.train.inputs, src.train.outputs, src.train.output_grid(), seed);
    model::TrainConfig cfg = c.train;
    cfg.seed = seed;
    const auto history = model::train(*t.model, src.train.inputs, src.train.outputs, cfg);
    t.source_mse = model::evaluate(*t.model, src.test.inputs, src.test.outputs);
    json extra = {{"scenario", c.scenario}, {"config_hash", config_hash(c)}, {"train_seed", seed},
                  {"final_train_loss", history.epoch_loss.empty() ? 0.0 : history.epoch_loss.back()}};
    model::save_checkpoint(*t.model, checkpoint_dir(c, out, seed), extra);
    log << c.model << " seed " << seed << ": source test MSE " << t.source_mse << "\n";
    return t;
}

} // namespace

void cmd_generate(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
    c.validate();
    for (pde::Role role : {pde::Role::source, pde::Role::target}) {
        const auto spec = role == pde::Role::source ? source_spec(c) : target_spec(c);
        const auto ds = pde::make_dataset(spec);
        const fs::path dir = out / pde::to_string(role);
        pde::save_dataset(ds, dir);
        log << pde::to_string(role) << ": " << pde::to_string(spec.equation) << ", " << ds.size()
            << " samples, resolution " << spec.resolution << ", input width " << ds.inputs.rows()
            << ", output width " << ds.outputs.rows() << " -> " << dir.string() << "\n";
    }
}

void cmd_train(const ExperimentConfig& c, const fs::path& data, const fs::path& out, std::ostream& log) {
    c.validate();
    const auto src = split(load_role(c, data, pde::Role::source), c.n_source_train, c.n_source_test);
    fs::create_directories(out);
    for (std::uint64_t seed : c.seeds) {
        const auto t = train_source(c, src, seed, out, log);
        const auto rec = metrics_record(c, seed, &t.source_mse, {});
        io::write_text_atomic(out / ("metrics-train-" + c.model + "-" + seed_tag(seed) + ".json"),
                              rec.dump(2) + "\n");
    }
}

void cmd_transfer(const ExperimentConfig& c, const fs::path& data, const fs::path& out,
                  std::ostream& log) {
    c.validate();
    const auto src = split(load_role(c, data, pde::Role::source), c.n_source_train, c.n_source_test);
    const auto tgt = split(load_role(c, data, pde::Role::target), c.n_target_train, c.n_target_test);
    fs::create_directories(out);

    transfer::ExperimentOptions opts;
    opts.sample_sizes = c.sample_sizes;
    opts.config = c.train;
    opts.config.epochs = c.transfer_epochs;
    opts.config.ceod_weight = c.transfer_ceod_weight;
    opts.reinit_branches = c.reinit_branches;
    opts.scratch_sizes = c.scratch_sizes;
    const Grid grid = tgt.train.output_grid();
    opts.scratch_builder = [&c, grid](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::uint64_t s) {
        return build_model(c, x, y, grid, s);
    };

    std::vector<transfer::Cell> cells;
    for (std::uint64_t seed : c.seeds) {
        TrainedSource source;
        const fs::path ckpt = checkpoint_dir(c, out, seed);
        if (fs::exists(ckpt / "manifest.json")) {
            source.model = model::load_checkpoint(ckpt);
            source.source_mse = model::evaluate(*source.model, src.test.inputs, src.test.outputs);
        } else {
            source = train_source(c, src, seed, out, log);
        }
        opts.seeds = {seed};
        const auto table = transfer::transfer_experiment(*source.model, src.train.inputs, tgt.train.inputs,
                                                         tgt.train.outputs, tgt.test.inputs,
                                                         tgt.test.outputs, opts);
        std::vector<std::pair<int, double>> rows;
        for (const auto& cell : table.cells) {
            if (cell.method == transfer::Method::fine_tune) rows.emplace_back(cell.sample_size, cell.mse);
            cells.push_back(cell);
        }
        const auto rec = metrics_record(c, seed, &source.source_mse, rows);
        io::write_text_atomic(out / ("metrics-transfer-" + c.model + "-" + seed_tag(seed) + ".json"),
                              rec.dump(2) + "\n");
        for (const auto& [n, mse] : rows) {
            log << c.model << " seed " << seed << " N=" << n << ": target MSE " << mse << "\n";
        }
    }

    transfer::Table table;
    table.cells = cells;
    table.rows = transfer::aggregate(cells);
    json j;
    j["schema_version"] = kMetricsSchemaVersion;
    j["scenario"] = c.scenario;
    j["model"] = c.model;
    j["config_hash"] = config_hash(c);
    j["cells"] = json::array();
    for (const auto& cell : table.cells) {
        j["cells"].push_back({{"scenario", c.scenario},
                              {"method", transfer::to_string(cell.method)},
                              {"sample_size", cell.sample_size},
                              {"seed", cell.seed},
                              {"mse", cell.mse}});
    }
    j["rows"] = json::array();
    for (const auto& r : table.rows) {
        j["rows"].push_back({{"method", transfer::to_string(r.method)},
                             {"sample_size", r.sample_size},
                             {"median", r.median},
                             {"mean", r.mean},
                             {"std", r.stddev}});
    }
    io::write_text_atomic(out / ("transfer-" + c.model + ".json"), j.dump(2) + "\n");
    const std::string text = c.scenario + " / " + c.model + "\n" + transfer::format_table(table);
    io::write_text_atomic(out / ("transfer-" + c.model + ".txt"), text);
    log << text;
}

namespace {

std::string display_name(const std::string& model) {
    if (model == "pod-deeponet") return "POD-DeepONet";
    if (model == "deeponet") return "DeepONet";
    return "FF POD-DeepONet";
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::string cmd_report(const std::vector<fs::path>& files) {
    if (files.empty()) throw InvalidArgument("report needs at least one metrics file");
    // scenario -> row key (-1 = source) -> model -> seed -> mse
    std::map<std::string, std::map<int, std::map<std::string, std::map<std::uint64_t, double>>>> data;
    auto put = [&](const std::string& scenario, int row, const std::string& model, std::uint64_t seed,
                   double mse, const fs::path& file) {
        auto& slot = data[scenario][row][model];
        auto it = slot.find(seed);
        if (it != slot.end() && it->second != mse) {
            throw FormatError("conflicting duplicate entry (" + scenario + ", " + model + ", " +
                              (row < 0 ? std::string("source") : "N=" + std::to_string(row)) +
                              ", seed " + std::to_string(seed) + ") in " + file.string());
        }
        slot[seed] = mse;
    };

    for (const auto& f : files) {
        json j;
        try {
            j = json::parse(io::read_text(f));
        } catch (const json::exception& e) {
            throw FormatError("malformed metrics file " + f.string() + ": " + e.what());
        }
        if (j.value("schema_version", -1) != kMetricsSchemaVersion) {
            throw FormatError(f.string() + ": unsupported or missing schema_version");
        }
        try {
            const auto scenario = j.at("scenario").get<std::string>();
            const auto model = j.at("model").get<std::string>();
            if (!contains(model_names(), model)) throw FormatError(f.string() + ": unknown model " + model);
            const auto seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("source_mse")) put(scenario, -1, model, seed, j["source_mse"].get<double>(), f);
            for (const auto& r : j.at("rows")) {
                put(scenario, r.at("sample_size").get<int>(), model, seed, r.at("mse").get<double>(), f);
            }
        } catch (const json::exception& e) {
            throw FormatError(f.string() + ": " + e.what());
        }
    }

    std::ostringstream out;
    char buf[64];
    for (const auto& [scenario, rows] : data) {
        out << "Scenario: " << scenario << "\n";
        out << "| Dataset | " << display_name(model_names()[0]) << " | " << display_name(model_names()[1])
            << " | " << display_name(model_names()[2]) << " |\n";
        out << "|---|---|---|---|\n";
        for (const auto& [row, models] : rows) {
            std::vector<std::string> cells;
            double best = std::numeric_limits<double>::infinity();
            std::vector<double> vals;
            for (const auto& m : model_names()) {
                auto it = models.find(m);
                if (it == models.end()) {
                    vals.push_back(std::numeric_limits<double>::quiet_NaN());
                    continue;
                }
                std::vector<double> v;
                for (const auto& [s, mse] : it->second) v.push_back(mse);
                vals.push_back(median(v));
                best = std::min(best, vals.back());
            }
            out << "| " << (row < 0 ? std::string("source") : "N=" + std::to_string(row)) << " |";
            for (double v : vals) {
                if (std::isnan(v)) {
                    out << " - |";
                    continue;
                }
                std::snprintf(buf, sizeof buf, "%.4e", v);
                out << (v == best ? " **" + std::string(buf) + "** |" : " " + std::string(buf) + " |");
            }
            out << "\n";
        }
        out << "Median over seeds. FNO is not implemented and has no column.\n\n";
    }
    return out.str();
}

std::vector<fs::path> cmd_encode_demo(const fs::path& dataset, int index, int m, double scale,
                                      std::uint64_t seed, const fs::path& out) {
    const auto ds = pde::load_dataset(dataset);
    if (index < 0 || index >= ds.size()) {
        throw InvalidArgument("sample index " + std::to_string(index) + " out of range [0, " +
                              std::to_string(ds.size()) + ")");
    }
    const Grid in = ds.input_grid();
    if (in.dim() != 2) throw InvalidArgument("encoding demo needs a 2-D input field");
    const Grid g = Grid::square(in.nx);
    GridFunction field(g, ds.inputs.col(index).head(g.points()));
    const auto freq = features::sample_frequencies(2, m, scale, seed);
    return features::export_encoding_demo(freq, field, out);
}

} // namespace fusionop::experiment
