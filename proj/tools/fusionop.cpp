#include "fusionop/error.hpp"
#include "fusionop/experiment.hpp"
#include "fusionop/io_util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace fusionop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct CommonFlags {
    std::string config;
    std::string scenario;
    std::string model;
    std::optional<std::uint64_t> seed;
    std::vector<std::uint64_t> seeds;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool out_required) {
    cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--scenario", f.scenario, "darcy-dist-shift | darcy-forcing | burgers-nu | elasticity-l");
    cmd->add_option("--model", f.model, "ff-pod-deeponet | pod-deeponet | deeponet");
    cmd->add_option("--seed", f.seed, "single training seed (overrides the config seed list)");
    cmd->add_option("--seeds", f.seeds, "list of training seeds");
    auto* out = cmd->add_option("--out", f.out, "output directory");
    if (out_required) out->required();
}

experiment::ExperimentConfig resolve(const CommonFlags& f) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config.empty()) {
        try {
            j = nlohmann::json::parse(io::read_text(f.config));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument("cannot parse " + f.config + ": " + e.what());
        }
    }
    if (!f.model.empty()) j["model"] = f.model;
    if (!f.seeds.empty()) j["seeds"] = f.seeds;
    if (f.seed) j["seeds"] = std::vector<std::uint64_t>{*f.seed};
    return experiment::config_from_json(j, f.scenario);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fusion-frame POD-DeepONet experiments"};
    app.require_subcommand(1);

    CommonFlags gen_flags, train_flags, transfer_flags;
    std::string train_data, transfer_data;

    auto* gen = app.add_subcommand("generate", "Generate source and target datasets for a scenario");
    add_common(gen, gen_flags, true);

    auto* tr = app.add_subcommand("train", "Train a model on the source dataset");
    add_common(tr, train_flags, true);
    tr->add_option("--data", train_data, "directory written by generate")->required();

    auto* tf = app.add_subcommand("transfer", "Fine-tune source models on target subsamples");
    add_common(tf, transfer_flags, true);
    tf->add_option("--data", transfer_data, "directory written by generate")->required();

    std::vector<std::string> report_files;
    std::string report_out;
    auto* rep = app.add_subcommand("report", "Merge metrics files into comparison tables");
    rep->add_option("metrics", report_files, "metrics JSON files")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", report_out, "also write the report to this file");

    std::string demo_data, demo_out;
    int demo_index = 0;
    int demo_m = 3;
    double demo_scale = 1.0;
    std::uint64_t demo_seed = 0;
    auto* demo = app.add_subcommand("encode-demo", "Write Fourier-feature encoded images of one input");
    demo->add_option("--dataset", demo_data, "dataset directory")->required();
    demo->add_option("--index", demo_index, "sample index");
    demo->add_option("--m", demo_m, "number of frequencies")->check(CLI::PositiveNumber);
    demo->add_option("--scale", demo_scale, "frequency standard deviation")->check(CLI::PositiveNumber);
    demo->add_option("--seed", demo_seed, "frequency seed");
    demo->add_option("--out", demo_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            experiment::cmd_generate(resolve(gen_flags), gen_flags.out, std::cout);
        } else if (*tr) {
            experiment::cmd_train(resolve(train_flags), train_data, train_flags.out, std::cout);
        } else if (*tf) {
            experiment::cmd_transfer(resolve(transfer_flags), transfer_data, transfer_flags.out, std::cout);
        } else if (*rep) {
            std::vector<fs::path> paths(report_files.begin(), report_files.end());
            const std::string text = experiment::cmd_report(paths);
            std::cout << text;
            if (!report_out.empty()) io::write_text_atomic(report_out, text);
        } else if (*demo) {
            const auto files = experiment::cmd_encode_demo(demo_data, demo_index, demo_m, demo_scale,
                                                           demo_seed, demo_out);
            for (const auto& f : files) std::cout << f.string() << "\n";
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
