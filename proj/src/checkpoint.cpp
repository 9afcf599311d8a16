#include "fusionop/checkpoint.hpp"

#include "fusionop/error.hpp"
#include "fusionop/io_util.hpp"

#include <string>

namespace fusionop::model {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json grid_to_json(const Grid& g) {
    return {{"nx", g.nx}, {"ny", g.ny}, {"periodic", g.periodic}, {"channels", g.channels}};
}

Grid grid_from_json(const json& j) {
    Grid g{j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("periodic").get<bool>(),
           j.at("channels").get<int>()};
    g.validate();
    return g;
}

class BlobWriter {
public:
    BlobWriter(fs::path dir, json& shapes) : dir_(std::move(dir)), shapes_(shapes) {}

    void put(const std::string& name, const Eigen::MatrixXd& m) {
        io::write_f64(dir_ / (name + ".f64"), m);
        shapes_[name] = {m.rows(), m.cols()};
    }

private:
    fs::path dir_;
    json& shapes_;
};

class BlobReader {
public:
    BlobReader(fs::path dir, const json& shapes) : dir_(std::move(dir)), shapes_(shapes) {}

    Eigen::MatrixXd get(const std::string& name) const {
        if (!shapes_.contains(name)) throw FormatError("checkpoint manifest lacks tensor " + name);
        const auto& s = shapes_.at(name);
        return io::read_f64(dir_ / (name + ".f64"), s.at(0).get<Eigen::Index>(),
                            s.at(1).get<Eigen::Index>());
    }

    Eigen::VectorXd vec(const std::string& name) const {
        Eigen::MatrixXd m = get(name);
        return Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
    }

private:
    fs::path dir_;
    const json& shapes_;
};

void put_mlp(BlobWriter& w, const nn::MLPParams& p, const std::string& prefix) {
    for (int l = 0; l < p.layers(); ++l) {
        const std::string layer = prefix + "_layer" + std::to_string(l);
        w.put(layer + "_W", p.weights[l]);
        w.put(layer + "_b", p.biases[l]);
    }
}

nn::MLPParams get_mlp(const BlobReader& r, const std::string& prefix, const json& widths,
                      nn::Activation act) {
    nn::MLPParams p = nn::zero_mlp(widths.get<std::vector<int>>(), act);
    for (int l = 0; l < p.layers(); ++l) {
        const std::string layer = prefix + "_layer" + std::to_string(l);
        Eigen::MatrixXd w = r.get(layer + "_W");
        Eigen::VectorXd b = r.vec(layer + "_b");
        if (w.rows() != p.weights[l].rows() || w.cols() != p.weights[l].cols() ||
            b.size() != p.biases[l].size()) {
            throw FormatError("tensor " + layer + " does not match the recorded layer widths");
        }
        p.weights[l] = std::move(w);
        p.biases[l] = std::move(b);
    }
    return p;
}

} // namespace

std::uint64_t tensor_digest(std::span<const ConstParamRef> tensors) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : tensors) {
        h = io::fnv1a(t.name, h);
        h = io::fnv1a(std::as_bytes(t.values), h);
    }
    return h;
}

void save_checkpoint(const OperatorModel& model, const fs::path& dir, const json& extra) {
    fs::path staging = dir;
    staging += ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);

    json manifest;
    manifest["format"] = "fusionop-checkpoint";
    manifest["format_version"] = kCheckpointVersion;
    manifest["model"] = to_string(model.kind());
    manifest["grid"] = grid_to_json(model.output_grid());
    manifest["hyperparameters"] = extra;
    json shapes = json::object();
    BlobWriter w(staging, shapes);

    if (const auto* ff = dynamic_cast<const FFPodModel*>(&model)) {
        manifest["n_subspaces"] = ff->n_subspaces();
        manifest["combine"] = to_string(ff->combine);
        manifest["train_weights"] = ff->train_weights;
        manifest["activation"] = nn::to_string(ff->activation);
        manifest["hidden"] = ff->hidden_widths;
        manifest["seed"] = ff->seed;
        manifest["inverse_operator"] = ff->inverse_operator.has_value();
        json branches = json::array();
        json pods = json::array();
        json freqs = json::array();
        for (int i = 0; i < ff->n_subspaces(); ++i) {
            const std::string id = std::to_string(i);
            branches.push_back({{"widths", ff->branches[i].widths}});
            put_mlp(w, ff->branches[i], "branch" + id);
            const auto& pb = ff->pod_bases[i];
            pods.push_back({{"modes", pb.size()}, {"numerical_rank", pb.numerical_rank}});
            w.put("pod" + id + "_modes", pb.modes);
            w.put("pod" + id + "_mean", pb.mean_mode);
            w.put("pod" + id + "_singular_values", pb.singular_values);
        }
        for (std::size_t i = 0; i < ff->frequency_matrices.size(); ++i) {
            const auto& f = ff->frequency_matrices[i];
            freqs.push_back({{"d", f.dim()}, {"m", f.count()}, {"scale", f.scale}, {"seed", f.seed}});
            w.put("freq" + std::to_string(i), f.b);
        }
        manifest["branches"] = branches;
        manifest["pod"] = pods;
        manifest["frequencies"] = freqs;
        w.put("weights", ff->weights);
        w.put("normalizer_shift", ff->normalizer.shift);
        w.put("normalizer_scale", ff->normalizer.scale);
    } else if (const auto* don = dynamic_cast<const DeepONetModel*>(&model)) {
        manifest["n_subspaces"] = 0;
        manifest["n_basis"] = don->n_basis;
        manifest["freeze_trunk"] = don->freeze_trunk;
        manifest["activation"] = nn::to_string(don->activation);
        manifest["hidden"] = don->hidden_widths;
        manifest["seed"] = don->seed;
        manifest["branches"] = json::array({{{"widths", don->branch.widths}}});
        manifest["trunk"] = {{"widths", don->trunk.widths}};
        put_mlp(w, don->branch, "branch0");
        put_mlp(w, don->trunk, "trunk");
        w.put("bias", don->bias);
        w.put("normalizer_shift", don->normalizer.shift);
        w.put("normalizer_scale", don->normalizer.scale);
    } else {
        throw InvalidArgument("cannot checkpoint an unknown model type");
    }
    manifest["tensors"] = shapes;
    io::write_text_atomic(staging / "manifest.json", manifest.dump(2) + "\n");

    fs::remove_all(dir);
    fs::rename(staging, dir);
}

json read_checkpoint_manifest(const fs::path& dir) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw FormatError("bad checkpoint manifest in " + dir.string() + ": " + e.what());
    }
    if (manifest.value("format", "") != "fusionop-checkpoint") {
        throw FormatError(dir.string() + " is not a fusionop checkpoint");
    }
    if (manifest.value("format_version", -1) != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + manifest.value("format_version", json()).dump());
    }
    return manifest;
}

std::unique_ptr<OperatorModel> load_checkpoint(const fs::path& dir) {
    const json manifest = read_checkpoint_manifest(dir);
    try {
        const BlobReader r(dir, manifest.at("tensors"));
        const ModelKind kind = parse_model_kind(manifest.at("model").get<std::string>());
        const auto act = nn::parse_activation(manifest.at("activation").get<std::string>());
        const Grid grid = grid_from_json(manifest.at("grid"));

        if (kind == ModelKind::deeponet) {
            auto m = std::make_unique<DeepONetModel>();
            m->grid = grid;
            m->n_basis = manifest.at("n_basis").get<int>();
            m->freeze_trunk = manifest.at("freeze_trunk").get<bool>();
            m->activation = act;
            m->hidden_widths = manifest.at("hidden").get<std::vector<int>>();
            m->seed = manifest.at("seed").get<std::uint64_t>();
            m->branch = get_mlp(r, "branch0", manifest.at("branches").at(0).at("widths"), act);
            m->trunk = get_mlp(r, "trunk", manifest.at("trunk").at("widths"), act);
            m->bias = r.vec("bias");
            m->normalizer = {r.vec("normalizer_shift"), r.vec("normalizer_scale")};
            return m;
        }

        auto m = std::make_unique<FFPodModel>();
        m->grid = grid;
        m->model_kind = kind;
        m->combine = parse_combine_rule(manifest.at("combine").get<std::string>());
        m->train_weights = manifest.at("train_weights").get<bool>();
        m->activation = act;
        m->hidden_widths = manifest.at("hidden").get<std::vector<int>>();
        m->seed = manifest.at("seed").get<std::uint64_t>();
        const int n = manifest.at("n_subspaces").get<int>();
        for (int i = 0; i < n; ++i) {
            const std::string id = std::to_string(i);
            m->branches.push_back(
                get_mlp(r, "branch" + id, manifest.at("branches").at(i).at("widths"), act));
            pod::PODBasis pb;
            pb.modes = r.get("pod" + id + "_modes");
            pb.mean_mode = r.vec("pod" + id + "_mean");
            pb.singular_values = r.vec("pod" + id + "_singular_values");
            pb.numerical_rank = manifest.at("pod").at(i).at("numerical_rank").get<int>();
            m->pod_bases.push_back(std::move(pb));
        }
        const auto& freqs = manifest.at("frequencies");
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            features::FrequencyMatrix f;
            f.b = r.get("freq" + std::to_string(i));
            f.scale = freqs.at(i).at("scale").get<double>();
            f.seed = freqs.at(i).at("seed").get<std::uint64_t>();
            m->frequency_matrices.push_back(std::move(f));
        }
        m->weights = r.vec("weights");
        m->normalizer = {r.vec("normalizer_shift"), r.vec("normalizer_scale")};
        if (manifest.at("inverse_operator").get<bool>()) {
            m->inverse_operator = fusion_inverse_operator(feature_bases(*m));
        }
        m->validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed checkpoint manifest: " + std::string(e.what()));
    }
}

} // namespace fusionop::model
