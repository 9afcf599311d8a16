#include "fusionop/model.hpp"

#include "fusionop/error.hpp"
#include "fusionop/frames.hpp"
#include "fusionop/rng.hpp"

#include <cmath>
#include <string>

namespace fusionop::model {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "ff-pod-deeponet") return ModelKind::ff_pod_deeponet;
    if (name == "pod-deeponet") return ModelKind::pod_deeponet;
    if (name == "deeponet") return ModelKind::deeponet;
    throw InvalidArgument("unknown model '" + name +
                          "' (expected ff-pod-deeponet, pod-deeponet or deeponet)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::ff_pod_deeponet: return "ff-pod-deeponet";
    case ModelKind::pod_deeponet: return "pod-deeponet";
    case ModelKind::deeponet: return "deeponet";
    }
    return "unknown";
}

CombineRule parse_combine_rule(const std::string& name) {
    if (name == "sum") return CombineRule::sum;
    if (name == "average") return CombineRule::average;
    throw InvalidArgument("unknown combine rule '" + name + "' (expected sum or average)");
}

std::string to_string(CombineRule rule) { return rule == CombineRule::sum ? "sum" : "average"; }

namespace {

constexpr std::uint64_t kBranchStream = 0x8000;

template <typename Tensor>
std::span<double> view(Tensor& t) {
    return {t.data(), static_cast<std::size_t>(t.size())};
}

template <typename Tensor>
std::span<const double> cview(const Tensor& t) {
    return {t.data(), static_cast<std::size_t>(t.size())};
}

void append_mlp(std::vector<ParamRef>& out, nn::MLPParams& mlp, const std::string& prefix) {
    for (int l = 0; l < mlp.layers(); ++l) {
        const std::string layer = prefix + "_layer" + std::to_string(l);
        out.push_back({layer + "_W", view(mlp.weights[l])});
        out.push_back({layer + "_b", view(mlp.biases[l])});
    }
}

void append_mlp(std::vector<ConstParamRef>& out, const nn::MLPParams& mlp,
                const std::string& prefix) {
    for (int l = 0; l < mlp.layers(); ++l) {
        const std::string layer = prefix + "_layer" + std::to_string(l);
        out.push_back({layer + "_W", cview(mlp.weights[l])});
        out.push_back({layer + "_b", cview(mlp.biases[l])});
    }
}

void append_mlp_grads(Gradients& out, nn::MLPGradients& g) {
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        out.push_back(Eigen::Map<const Eigen::VectorXd>(g.weights[l].data(), g.weights[l].size()));
        out.push_back(std::move(g.biases[l]));
    }
}

void check_inputs(const Eigen::MatrixXd& inputs, int width) {
    if (inputs.rows() != width) {
        throw DimensionError("model input has " + std::to_string(inputs.rows()) +
                             " rows, branch expects " + std::to_string(width));
    }
}

void check_training_pairs(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                          const Grid& grid) {
    grid.validate();
    if (outputs.rows() != grid.size()) {
        throw DimensionError("output snapshots have " + std::to_string(outputs.rows()) +
                             " rows, grid has " + std::to_string(grid.size()) + " values");
    }
    if (inputs.cols() != outputs.cols() || inputs.cols() == 0) {
        throw DimensionError("need a nonempty, equal number of input and output samples");
    }
}

} // namespace

InputNormalizer InputNormalizer::fit(const Eigen::MatrixXd& inputs) {
    InputNormalizer n;
    n.shift = inputs.rowwise().mean();
    const Eigen::MatrixXd centered = inputs.colwise() - n.shift;
    n.scale = (centered.rowwise().squaredNorm() / static_cast<double>(inputs.cols()))
                  .cwiseSqrt();
    for (Eigen::Index i = 0; i < n.scale.size(); ++i) {
        if (!(n.scale[i] > 1e-12)) n.scale[i] = 1.0;
    }
    return n;
}

InputNormalizer InputNormalizer::identity(int width) {
    return {Eigen::VectorXd::Zero(width), Eigen::VectorXd::Ones(width)};
}

Eigen::MatrixXd InputNormalizer::apply(const Eigen::MatrixXd& inputs) const {
    return (inputs.colwise() - shift).array().colwise() / scale.array();
}

std::vector<ConstParamRef> OperatorModel::trainable() const {
    auto refs = const_cast<OperatorModel*>(this)->trainable();
    std::vector<ConstParamRef> out;
    out.reserve(refs.size());
    for (auto& r : refs) out.push_back({std::move(r.name), r.values});
    return out;
}

double OperatorModel::query(const Eigen::VectorXd& u, std::span<const double> point,
                            int channel) const {
    const Grid& g = output_grid();
    if (channel < 0 || channel >= g.channels) throw InvalidArgument("channel out of range");
    Eigen::MatrixXd in(u.size(), 1);
    in.col(0) = u;
    const Eigen::MatrixXd pred = predict(in);
    const Eigen::VectorXd values = pred.col(0).segment(channel * g.points(), g.points());
    return interpolate(g, values, point);
}

// ---------------------------------------------------------------------------
// FFPodModel

std::unique_ptr<OperatorModel> FFPodModel::clone() const {
    return std::make_unique<FFPodModel>(*this);
}

int FFPodModel::feature_width() const noexcept {
    int w = 0;
    for (const auto& b : pod_bases) w += b.size();
    return w;
}

double FFPodModel::initial_weight() const noexcept {
    const int n = std::max(1, n_subspaces());
    return combine == CombineRule::sum ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;
}

void FFPodModel::validate() const {
    const auto n = branches.size();
    if (n == 0) throw InvalidArgument("fusion-frame model has no subspaces");
    if (pod_bases.size() != n || static_cast<std::size_t>(weights.size()) != n) {
        throw DimensionError("fusion-frame model: branches, POD bases and weights differ in count");
    }
    if (!frequency_matrices.empty() && frequency_matrices.size() != n) {
        throw DimensionError("fusion-frame model: frequency matrix count differs from subspaces");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (branches[i].output_width() != pod_bases[i].size()) {
            throw DimensionError("branch " + std::to_string(i) + " outputs " +
                                 std::to_string(branches[i].output_width()) +
                                 " coefficients for a basis of " +
                                 std::to_string(pod_bases[i].size()) + " modes");
        }
        if (branches[i].input_width() != input_width()) {
            throw DimensionError("branch input widths disagree with the normalizer");
        }
        if (pod_bases[i].dim() != grid.size()) {
            throw DimensionError("POD basis length does not match the output grid");
        }
    }
    if (inverse_operator && (inverse_operator->rows() != grid.size() ||
                             inverse_operator->cols() != grid.size())) {
        throw DimensionError("inverse fusion operator has the wrong shape");
    }
}

Eigen::MatrixXd FFPodModel::predict(const Eigen::MatrixXd& inputs) const {
    check_inputs(inputs, input_width());
    const Eigen::MatrixXd xn = normalizer.apply(inputs);
    const double alpha = combine == CombineRule::sum ? 1.0 : 1.0 / n_subspaces();
    Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(grid.size(), inputs.cols());
    for (int i = 0; i < n_subspaces(); ++i) {
        const double w2 = alpha * weights[i] * weights[i];
        if (w2 == 0.0) continue;
        const Eigen::MatrixXd coeffs = nn::mlp_forward(branches[i], xn);
        Eigen::MatrixXd recon = pod_bases[i].modes * coeffs;
        recon.colwise() += pod_bases[i].mean_mode;
        pred += w2 * recon;
    }
    if (inverse_operator) return *inverse_operator * pred;
    return pred;
}

Eigen::MatrixXd FFPodModel::features(const Eigen::MatrixXd& inputs) const {
    check_inputs(inputs, input_width());
    const Eigen::MatrixXd xn = normalizer.apply(inputs);
    Eigen::MatrixXd out(feature_width(), inputs.cols());
    Eigen::Index row = 0;
    for (int i = 0; i < n_subspaces(); ++i) {
        const Eigen::MatrixXd c = nn::mlp_forward(branches[i], xn);
        out.middleRows(row, c.rows()) = c;
        row += c.rows();
    }
    return out;
}

double FFPodModel::loss_and_gradients(const Eigen::MatrixXd& inputs, const LossFn& loss,
                                      Gradients& grads) const {
    check_inputs(inputs, input_width());
    const int n = n_subspaces();
    const Eigen::Index batch = inputs.cols();
    const Eigen::MatrixXd xn = normalizer.apply(inputs);
    const double alpha = combine == CombineRule::sum ? 1.0 : 1.0 / n;

    std::vector<nn::MLPCache> caches(static_cast<std::size_t>(n));
    Eigen::MatrixXd feats(feature_width(), batch);
    Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(grid.size(), batch);
    Eigen::Index row = 0;
    for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXd c = nn::mlp_forward(branches[i], xn, &caches[i]);
        feats.middleRows(row, c.rows()) = c;
        row += c.rows();
        const double w2 = alpha * weights[i] * weights[i];
        if (w2 != 0.0) {
            Eigen::MatrixXd recon = pod_bases[i].modes * c;
            recon.colwise() += pod_bases[i].mean_mode;
            pred += w2 * recon;
        }
    }
    if (inverse_operator) pred = *inverse_operator * pred;

    Eigen::MatrixXd d_pred;
    Eigen::MatrixXd d_feats;
    const double value = loss(pred, feats, d_pred, d_feats);
    if (d_pred.rows() != pred.rows() || d_pred.cols() != pred.cols()) {
        throw DimensionError("loss returned a prediction gradient of the wrong shape");
    }
    const bool has_feat_grad = d_feats.size() > 0;
    if (has_feat_grad && (d_feats.rows() != feats.rows() || d_feats.cols() != batch)) {
        throw DimensionError("loss returned a feature gradient of the wrong shape");
    }

    // S^-1 is symmetric, so the pullback is another multiplication by it.
    const Eigen::MatrixXd g = inverse_operator ? Eigen::MatrixXd(*inverse_operator * d_pred)
                                               : d_pred;
    const Eigen::VectorXd g_sum = g.rowwise().sum();

    grads.clear();
    Eigen::VectorXd d_weights(n);
    row = 0;
    for (int i = 0; i < n; ++i) {
        const auto& basis = pod_bases[i];
        const Eigen::MatrixXd vtg = basis.modes.transpose() * g; // r x batch
        const auto& c = caches[i].activations.back();
        // <R_i, G> with R_i = mean 1^T + V C, without materializing R_i.
        d_weights[i] = 2.0 * alpha * weights[i] *
                       (basis.mean_mode.dot(g_sum) + (c.array() * vtg.array()).sum());
        Eigen::MatrixXd d_coeffs = (alpha * weights[i] * weights[i]) * vtg;
        if (has_feat_grad) d_coeffs += d_feats.middleRows(row, basis.size());
        row += basis.size();
        nn::MLPGradients mg = nn::mlp_gradients(branches[i], caches[i], d_coeffs);
        append_mlp_grads(grads, mg);
    }
    if (train_weights) grads.push_back(std::move(d_weights));
    return value;
}

std::vector<ParamRef> FFPodModel::trainable() {
    std::vector<ParamRef> out;
    for (int i = 0; i < n_subspaces(); ++i) append_mlp(out, branches[i], "branch" + std::to_string(i));
    if (train_weights) out.push_back({"weights", view(weights)});
    return out;
}

std::vector<ConstParamRef> FFPodModel::frozen() const {
    std::vector<ConstParamRef> out;
    for (int i = 0; i < n_subspaces(); ++i) {
        const std::string id = std::to_string(i);
        out.push_back({"pod" + id + "_modes", cview(pod_bases[i].modes)});
        out.push_back({"pod" + id + "_mean", cview(pod_bases[i].mean_mode)});
        if (!frequency_matrices.empty()) {
            out.push_back({"freq" + id, cview(frequency_matrices[i].b)});
        }
    }
    out.push_back({"normalizer_shift", cview(normalizer.shift)});
    out.push_back({"normalizer_scale", cview(normalizer.scale)});
    if (!train_weights) out.push_back({"weights", cview(weights)});
    return out;
}

void FFPodModel::reinit_branches(std::uint64_t branch_seed) {
    branches.clear();
    for (std::size_t i = 0; i < pod_bases.size(); ++i) {
        std::vector<int> widths;
        widths.push_back(static_cast<int>(normalizer.shift.size()));
        widths.insert(widths.end(), hidden_widths.begin(), hidden_widths.end());
        widths.push_back(pod_bases[i].size());
        branches.push_back(nn::init_mlp(widths, activation, derive_seed(branch_seed, kBranchStream + i)));
    }
}

// ---------------------------------------------------------------------------
// DeepONetModel

std::unique_ptr<OperatorModel> DeepONetModel::clone() const {
    return std::make_unique<DeepONetModel>(*this);
}

Eigen::MatrixXd DeepONetModel::trunk_outputs() const {
    return nn::mlp_forward(trunk, grid.coordinates().transpose());
}

Eigen::MatrixXd DeepONetModel::predict(const Eigen::MatrixXd& inputs) const {
    check_inputs(inputs, input_width());
    const Eigen::MatrixXd b = nn::mlp_forward(branch, normalizer.apply(inputs));
    const Eigen::MatrixXd t = trunk_outputs();
    const Eigen::Index p = grid.points();
    Eigen::MatrixXd pred(grid.size(), inputs.cols());
    for (int c = 0; c < grid.channels; ++c) {
        pred.middleRows(c * p, p).noalias() = t.transpose() * b.middleRows(c * n_basis, n_basis);
        pred.middleRows(c * p, p).array() += bias[c];
    }
    return pred;
}

Eigen::MatrixXd DeepONetModel::features(const Eigen::MatrixXd& inputs) const {
    check_inputs(inputs, input_width());
    return nn::mlp_forward(branch, normalizer.apply(inputs));
}

double DeepONetModel::loss_and_gradients(const Eigen::MatrixXd& inputs, const LossFn& loss,
                                         Gradients& grads) const {
    check_inputs(inputs, input_width());
    nn::MLPCache bcache;
    nn::MLPCache tcache;
    const Eigen::MatrixXd b = nn::mlp_forward(branch, normalizer.apply(inputs), &bcache);
    const Eigen::MatrixXd t = nn::mlp_forward(trunk, grid.coordinates().transpose(), &tcache);
    const Eigen::Index p = grid.points();
    Eigen::MatrixXd pred(grid.size(), inputs.cols());
    for (int c = 0; c < grid.channels; ++c) {
        pred.middleRows(c * p, p).noalias() = t.transpose() * b.middleRows(c * n_basis, n_basis);
        pred.middleRows(c * p, p).array() += bias[c];
    }

    Eigen::MatrixXd d_pred;
    Eigen::MatrixXd d_feats;
    const double value = loss(pred, b, d_pred, d_feats);
    if (d_pred.rows() != pred.rows() || d_pred.cols() != pred.cols()) {
        throw DimensionError("loss returned a prediction gradient of the wrong shape");
    }

    Eigen::MatrixXd d_b(b.rows(), b.cols());
    Eigen::MatrixXd d_t = Eigen::MatrixXd::Zero(t.rows(), t.cols());
    Eigen::VectorXd d_bias(grid.channels);
    for (int c = 0; c < grid.channels; ++c) {
        const auto g_c = d_pred.middleRows(c * p, p);
        d_b.middleRows(c * n_basis, n_basis).noalias() = t * g_c;
        if (!freeze_trunk) d_t.noalias() += b.middleRows(c * n_basis, n_basis) * g_c.transpose();
        d_bias[c] = g_c.sum();
    }
    if (d_feats.size() > 0) {
        if (d_feats.rows() != d_b.rows() || d_feats.cols() != d_b.cols()) {
            throw DimensionError("loss returned a feature gradient of the wrong shape");
        }
        d_b += d_feats;
    }

    grads.clear();
    nn::MLPGradients gb = nn::mlp_gradients(branch, bcache, d_b);
    append_mlp_grads(grads, gb);
    if (!freeze_trunk) {
        nn::MLPGradients gt = nn::mlp_gradients(trunk, tcache, d_t);
        append_mlp_grads(grads, gt);
    }
    grads.push_back(std::move(d_bias));
    return value;
}

std::vector<ParamRef> DeepONetModel::trainable() {
    std::vector<ParamRef> out;
    append_mlp(out, branch, "branch0");
    if (!freeze_trunk) append_mlp(out, trunk, "trunk");
    out.push_back({"bias", view(bias)});
    return out;
}

std::vector<ConstParamRef> DeepONetModel::frozen() const {
    std::vector<ConstParamRef> out;
    if (freeze_trunk) append_mlp(out, trunk, "trunk");
    out.push_back({"normalizer_shift", cview(normalizer.shift)});
    out.push_back({"normalizer_scale", cview(normalizer.scale)});
    return out;
}

void DeepONetModel::reinit_branches(std::uint64_t branch_seed) {
    std::vector<int> widths;
    widths.push_back(input_width());
    widths.insert(widths.end(), hidden_widths.begin(), hidden_widths.end());
    widths.push_back(n_basis * grid.channels);
    branch = nn::init_mlp(widths, activation, derive_seed(branch_seed, kBranchStream));
}

// ---------------------------------------------------------------------------
// Builders

namespace {

FFPodModel assemble(const Eigen::MatrixXd& inputs, const Grid& grid,
                    std::vector<pod::PODBasis> bases, const std::vector<int>& hidden,
                    nn::Activation activation, CombineRule combine, std::uint64_t seed) {
    FFPodModel m;
    m.grid = grid;
    m.normalizer = InputNormalizer::fit(inputs);
    m.pod_bases = std::move(bases);
    m.hidden_widths = hidden;
    m.activation = activation;
    m.combine = combine;
    m.seed = seed;
    m.reinit_branches(seed);
    m.weights = Eigen::VectorXd::Constant(m.n_subspaces(), m.initial_weight());
    return m;
}

} // namespace

FFPodModel build_ff_pod_deeponet(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                 const Grid& grid, const FFPodOptions& options) {
    check_training_pairs(inputs, outputs, grid);
    if (options.modes_per_subspace < 1) throw InvalidArgument("need at least one POD mode");
    const auto scales =
        features::geometric_scale_schedule(options.n_subspaces, options.scale_min, options.scale_max);

    std::vector<pod::PODBasis> bases;
    std::vector<features::FrequencyMatrix> freqs;
    std::vector<Eigen::MatrixXd> subspaces;
    for (int k = 0; k < options.n_subspaces; ++k) {
        if (grid.points() < 2 * options.features_per_subspace) {
            throw InvalidArgument("subspace " + std::to_string(k) + ": grid has " +
                                  std::to_string(grid.points()) + " points, fewer than the " +
                                  std::to_string(2 * options.features_per_subspace) +
                                  " encoded features");
        }
        auto freq = features::sample_frequencies(grid.dim(), options.features_per_subspace,
                                                 scales[k], features::subspace_seed(options.seed, k));
        Eigen::MatrixXd q = features::feature_subspace_basis(freq, grid);
        bases.push_back(pod::compute_pod_in_subspace(q, outputs, options.modes_per_subspace));
        freqs.push_back(std::move(freq));
        if (options.apply_inverse_operator) subspaces.push_back(std::move(q));
    }

    FFPodModel m = assemble(inputs, grid, std::move(bases), options.hidden, options.activation,
                            options.combine, options.seed);
    m.frequency_matrices = std::move(freqs);
    if (options.apply_inverse_operator) m.inverse_operator = fusion_inverse_operator(subspaces);
    m.validate();
    return m;
}

FFPodModel build_pod_deeponet(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                              const Grid& grid, int modes, const std::vector<int>& hidden,
                              nn::Activation activation, std::uint64_t seed) {
    check_training_pairs(inputs, outputs, grid);
    std::vector<pod::PODBasis> bases;
    bases.push_back(pod::compute_pod(outputs, modes));
    FFPodModel m = assemble(inputs, grid, std::move(bases), hidden, activation, CombineRule::sum, seed);
    m.model_kind = ModelKind::pod_deeponet;
    m.weights.setOnes();
    m.train_weights = false;
    m.validate();
    return m;
}

FFPodModel build_ff_from_subspaces(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                   const Grid& grid, const std::vector<Eigen::MatrixXd>& bases,
                                   int modes, const std::vector<int>& hidden,
                                   nn::Activation activation, CombineRule combine,
                                   std::uint64_t seed) {
    check_training_pairs(inputs, outputs, grid);
    if (bases.empty()) throw InvalidArgument("need at least one subspace basis");
    std::vector<pod::PODBasis> pods;
    for (const auto& q : bases) pods.push_back(pod::compute_pod_in_subspace(q, outputs, modes));
    FFPodModel m = assemble(inputs, grid, std::move(pods), hidden, activation, combine, seed);
    m.validate();
    return m;
}

DeepONetModel build_deeponet(const Eigen::MatrixXd& inputs, const Grid& grid, int n_basis,
                             const std::vector<int>& branch_hidden,
                             const std::vector<int>& trunk_hidden, nn::Activation activation,
                             std::uint64_t seed) {
    grid.validate();
    if (inputs.cols() == 0) throw InvalidArgument("need at least one training input");
    if (n_basis < 1) throw InvalidArgument("DeepONet needs at least one basis function");
    DeepONetModel m;
    m.grid = grid;
    m.normalizer = InputNormalizer::fit(inputs);
    m.n_basis = n_basis;
    m.hidden_widths = branch_hidden;
    m.activation = activation;
    m.seed = seed;
    m.reinit_branches(seed);

    std::vector<int> tw;
    tw.push_back(grid.dim());
    tw.insert(tw.end(), trunk_hidden.begin(), trunk_hidden.end());
    tw.push_back(n_basis);
    m.trunk = nn::init_mlp(tw, activation, derive_seed(seed, kBranchStream - 1));
    m.bias = Eigen::VectorXd::Zero(grid.channels);
    return m;
}

Eigen::MatrixXd fusion_inverse_operator(const std::vector<Eigen::MatrixXd>& bases) {
    std::vector<frames::SubspaceBasis> subspaces;
    for (const auto& q : bases) subspaces.emplace_back(q);
    frames::FusionFrameSpec ff(std::move(subspaces), std::vector<double>(bases.size(), 1.0));
    const Eigen::MatrixXd s = frames::fusion_frame_operator(ff);
    if (!frames::operator_bounds(s).is_frame) {
        throw NumericalError("feature subspaces do not span the output space; S is singular");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    return llt.solve(Eigen::MatrixXd::Identity(s.rows(), s.cols()));
}

std::vector<Eigen::MatrixXd> feature_bases(const FFPodModel& model) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& f : model.frequency_matrices) {
        out.push_back(features::feature_subspace_basis(f, model.grid));
    }
    return out;
}

} // namespace fusionop::model
