#include "fusionop/mlp.hpp"

#include "fusionop/error.hpp"
#include "fusionop/rng.hpp"

#include <cmath>

namespace fusionop::nn {

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw InvalidArgument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

std::size_t MLPParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (int l = 0; l < layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

namespace {

void check_widths(const std::vector<int>& widths) {
    if (widths.size() < 2) throw InvalidArgument("an MLP needs at least input and output widths");
    for (int w : widths) {
        if (w < 1) throw InvalidArgument("MLP layer widths must be positive");
    }
}

} // namespace

MLPParams zero_mlp(const std::vector<int>& widths, Activation activation) {
    check_widths(widths);
    MLPParams p;
    p.widths = widths;
    p.activation = activation;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        p.weights.push_back(Eigen::MatrixXd::Zero(widths[l + 1], widths[l]));
        p.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
    }
    return p;
}

MLPParams init_mlp(const std::vector<int>& widths, Activation activation, std::uint64_t seed) {
    MLPParams p = zero_mlp(widths, activation);
    for (int l = 0; l < p.layers(); ++l) {
        CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
        const double stddev = std::sqrt(2.0 / (widths[l] + widths[l + 1]));
        auto& w = p.weights[l];
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = stddev * rng.normal();
        }
    }
    return p;
}

Eigen::MatrixXd mlp_forward(const MLPParams& params, const Eigen::MatrixXd& input,
                            MLPCache* cache) {
    if (input.rows() != params.input_width()) {
        throw DimensionError("MLP input has " + std::to_string(input.rows()) +
                             " features, layer 0 expects " +
                             std::to_string(params.input_width()));
    }
    if (cache) {
        cache->params = &params;
        cache->activations.clear();
        cache->activations.reserve(static_cast<std::size_t>(params.layers()) + 1);
        cache->activations.push_back(input);
    }
    Eigen::MatrixXd a = input;
    for (int l = 0; l < params.layers(); ++l) {
        Eigen::MatrixXd z = params.weights[l] * a;
        z.colwise() += params.biases[l];
        if (l + 1 < params.layers()) {
            if (params.activation == Activation::tanh) {
                z = z.array().tanh().matrix();
            } else {
                z = z.cwiseMax(0.0);
            }
        }
        a = std::move(z);
        if (cache) cache->activations.push_back(a);
    }
    return a;
}

MLPGradients mlp_gradients(const MLPParams& params, const MLPCache& cache,
                           const Eigen::MatrixXd& upstream, Eigen::MatrixXd* input_grad) {
    const auto n_layers = static_cast<std::size_t>(params.layers());
    if (cache.params != &params || cache.activations.size() != n_layers + 1) {
        throw InvalidArgument("stale MLP cache: it was produced by a different network");
    }
    const Eigen::Index batch = cache.activations.front().cols();
    if (upstream.rows() != params.output_width() || upstream.cols() != batch) {
        throw DimensionError("upstream gradient shape does not match the cached forward pass");
    }
    for (std::size_t l = 0; l <= n_layers; ++l) {
        if (cache.activations[l].rows() != params.widths[l]) {
            throw InvalidArgument("stale MLP cache: layer shapes changed since the forward pass");
        }
    }

    MLPGradients g;
    g.weights.resize(n_layers);
    g.biases.resize(n_layers);
    Eigen::MatrixXd delta = upstream;
    for (int l = params.layers() - 1; l >= 0; --l) {
        const auto& a_in = cache.activations[static_cast<std::size_t>(l)];
        g.weights[l].noalias() = delta * a_in.transpose();
        g.biases[l] = delta.rowwise().sum();
        if (l == 0 && !input_grad) break;
        Eigen::MatrixXd back = params.weights[l].transpose() * delta;
        if (l > 0) {
            if (params.activation == Activation::tanh) {
                back.array() *= 1.0 - a_in.array().square();
            } else {
                back.array() *= (a_in.array() > 0.0).cast<double>();
            }
        }
        delta = std::move(back);
    }
    if (input_grad) *input_grad = std::move(delta);
    return g;
}

} // namespace fusionop::nn
