#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace fusionop::nn {

enum class Activation { tanh, relu };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// Fully connected network. Batches are column-major: one sample per column.
/// Hidden layers apply the activation; the last layer is affine only.
struct MLPParams {
    std::vector<int> widths;
    std::vector<Eigen::MatrixXd> weights; // weights[l] is widths[l+1] x widths[l]
    std::vector<Eigen::VectorXd> biases;
    Activation activation = Activation::tanh;

    int layers() const noexcept { return static_cast<int>(weights.size()); }
    int input_width() const noexcept { return widths.front(); }
    int output_width() const noexcept { return widths.back(); }
    std::size_t parameter_count() const noexcept;
};

/// Glorot-normal weights and zero biases; layer l draws from derive_seed(seed, l).
MLPParams init_mlp(const std::vector<int>& widths, Activation activation, std::uint64_t seed);

/// Zero-initialized parameters of the given shape.
MLPParams zero_mlp(const std::vector<int>& widths, Activation activation = Activation::tanh);

/// Per-layer outputs of one forward pass, needed for the reverse pass.
struct MLPCache {
    const MLPParams* params = nullptr;
    std::vector<Eigen::MatrixXd> activations; // [0] = input, [l+1] = output of layer l
};

Eigen::MatrixXd mlp_forward(const MLPParams& params, const Eigen::MatrixXd& input,
                            MLPCache* cache = nullptr);

struct MLPGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Reverse-mode gradients given dLoss/dOutput. Throws if `cache` was not produced
/// by a forward pass of `params` on a batch of the same size. When `input_grad`
/// is non-null it receives dLoss/dInput.
MLPGradients mlp_gradients(const MLPParams& params, const MLPCache& cache,
                           const Eigen::MatrixXd& upstream, Eigen::MatrixXd* input_grad = nullptr);

} // namespace fusionop::nn
