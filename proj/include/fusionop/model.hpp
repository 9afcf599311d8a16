#pragma once

#include "fusionop/fourier_features.hpp"
#include "fusionop/grid.hpp"
#include "fusionop/mlp.hpp"
#include "fusionop/pod.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fusionop::model {

enum class ModelKind { ff_pod_deeponet, pod_deeponet, deeponet };
enum class CombineRule { sum, average };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);
CombineRule parse_combine_rule(const std::string& name);
std::string to_string(CombineRule rule);

/// Named view of one parameter tensor, flattened in storage order.
struct ParamRef {
    std::string name;
    std::span<double> values;
};

struct ConstParamRef {
    std::string name;
    std::span<const double> values;
};

/// One gradient buffer per trainable tensor, in the order of trainable().
using Gradients = std::vector<Eigen::VectorXd>;

/// Loss callback used by the reverse pass. Receives predictions (one column per
/// sample) and branch features, returns the loss and fills dLoss/dPred. The
/// feature gradient may be left empty when the loss ignores the features.
using LossFn = std::function<double(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& features,
                                    Eigen::MatrixXd& d_pred, Eigen::MatrixXd& d_features)>;

/// Per-feature affine normalization of branch inputs, fitted once on the
/// training inputs and frozen afterwards.
struct InputNormalizer {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    static InputNormalizer fit(const Eigen::MatrixXd& inputs);
    static InputNormalizer identity(int width);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& inputs) const;
};

/// Common surface of the operator models used by training, transfer and I/O.
class OperatorModel {
public:
    virtual ~OperatorModel() = default;

    virtual std::unique_ptr<OperatorModel> clone() const = 0;
    virtual ModelKind kind() const noexcept = 0;
    virtual const Grid& output_grid() const noexcept = 0;
    virtual int input_width() const noexcept = 0;
    int output_width() const noexcept { return output_grid().size(); }

    /// Width of the branch feature vector compared by the transfer discrepancy.
    virtual int feature_width() const noexcept = 0;

    /// Predicted output functions, one column per input column.
    virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const = 0;

    /// Branch features (stacked branch coefficients), one column per input.
    virtual Eigen::MatrixXd features(const Eigen::MatrixXd& inputs) const = 0;

    /// Forward pass, loss evaluation and reverse pass over one batch.
    /// `grads` is resized to match trainable().
    virtual double loss_and_gradients(const Eigen::MatrixXd& inputs, const LossFn& loss,
                                      Gradients& grads) const = 0;

    /// Tensors the optimizer may update, in a fixed order.
    virtual std::vector<ParamRef> trainable() = 0;
    std::vector<ConstParamRef> trainable() const;

    /// Tensors that stay fixed during fine-tuning (POD bases, frequencies,
    /// input normalization, frozen trunks).
    virtual std::vector<ConstParamRef> frozen() const = 0;

    /// Re-draws every branch network from `seed` (used for transfer ablations).
    virtual void reinit_branches(std::uint64_t seed) = 0;

    /// Value of the prediction for input `u` at an arbitrary point, by
    /// multilinear interpolation of the grid prediction.
    double query(const Eigen::VectorXd& u, std::span<const double> point, int channel = 0) const;
};

/// Fusion-frame POD-DeepONet: one branch MLP and one frozen POD basis per
/// subspace, combined with learnable weights that enter squared.
class FFPodModel final : public OperatorModel {
public:
    Grid grid;
    ModelKind model_kind = ModelKind::ff_pod_deeponet;
    InputNormalizer normalizer;
    std::vector<nn::MLPParams> branches;
    std::vector<pod::PODBasis> pod_bases;
    Eigen::VectorXd weights;
    std::vector<features::FrequencyMatrix> frequency_matrices;
    CombineRule combine = CombineRule::sum;
    bool train_weights = true;
    std::vector<int> hidden_widths;
    nn::Activation activation = nn::Activation::tanh;
    std::uint64_t seed = 0;

    /// Optional fixed S^-1 of the unit-weight fusion frame of the feature
    /// subspaces, applied after combination (ablation only).
    std::optional<Eigen::MatrixXd> inverse_operator;

    int n_subspaces() const noexcept { return static_cast<int>(branches.size()); }

    std::unique_ptr<OperatorModel> clone() const override;
    ModelKind kind() const noexcept override { return model_kind; }
    const Grid& output_grid() const noexcept override { return grid; }
    int input_width() const noexcept override { return static_cast<int>(normalizer.shift.size()); }
    int feature_width() const noexcept override;

    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const override;
    Eigen::MatrixXd features(const Eigen::MatrixXd& inputs) const override;
    double loss_and_gradients(const Eigen::MatrixXd& inputs, const LossFn& loss,
                              Gradients& grads) const override;

    std::vector<ParamRef> trainable() override;
    using OperatorModel::trainable;
    std::vector<ConstParamRef> frozen() const override;
    void reinit_branches(std::uint64_t seed) override;

    /// Initial fusion weight: combined prediction starts as the plain average.
    double initial_weight() const noexcept;

    /// Throws unless the per-subspace containers agree in length and width.
    void validate() const;
};

/// Standard DeepONet: prediction(xi) = sum_k b_k(u) t_k(xi) + bias, with a
/// trainable trunk over grid coordinates. Multi-channel outputs use one block
/// of n_basis branch outputs per channel and a shared trunk.
class DeepONetModel final : public OperatorModel {
public:
    Grid grid;
    InputNormalizer normalizer;
    nn::MLPParams branch;
    nn::MLPParams trunk;
    Eigen::VectorXd bias; // one per channel
    int n_basis = 0;
    bool freeze_trunk = false;
    std::vector<int> hidden_widths;
    nn::Activation activation = nn::Activation::tanh;
    std::uint64_t seed = 0;

    std::unique_ptr<OperatorModel> clone() const override;
    ModelKind kind() const noexcept override { return ModelKind::deeponet; }
    const Grid& output_grid() const noexcept override { return grid; }
    int input_width() const noexcept override { return static_cast<int>(normalizer.shift.size()); }
    int feature_width() const noexcept override { return branch.output_width(); }

    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const override;
    Eigen::MatrixXd features(const Eigen::MatrixXd& inputs) const override;
    double loss_and_gradients(const Eigen::MatrixXd& inputs, const LossFn& loss,
                              Gradients& grads) const override;

    std::vector<ParamRef> trainable() override;
    using OperatorModel::trainable;
    std::vector<ConstParamRef> frozen() const override;
    void reinit_branches(std::uint64_t seed) override;

    /// Trunk evaluated at every grid node: n_basis x points.
    Eigen::MatrixXd trunk_outputs() const;
};

struct FFPodOptions {
    int n_subspaces = 20;
    int modes_per_subspace = 80;
    int features_per_subspace = 40;
    double scale_min = 1.0;
    double scale_max = 20.0;
    std::vector<int> hidden = {128, 128};
    nn::Activation activation = nn::Activation::tanh;
    CombineRule combine = CombineRule::sum;
    bool apply_inverse_operator = false;
    std::uint64_t seed = 0;
};

/// Builds the fusion-frame model from training pairs (one column per sample):
/// Fourier-feature subspaces of the output grid, per-subspace POD of the
/// projected output snapshots, one freshly initialized branch per subspace.
FFPodModel build_ff_pod_deeponet(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                 const Grid& grid, const FFPodOptions& options);

/// Global POD of the output snapshots with one branch and fixed weight 1.
FFPodModel build_pod_deeponet(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                              const Grid& grid, int modes, const std::vector<int>& hidden,
                              nn::Activation activation, std::uint64_t seed);

/// Fusion-frame model over explicitly given subspace bases (columns orthonormal).
FFPodModel build_ff_from_subspaces(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& outputs,
                                   const Grid& grid, const std::vector<Eigen::MatrixXd>& bases,
                                   int modes, const std::vector<int>& hidden,
                                   nn::Activation activation, CombineRule combine,
                                   std::uint64_t seed);

DeepONetModel build_deeponet(const Eigen::MatrixXd& inputs, const Grid& grid, int n_basis,
                             const std::vector<int>& branch_hidden,
                             const std::vector<int>& trunk_hidden, nn::Activation activation,
                             std::uint64_t seed);

/// S^-1 for the unit-weight fusion frame of the given subspace bases.
Eigen::MatrixXd fusion_inverse_operator(const std::vector<Eigen::MatrixXd>& bases);

/// Rebuilds the subspace bases of a fusion-frame model from its frequencies.
std::vector<Eigen::MatrixXd> feature_bases(const FFPodModel& model);

} // namespace fusionop::model
