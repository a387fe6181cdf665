#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace sparseinr {

struct ModelParams;

/// One dense layer: y = W x + b with W of shape (out_dim, in_dim).
struct LayerParams {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;

  friend bool operator==(const LayerParams& a, const LayerParams& b);
};

/// Per-layer tensors shaped like a model's trainable parameters (gradients,
/// optimizer moments).
using ParamSet = std::vector<LayerParams>;

ParamSet zeros_like(const ParamSet& p);
std::size_t param_count(const ParamSet& p) noexcept;

/// Batch of model inputs, one column per sample (in_dim x n).
using CoordBatch = Eigen::MatrixXd;

/// Evaluates the network on every column of `coords`. Pure.
Eigen::VectorXd forward(const ModelParams& model, const CoordBatch& coords);

struct LossAndGrad {
  double loss = 0.0;
  ParamSet grads;
};

/// Mean-squared-error loss over the batch and its gradient with respect to
/// every trainable parameter (reverse accumulation over the layer stack).
/// Throws NumericalError naming the layer if an intermediate is non-finite.
LossAndGrad backward(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets);

/// Activation buffers reused across calls of the same batch shape.
struct BackwardWorkspace {
  std::vector<Eigen::MatrixXd> inputs;  // inputs[l] feeds layer l
  std::vector<Eigen::MatrixXd> derivs;  // act'(z_l) for hidden layers
  Eigen::MatrixXd z;
  Eigen::MatrixXd g;
  Eigen::MatrixXd g_prev;
};

/// Same as backward(), writing gradients into `grads` (resized as needed) and
/// returning the loss.
double backward_into(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets,
                     ParamSet& grads, BackwardWorkspace& ws);

/// Maximum over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8),
/// with the numeric gradient from central differences of step h.
double gradcheck(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets, double h);

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::uint64_t t = 0;
  AdamHyper hyper;

  static AdamState init(const ParamSet& params, AdamHyper hyper);
};

/// Bias-corrected Adam update, in place.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

/// Mean of squared differences, summed sequentially in index order.
double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

}  // namespace sparseinr
