#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparseinr/nncore.hpp"

namespace sparseinr {

enum class ModelKind : std::uint8_t { Mlp = 0, FfNet = 1, Siren = 2, Wire = 3 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct FourierParams {
  std::uint32_t n_features = 256;
  double sigma = 10.0;
  std::uint64_t seed = 0;

  friend bool operator==(const FourierParams&, const FourierParams&) = default;
};

struct WireParams {
  double omega0 = 20.0;
  double s0 = 10.0;

  friend bool operator==(const WireParams&, const WireParams&) = default;
};

/// Architecture of one coordinate network.
struct ModelSpec {
  ModelKind kind = ModelKind::Siren;
  std::uint32_t in_dim = 3;
  std::vector<std::uint32_t> hidden_dims{128, 128, 128};
  std::uint32_t out_dim = 1;
  double siren_omega0 = 30.0;
  FourierParams fourier;
  WireParams wire;
  std::uint64_t init_seed = 0;

  void validate() const;
  /// Width of the first dense layer's input (2 * n_features for FFNet).
  std::uint32_t encoded_dim() const noexcept;
  /// Closed-form trainable parameter count.
  std::size_t param_count() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Architecture plus all weights. `fourier_B` (n_features x in_dim) is present
/// iff kind == FfNet and is not trained.
struct ModelParams {
  ModelSpec spec;
  ParamSet layers;
  std::optional<Eigen::MatrixXd> fourier_B;

  void validate() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Deterministic initialization from spec.init_seed (and spec.fourier.seed for B).
ModelParams build_model(const ModelSpec& spec);

/// gamma(x) = [sin(2 pi B x), cos(2 pi B x)] for every column of `coords`.
Eigen::MatrixXd fourier_features(const CoordBatch& coords, const Eigen::MatrixXd& B);

/// Real Gabor wavelet cos(omega0 u) exp(-(s0 u)^2).
double wire_activation(double u, double omega0, double s0) noexcept;

/// Scalar-output SIREN forward for a single input point.
double siren_forward(const ModelParams& params, const Eigen::VectorXd& x);

/// Dispatches to the architecture's forward pass; outputs in normalized value
/// units, unclamped.
Eigen::VectorXd eval_model(const ModelParams& params, const CoordBatch& coords);

/// Model input for every column of `coords` (identity unless FfNet).
Eigen::MatrixXd encode_inputs(const ModelParams& params, const CoordBatch& coords);

}  // namespace sparseinr
