#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sparseinr/models.hpp"
#include "sparseinr/nncore.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

enum class SamplerMethod { Full, Importance, Entropy, Random };

std::string to_string(SamplerMethod m);
SamplerMethod parse_sampler_method(const std::string& name);

struct SamplerSpec {
  SamplerMethod method = SamplerMethod::Full;
  double rho = 1.0;
  std::optional<double> epsilon;  // default: see default_epsilon()
  std::size_t bins = 256;
  std::optional<std::pair<double, double>> bounds;  // entropy histogram range override
};

struct TrainConfig {
  std::uint32_t epochs = 500;
  std::uint32_t steps_per_epoch = 0;  // 0: ceil(rho N / batch_size)
  std::uint32_t batch_size = 4096;
  AdamHyper adam;
  SamplerSpec sampler;
  std::uint64_t seed = 0;
  std::uint32_t loss_eval_every = 10;
  bool shuffle = false;  // FULL only: fresh visiting order each epoch instead of one fixed order

  void validate() const;
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double train_loss = 0.0;           // sampled MSE, normalized units
  std::optional<double> full_mse;    // whole-volume MSE on eval epochs
  double wall_ms = 0.0;              // sampling + optimization
  double sample_ms = 0.0;            // sampling share of wall_ms

  std::optional<double> full_mse_raw() const {
    if (!full_mse) return std::nullopt;
    return *full_mse * kAdcMax * kAdcMax;
  }
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  double setup_ms = 0.0;  // one-off sampler construction (e.g. importance table)

  std::optional<double> final_full_mse() const;
  double total_wall_ms() const;
  double mean_epoch_ms() const;
  double mean_sample_ms() const;

  /// CSV with header `epoch,train_loss,full_mse,wall_ms`; full_mse is empty on
  /// epochs without a full evaluation.
  void write_csv(const std::filesystem::path& path) const;
  std::string to_csv() const;
};

struct TrainResult {
  ModelParams model;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean of squared differences.
double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

/// Fits a freshly built model to the volume's normalized values with Adam on
/// MSE. Deterministic for a fixed config (timing fields aside).
TrainResult train(const Volume3D& volume, const ModelSpec& spec, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Continues training an existing model.
TrainResult train(const Volume3D& volume, ModelParams model, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// MSE between the model over every cell of the volume and its normalized
/// values. Cells are evaluated in chunks but summed in flat order, so the
/// result does not depend on `chunk` beyond rounding in the forward pass.
double evaluate_full(const ModelParams& model, const Volume3D& volume, std::size_t chunk = 16384);

/// Number of points one epoch touches.
std::size_t epoch_points(const TrainConfig& cfg, std::size_t n_cells);

}  // namespace sparseinr
