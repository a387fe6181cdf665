#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "sparseinr/codec.hpp"
#include "sparseinr/models.hpp"
#include "sparseinr/train.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

/// A volume read from disk or generated on the fly.
using VolumeSource = std::variant<std::filesystem::path, SynthConfig>;

Volume3D materialize(const VolumeSource& src);
std::string label(const VolumeSource& src);

/// Super-resolution scale S with its per-axis decimation factors
/// (S=4: x2 in c and z; S=16: x4 in c and z; S=8: x2 in c, z and r).
struct Scale {
  std::uint32_t s = 1;
  Factors factors;
};

Scale scale_for(std::uint32_t s);

struct SweepSpec {
  std::vector<VolumeSource> volumes{SynthConfig{{96, 125, 16}, 20, 0.01, {64, 1023}, 0}};
  std::vector<ModelKind> kinds{ModelKind::Siren};
  std::vector<std::uint32_t> widths{128};
  std::uint32_t depth = 3;
  std::vector<SamplerMethod> methods{SamplerMethod::Importance, SamplerMethod::Random, SamplerMethod::Entropy};
  std::vector<double> rhos{0.05, 0.1, 0.25};
  std::vector<std::uint32_t> scales{1, 4, 16, 8};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::uint32_t epochs = 200;
  ModelSpec model;      // base for kind-specific hyperparameters
  TrainConfig train;    // base for optimizer, batch size, sampler bins/epsilon
  WeightPrecision precision = WeightPrecision::Fp32;
  unsigned jobs = 1;

  void validate() const;
};

struct BenchRecord {
  std::string suite;
  std::string volume;
  ModelKind kind = ModelKind::Siren;
  std::uint32_t width = 0;
  std::uint32_t depth = 0;
  SamplerMethod method = SamplerMethod::Full;
  double rho = 1.0;
  std::uint32_t scale = 1;
  Factors factors;
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;

  double full_mse = 0.0;  // model output vs reference over the full-resolution grid, normalized units
  double raw_mse = 0.0;   // decoded ADC counts vs reference
  double l1_mean = 0.0;
  double psnr = 0.0;
  std::uint64_t artifact_bytes = 0;
  double compression_ratio = 0.0;
  double total_wall_ms = 0.0;
  double per_epoch_wall_ms = 0.0;
  double per_epoch_sample_ms = 0.0;
  double setup_ms = 0.0;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// One sweep cell as it would run, for dry runs and progress output.
struct SweepCell {
  std::string suite;
  std::size_t volume = 0;
  ModelKind kind = ModelKind::Siren;
  std::uint32_t width = 0;
  SamplerMethod method = SamplerMethod::Full;
  double rho = 1.0;
  std::uint32_t scale = 1;
  std::uint64_t seed = 0;
};

std::string describe(const SweepCell& cell, const SweepSpec& spec);

std::vector<SweepCell> reconstruction_cells(const SweepSpec& spec);
std::vector<SweepCell> rate_distortion_cells(const SweepSpec& spec);
std::vector<SweepCell> sampling_cells(const SweepSpec& spec);

using ProgressFn = std::function<void(const BenchRecord&)>;

/// Downsample by each scale's factors, train with FULL sampling, decode at the
/// source resolution and score against the source.
std::vector<BenchRecord> run_reconstruction_suite(const SweepSpec& spec, const ProgressFn& progress = {});

/// One record per (volume, kind, width, seed), trained with spec.train's sampler.
std::vector<BenchRecord> run_rate_distortion(const SweepSpec& spec, const ProgressFn& progress = {});

/// One SIREN record per (volume, method, rho, seed).
std::vector<BenchRecord> run_sampling_efficiency(const SweepSpec& spec, const ProgressFn& progress = {});

/// Runs one cell. Records depend only on the cell and spec (timing aside).
BenchRecord run_cell(const SweepCell& cell, const SweepSpec& spec, const Volume3D& volume);

std::string csv_header();
std::string to_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(const std::string& text);

struct OrderingCheck {
  std::string name;
  bool pass = true;
  bool applicable = false;  // false when the records lack the rows to decide
  std::string detail;
};

/// Orderings expected from the experiments, on seed medians.
std::vector<OrderingCheck> check_orderings(const std::vector<BenchRecord>& records);

std::string summary_markdown(const std::vector<BenchRecord>& records);

/// Writes `csv_path` and a markdown summary alongside it (same stem, `.md`).
/// Returns the summary path.
std::filesystem::path emit_report(const std::vector<BenchRecord>& records, const std::filesystem::path& csv_path);

double median(std::vector<double> v);

/// Coefficient of determination of the least-squares line through (x, y).
double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sparseinr
