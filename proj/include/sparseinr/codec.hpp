#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "sparseinr/models.hpp"
#include "sparseinr/train.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

inline constexpr std::uint32_t kInrcVersion = 1;

enum class WeightPrecision : std::uint8_t { Fp32 = 0, Fp16 = 1 };

std::string to_string(WeightPrecision p);
WeightPrecision parse_precision(const std::string& name);

/// A trained network plus what is needed to decode it. Weights are held at
/// exactly the precision they are stored in, so a serialize/deserialize round
/// trip reproduces the artifact bit for bit. Values decode as u * 1023.
struct CompressedArtifact {
  std::uint32_t format_version = kInrcVersion;
  WeightPrecision precision = WeightPrecision::Fp32;
  ModelParams model;
  Dims source_dims;
  Factors factors;  // decimation applied to the source before training

  void validate() const;

  friend bool operator==(const CompressedArtifact&, const CompressedArtifact&) = default;
};

/// Rounds the weights to `precision` and fills in metadata. Spec fields that
/// the format does not carry (init_seed, the omega0 of the other sine family)
/// are reset to their defaults.
CompressedArtifact package(ModelParams model, Dims source_dims, Factors factors, WeightPrecision precision);

struct CompressOptions {
  WeightPrecision precision = WeightPrecision::Fp32;
  std::optional<Dims> source_dims;  // default: the training volume's dims
  Factors factors;
};

struct CompressResult {
  CompressedArtifact artifact;
  TrainLog log;
};

/// Trains a model on `volume` and packages it.
CompressResult compress(const Volume3D& volume, const ModelSpec& spec, const TrainConfig& cfg,
                        const CompressOptions& opts = {}, const EpochCallback& on_epoch = {});

std::vector<std::uint8_t> encode_artifact(const CompressedArtifact& a);
CompressedArtifact decode_artifact(std::span<const std::uint8_t> bytes);
void save_artifact(const CompressedArtifact& a, const std::filesystem::path& path);
CompressedArtifact load_artifact(const std::filesystem::path& path);

/// Header bytes before the first weight.
std::size_t artifact_header_bytes(const ModelSpec& spec) noexcept;

struct DecodeOptions {
  bool resuppress = false;  // zero decoded values below 64
  std::size_t chunk = 16384;
};

/// Evaluates the model on the [-1, 1] grid of `target`, then rounds and clamps
/// to ADC counts.
Volume3D decompress(const CompressedArtifact& a, Dims target, const DecodeOptions& opts = {});
Volume3D decompress(const CompressedArtifact& a);

/// Stored size of the source grid at 16 bits per cell (no container header).
std::size_t raw_bytes(const Dims& d) noexcept;

/// raw_bytes(source) / serialized artifact bytes.
double compression_ratio(const CompressedArtifact& a);
double compression_ratio(const Dims& source, std::size_t artifact_bytes) noexcept;

struct ErrorReport {
  Volume3D abs_error;  // |a - b| per cell, ADC units
  double raw_mse = 0.0;
  double mse = 0.0;  // normalized units (raw / 1023^2)
  double l1_mean = 0.0;
  double max_abs = 0.0;
  double psnr = std::numeric_limits<double>::infinity();  // peak 1023; +inf when identical
};

ErrorReport error_map(const Volume3D& decoded, const Volume3D& reference);

/// IEEE binary16 conversion, round to nearest even; overflow saturates to inf.
std::uint16_t float_to_half(float f) noexcept;
float half_to_float(std::uint16_t h) noexcept;

}  // namespace sparseinr
