#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sparseinr {

inline constexpr std::uint16_t kAdcMax = 1023;
inline constexpr std::uint16_t kZeroSuppression = 64;

/// Grid extent in (c, z, r) order: azimuthal bins, axial bins, radial layers.
struct Dims {
  std::uint32_t c = 0;
  std::uint32_t z = 0;
  std::uint32_t r = 0;

  std::size_t cells() const noexcept {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(z) * static_cast<std::size_t>(r);
  }
  std::uint32_t operator[](std::size_t axis) const noexcept { return axis == 0 ? c : axis == 1 ? z : r; }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Parses "CxZxR" (e.g. "192x249x16").
Dims parse_dims(const std::string& text);
std::string to_string(const Dims& d);

/// Per-axis integer decimation factors.
struct Factors {
  std::uint32_t c = 1;
  std::uint32_t z = 1;
  std::uint32_t r = 1;

  friend bool operator==(const Factors&, const Factors&) = default;
};

struct Index3 {
  std::uint32_t i = 0;  // c
  std::uint32_t j = 0;  // z
  std::uint32_t k = 0;  // r
};

/// A point of the [-1, 1]^3 model input domain.
struct NormalizedCoord {
  std::array<double, 3> x{};
};

/// Dense (c, z, r) grid of ADC counts, row-major with r innermost.
///
/// The constructor enforces the 10-bit range. The zero-suppression floor is a
/// property of detector data, not of every grid we store (error maps and
/// decoded volumes may hold values in (0, 64)); query it with
/// is_zero_suppressed().
class Volume3D {
 public:
  Volume3D() = default;
  explicit Volume3D(Dims dims);  // all zeros
  Volume3D(Dims dims, std::vector<std::uint16_t> values);

  const Dims& dims() const noexcept { return dims_; }
  std::span<const std::uint16_t> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t flat_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const noexcept {
    return (static_cast<std::size_t>(i) * dims_.z + j) * dims_.r + k;
  }
  Index3 unflatten(std::size_t flat) const noexcept;

  std::uint16_t at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const;
  std::uint16_t operator[](std::size_t flat) const noexcept { return values_[flat]; }

  /// Every nonzero value is at least kZeroSuppression.
  bool is_zero_suppressed() const noexcept;

  friend bool operator==(const Volume3D&, const Volume3D&) = default;

 private:
  Dims dims_;
  std::vector<std::uint16_t> values_;
};

/// Synthetic sparse-track generator settings.
struct SynthConfig {
  Dims dims{48, 64, 8};
  std::uint32_t n_tracks = 20;
  double target_occupancy = 0.01;
  std::pair<std::uint16_t, std::uint16_t> intensity_range{kZeroSuppression, kAdcMax};
  std::uint64_t seed = 0;

  void validate() const;
};

/// INRV reader/writer. Throws IoError for filesystem failures and FormatError
/// for malformed contents.
Volume3D load_volume(const std::filesystem::path& path);
void save_volume(const Volume3D& v, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_volume(const Volume3D& v);
Volume3D decode_volume(std::span<const std::uint8_t> bytes);

inline constexpr std::size_t kInrvHeaderBytes = 20;

/// Rasterizes n_tracks smooth curves with a Gaussian charge kernel, applies a
/// global gain chosen so that occupancy lands near the target, then quantizes
/// and zero-suppresses. Pure function of the config.
Volume3D synth_tracks(const SynthConfig& cfg);

/// Strided decimation keeping indices 0, f, 2f, ... on each axis.
Volume3D downsample(const Volume3D& v, Factors factors);

/// Maps index t on an axis of size D to -1 + 2t/(D-1); size-1 axes map to 0.
double axis_coord(std::uint32_t t, std::uint32_t size) noexcept;
NormalizedCoord normalize_coords(Index3 index, Dims dims);

double normalize_value(int adc);
std::uint16_t denormalize_value(double u) noexcept;

double occupancy(const Volume3D& v) noexcept;
std::size_t count_nonzero(const Volume3D& v) noexcept;

}  // namespace sparseinr
