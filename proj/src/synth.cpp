#include <algorithm>
#include <cmath>
#include <vector>

#include "sparseinr/error.hpp"
#include "sparseinr/rng.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

namespace {

// Charge cloud shape in cell units. Drift-time shaping stretches a hit along z;
// adjacent pads share charge in c; each layer samples the track once.
constexpr double kSigmaC = 1.0;
constexpr double kSigmaZ = 1.0;
constexpr double kKernelRadius = 4.0;  // in sigmas

struct Track {
  double c0, z0;
  double slope_c, curvature, slope_z;
  std::uint32_t first_layer;
  double amplitude;
};

Track draw_track(Rng& rng, const Dims& d) {
  Track t{};
  t.c0 = rng.uniform(0.0, static_cast<double>(d.c));
  t.z0 = rng.uniform(0.0, static_cast<double>(d.z));
  t.slope_c = rng.uniform(-1.5, 1.5);
  t.curvature = rng.uniform(-0.08, 0.08);
  t.slope_z = rng.uniform(-2.5, 2.5);
  // Most tracks come from the collision point and cross every layer; the rest
  // start part-way out.
  t.first_layer = rng.uniform() < 0.7 ? 0 : static_cast<std::uint32_t>(rng.uniform_index(d.r / 2 + 1));
  t.amplitude = rng.uniform(0.5, 1.0);
  return t;
}

void deposit(std::vector<double>& charge, const Dims& d, const Track& t, Rng& rng) {
  const double reach_c = kKernelRadius * kSigmaC;
  const double reach_z = kKernelRadius * kSigmaZ;
  for (std::uint32_t k = t.first_layer; k < d.r; ++k) {
    const double s = static_cast<double>(k - t.first_layer);
    const double cc = t.c0 + t.slope_c * s + t.curvature * s * s;
    const double zc = t.z0 + t.slope_z * s;
    const double amp = t.amplitude * rng.uniform(0.75, 1.25);
    const auto i_lo = static_cast<long>(std::ceil(cc - reach_c));
    const auto i_hi = static_cast<long>(std::floor(cc + reach_c));
    const auto j_lo = static_cast<long>(std::ceil(zc - reach_z));
    const auto j_hi = static_cast<long>(std::floor(zc + reach_z));
    for (long i = std::max(i_lo, 0L); i <= std::min(i_hi, static_cast<long>(d.c) - 1); ++i) {
      const double dc = (static_cast<double>(i) - cc) / kSigmaC;
      for (long j = std::max(j_lo, 0L); j <= std::min(j_hi, static_cast<long>(d.z) - 1); ++j) {
        const double dz = (static_cast<double>(j) - zc) / kSigmaZ;
        const std::size_t flat = (static_cast<std::size_t>(i) * d.z + static_cast<std::size_t>(j)) * d.r + k;
        charge[flat] += amp * std::exp(-0.5 * (dc * dc + dz * dz));
      }
    }
  }
}

std::uint16_t quantize(double q, double gain, std::uint16_t floor_adc, std::uint16_t ceil_adc) {
  const double adc = std::nearbyint(q * gain);
  if (adc < floor_adc) return 0;
  if (adc >= ceil_adc) return ceil_adc;
  return static_cast<std::uint16_t>(adc);
}

}  // namespace

Volume3D synth_tracks(const SynthConfig& cfg) {
  cfg.validate();
  const Dims& d = cfg.dims;
  if (cfg.n_tracks == 0) {
    if (cfg.target_occupancy >= 1.0) throw ValidationError("synth: target occupancy 1.0 unreachable with 0 tracks");
    return Volume3D(d);
  }

  Rng rng(cfg.seed);
  std::vector<double> charge(d.cells(), 0.0);
  for (std::uint32_t n = 0; n < cfg.n_tracks; ++n) {
    Rng track_rng = rng.split(n);
    const Track t = draw_track(track_rng, d);
    deposit(charge, d, t, track_rng);
  }

  // Cells that any kernel touched, sorted by charge: occupancy at gain g is the
  // number of these whose quantized value clears the floor.
  std::vector<double> touched;
  for (double q : charge)
    if (q > 0.0) touched.push_back(q);
  std::sort(touched.begin(), touched.end(), std::greater<>());

  const auto [lo, hi] = cfg.intensity_range;
  const double floor_adc = std::max<double>(lo, kZeroSuppression);
  const double target_cells = cfg.target_occupancy * static_cast<double>(d.cells());
  const double max_cells = static_cast<double>(touched.size());
  if (max_cells < 0.5 * target_cells) {
    throw ValidationError("synth: target occupancy " + std::to_string(cfg.target_occupancy) +
                          " unreachable with " + std::to_string(cfg.n_tracks) + " tracks in " + to_string(d));
  }

  // Pick the gain that places the n-th brightest cell exactly at the floor,
  // with n the target count (rounded, clipped to what the tracks can cover).
  const auto want = static_cast<std::size_t>(std::clamp(std::round(target_cells), 1.0, max_cells));
  const double gain = floor_adc / touched[want - 1];

  std::vector<std::uint16_t> values(d.cells(), 0);
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (charge[n] > 0.0) values[n] = quantize(charge[n], gain, static_cast<std::uint16_t>(floor_adc), hi);
  }
  Volume3D out(d, std::move(values));
  const double occ = occupancy(out);
  if (occ < 0.5 * cfg.target_occupancy || occ > 2.0 * cfg.target_occupancy) {
    throw ValidationError("synth: reached occupancy " + std::to_string(occ) + ", outside [target/2, 2*target]");
  }
  return out;
}

}  // namespace sparseinr
