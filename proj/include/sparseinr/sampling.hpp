#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sparseinr/rng.hpp"
#include "sparseinr/volume.hpp"

namespace sparseinr {

/// Training rows selected for one step or epoch. coords is 3 x n.
struct SampleSet {
  std::vector<std::size_t> indices;
  Eigen::MatrixXd coords;
  Eigen::VectorXd targets;

  std::size_t size() const noexcept { return indices.size(); }
};

/// Normalized sampling distribution over cells: w_i proportional to |y_i|,
/// or epsilon where y_i == 0.
struct ImportanceWeights {
  std::vector<double> w;
  double epsilon = 0.0;
};

ImportanceWeights importance_weights(std::span<const double> values, double epsilon);

/// Default epsilon: 1e-2 times the mean nonzero |y| (1e-2 if all values are 0).
double default_epsilon(std::span<const double> values);

/// Walker/Vose alias table: O(n) build, O(1) per draw.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  std::size_t sample(Rng& rng) const noexcept;
  std::size_t size() const noexcept { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

/// n i.i.d. draws with replacement, P(i) = w_i.
std::vector<std::size_t> weighted_sample(const ImportanceWeights& w, std::size_t n, Rng& rng);

/// Equal-width histogram of the values.
struct HistogramModel {
  std::vector<double> edges;          // B + 1 boundaries
  std::vector<std::uint64_t> counts;  // per bin
  std::uint64_t total = 0;            // N
  double lo = 0.0;                    // ell
  double hi = 0.0;                    // u

  std::size_t bins() const noexcept { return counts.size(); }
  /// Bin of value y; values outside [lo, hi] clamp to the end bins.
  std::size_t bin_of(double y) const noexcept;
};

/// Bins span [min, max] of the values unless `bounds` overrides them. The
/// maximum lands in the last bin; a constant input puts everything in bin 0.
HistogramModel entropy_histogram(std::span<const double> values, std::size_t bins,
                                 std::optional<std::pair<double, double>> bounds = std::nullopt);

struct BinAllocation {
  std::vector<std::uint64_t> take;
  double C = 0.0;
  double rho = 0.0;
};

/// Per-bin quotas flattening the sampled value distribution. Base quota
/// C = N rho / B; bins below their quota give everything they have and the
/// remaining budget is water-filled equally across the larger bins. The total
/// is exactly round(N rho).
BinAllocation entropy_allocate(const HistogramModel& hist, double rho);

/// Histogram, allocate, then draw take_i members of each bin uniformly with
/// replacement. The result is shuffled so that consecutive batches mix bins.
std::vector<std::size_t> entropy_sample(std::span<const double> values, double rho, std::size_t bins, Rng& rng,
                                        std::optional<std::pair<double, double>> bounds = std::nullopt);

/// n indices uniform over [0, n_total), with replacement.
std::vector<std::size_t> random_sample(std::size_t n_total, std::size_t n, Rng& rng);

/// Normalized coordinates and target values for the given flat indices.
SampleSet gather(const Volume3D& volume, std::span<const std::size_t> indices);

/// Every cell's normalized value, in flat order.
std::vector<double> normalized_values(const Volume3D& volume);

/// Normalized coordinates of every cell, in flat order (3 x N).
Eigen::MatrixXd grid_coords(const Dims& dims);

/// Pearson chi-square of counts against a uniform spread of their total.
double chi_square_uniform(std::span<const double> counts);

/// Round half to even.
std::uint64_t round_half_even(double x) noexcept;

}  // namespace sparseinr
