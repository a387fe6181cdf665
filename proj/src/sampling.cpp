#include "sparseinr/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sparseinr/error.hpp"

namespace sparseinr {

std::uint64_t round_half_even(double x) noexcept {
  if (!(x > 0.0)) return 0;
  const double fl = std::floor(x);
  const double frac = x - fl;
  auto r = static_cast<std::uint64_t>(fl);
  if (frac > 0.5 || (frac == 0.5 && (r & 1U))) ++r;
  return r;
}

double default_epsilon(std::span<const double> values) {
  double sum = 0.0;
  std::size_t nonzero = 0;
  for (double y : values) {
    if (y != 0.0) {
      sum += std::abs(y);
      ++nonzero;
    }
  }
  return nonzero == 0 ? 1e-2 : 1e-2 * sum / static_cast<double>(nonzero);
}

ImportanceWeights importance_weights(std::span<const double> values, double epsilon) {
  if (values.empty()) throw ValidationError("importance_weights: empty input");
  if (!(epsilon > 0.0)) throw ValidationError("importance_weights: epsilon must be positive");
  ImportanceWeights out;
  out.epsilon = epsilon;
  out.w.resize(values.size());
  double total = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    out.w[n] = values[n] != 0.0 ? std::abs(values[n]) : epsilon;
    total += out.w[n];
  }
  for (double& w : out.w) w /= total;
  return out;
}

AliasTable::AliasTable(std::span<const double> weights) : prob_(weights.size()), alias_(weights.size()) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("alias table: no outcomes");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("alias table: too many outcomes");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw ValidationError("alias table: weights must have positive sum");

  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw ValidationError("alias table: negative weight");
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : large) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
  for (auto i : small) {
    prob_[i] = 1.0;
    alias_[i] = i;
  }
}

std::size_t AliasTable::sample(Rng& rng) const noexcept {
  const std::size_t column = rng.uniform_index(prob_.size());
  return rng.uniform() < prob_[column] ? column : alias_[column];
}

std::vector<std::size_t> weighted_sample(const ImportanceWeights& w, std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("weighted_sample: n must be >= 1");
  const AliasTable table(w.w);
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = table.sample(rng);
  return out;
}

std::size_t HistogramModel::bin_of(double y) const noexcept {
  const std::size_t b = counts.size();
  const double span = edges.back() - edges.front();
  const double pos = (y - edges.front()) / span * static_cast<double>(b);
  if (!(pos > 0.0)) return 0;
  const auto bin = static_cast<std::size_t>(pos);
  return std::min(bin, b - 1);
}

HistogramModel entropy_histogram(std::span<const double> values, std::size_t bins,
                                 std::optional<std::pair<double, double>> bounds) {
  if (bins == 0) throw ValidationError("entropy_histogram: bin count must be >= 1");
  if (values.empty()) throw ValidationError("entropy_histogram: empty input");
  HistogramModel h;
  if (bounds) {
    if (!(bounds->first < bounds->second)) throw ValidationError("entropy_histogram: bounds must satisfy lo < hi");
    h.lo = bounds->first;
    h.hi = bounds->second;
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    h.lo = *mn;
    h.hi = *mx;
  }
  // A constant input still gets strictly increasing edges (unit span).
  const double span = h.hi > h.lo ? h.hi - h.lo : 1.0;
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) h.edges[k] = h.lo + span * static_cast<double>(k) / static_cast<double>(bins);
  if (h.hi > h.lo) h.edges.back() = h.hi;
  h.counts.assign(bins, 0);
  for (double y : values) ++h.counts[h.bin_of(y)];
  h.total = values.size();
  return h;
}

BinAllocation entropy_allocate(const HistogramModel& hist, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("entropy_allocate: rho must lie in (0, 1]");
  const std::size_t b = hist.bins();
  const auto n_total = static_cast<double>(hist.total);
  BinAllocation out;
  out.rho = rho;
  out.C = n_total * rho / static_cast<double>(b);
  out.take.assign(b, 0);
  const std::uint64_t budget = std::min<std::uint64_t>(round_half_even(n_total * rho), hist.total);

  // Water level lambda with sum_i min(count_i, lambda) == budget. Walk bins in
  // ascending count order; each bin at or below the running level saturates.
  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return hist.counts[x] < hist.counts[y]; });

  std::uint64_t remaining = budget;
  std::size_t pos = 0;
  while (pos < b) {
    const std::size_t open = b - pos;
    const std::uint64_t c = hist.counts[order[pos]];
    if (static_cast<double>(c) * static_cast<double>(open) > static_cast<double>(remaining)) break;
    out.take[order[pos]] = c;
    remaining -= c;
    ++pos;
  }
  if (pos == b) return out;  // every bin saturated: remaining is 0 since budget <= N

  // Surplus bins order[pos..] share the rest equally; the remainder of the
  // integer division goes one unit each to the largest-count bins.
  const std::size_t open = b - pos;
  const std::uint64_t base = remaining / open;
  std::uint64_t extra = remaining % open;
  for (std::size_t k = pos; k < b; ++k) out.take[order[k]] = base;
  for (std::size_t k = b; extra > 0; --extra) ++out.take[order[--k]];
  return out;
}

std::vector<std::size_t> entropy_sample(std::span<const double> values, double rho, std::size_t bins, Rng& rng,
                                        std::optional<std::pair<double, double>> bounds) {
  const HistogramModel hist = entropy_histogram(values, bins, bounds);
  const BinAllocation alloc = entropy_allocate(hist, rho);

  // Members of each bin in flat order (counting sort).
  std::vector<std::size_t> offset(hist.bins() + 1, 0);
  for (std::size_t k = 0; k < hist.bins(); ++k) offset[k + 1] = offset[k] + hist.counts[k];
  std::vector<std::size_t> members(values.size());
  {
    std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
    for (std::size_t i = 0; i < values.size(); ++i) members[cursor[hist.bin_of(values[i])]++] = i;
  }

  std::vector<std::size_t> out;
  out.reserve(std::accumulate(alloc.take.begin(), alloc.take.end(), std::uint64_t{0}));
  for (std::size_t k = 0; k < hist.bins(); ++k) {
    const std::size_t count = hist.counts[k];
    for (std::uint64_t t = 0; t < alloc.take[k]; ++t) out.push_back(members[offset[k] + rng.uniform_index(count)]);
  }
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.uniform_index(i)]);
  return out;
}

std::vector<std::size_t> random_sample(std::size_t n_total, std::size_t n, Rng& rng) {
  if (n == 0) throw ValidationError("random_sample: n must be >= 1");
  if (n_total == 0) throw ValidationError("random_sample: empty population");
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = rng.uniform_index(n_total);
  return out;
}

SampleSet gather(const Volume3D& volume, std::span<const std::size_t> indices) {
  const Dims& d = volume.dims();
  SampleSet s;
  s.indices.assign(indices.begin(), indices.end());
  s.coords.resize(3, static_cast<Eigen::Index>(indices.size()));
  s.targets.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const std::size_t flat = indices[n];
    if (flat >= volume.size()) {
      throw ValidationError("gather: index " + std::to_string(flat) + " out of range for " + to_string(d));
    }
    const Index3 ix = volume.unflatten(flat);
    const auto col = static_cast<Eigen::Index>(n);
    s.coords(0, col) = axis_coord(ix.i, d.c);
    s.coords(1, col) = axis_coord(ix.j, d.z);
    s.coords(2, col) = axis_coord(ix.k, d.r);
    s.targets[col] = static_cast<double>(volume[flat]) / kAdcMax;
  }
  return s;
}

std::vector<double> normalized_values(const Volume3D& volume) {
  std::vector<double> out(volume.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = static_cast<double>(volume[n]) / kAdcMax;
  return out;
}

Eigen::MatrixXd grid_coords(const Dims& d) {
  Eigen::MatrixXd out(3, static_cast<Eigen::Index>(d.cells()));
  Eigen::Index col = 0;
  for (std::uint32_t i = 0; i < d.c; ++i) {
    const double x = axis_coord(i, d.c);
    for (std::uint32_t j = 0; j < d.z; ++j) {
      const double y = axis_coord(j, d.z);
      for (std::uint32_t k = 0; k < d.r; ++k, ++col) {
        out(0, col) = x;
        out(1, col) = y;
        out(2, col) = axis_coord(k, d.r);
      }
    }
  }
  return out;
}

double chi_square_uniform(std::span<const double> counts) {
  if (counts.empty()) return 0.0;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) return 0.0;
  const double expected = total / static_cast<double>(counts.size());
  double chi = 0.0;
  for (double o : counts) chi += (o - expected) * (o - expected) / expected;
  return chi;
}

}  // namespace sparseinr
