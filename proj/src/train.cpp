#include "sparseinr/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sparseinr/error.hpp"
#include "sparseinr/sampling.hpp"

namespace sparseinr {

namespace {

using Clock = std::chrono::steady_clock;

// Stream reserved for the fixed FULL visiting order; epochs use split(epoch).
constexpr std::uint64_t kFullOrderStream = 0xF0110;

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.uniform_index(i)]);
  return out;
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Produces the flat indices of one epoch for the configured method.
class EpochSampler {
 public:
  EpochSampler(const Volume3D& volume, const SamplerSpec& spec)
      : spec_(spec), n_cells_(volume.size()) {
    switch (spec.method) {
      case SamplerMethod::Full:
        break;
      case SamplerMethod::Importance: {
        const auto values = normalized_values(volume);
        const double eps = spec.epsilon.value_or(default_epsilon(values));
        const ImportanceWeights w = importance_weights(values, eps);
        table_.emplace(w.w);
        break;
      }
      case SamplerMethod::Entropy:
        values_ = normalized_values(volume);
        break;
      case SamplerMethod::Random:
        break;
    }
  }

  std::vector<std::size_t> draw(std::size_t n, Rng& rng) const {
    switch (spec_.method) {
      case SamplerMethod::Full:
        return permutation(n_cells_, rng);
      case SamplerMethod::Importance: {
        std::vector<std::size_t> out(n);
        for (auto& idx : out) idx = table_->sample(rng);
        return out;
      }
      case SamplerMethod::Entropy:
        return entropy_sample(values_, spec_.rho, spec_.bins, rng, spec_.bounds);
      case SamplerMethod::Random:
        return random_sample(n_cells_, n, rng);
    }
    return {};
  }

 private:
  SamplerSpec spec_;
  std::size_t n_cells_;
  std::optional<AliasTable> table_;
  std::vector<double> values_;
};

}  // namespace

std::string to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::Full: return "full";
    case SamplerMethod::Importance: return "importance";
    case SamplerMethod::Entropy: return "entropy";
    case SamplerMethod::Random: return "random";
  }
  return "unknown";
}

SamplerMethod parse_sampler_method(const std::string& name) {
  if (name == "full") return SamplerMethod::Full;
  if (name == "importance") return SamplerMethod::Importance;
  if (name == "entropy") return SamplerMethod::Entropy;
  if (name == "random") return SamplerMethod::Random;
  throw ValidationError("unknown sampler '" + name + "' (expected full, importance, entropy, random)");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ValidationError("train: epochs must be >= 1");
  if (batch_size == 0) throw ValidationError("train: batch_size must be >= 1");
  if (loss_eval_every == 0) throw ValidationError("train: loss_eval_every must be >= 1");
  if (!(sampler.rho > 0.0 && sampler.rho <= 1.0)) throw ValidationError("train: rho must lie in (0, 1]");
  if (sampler.epsilon && !(*sampler.epsilon > 0.0)) throw ValidationError("train: epsilon must be positive");
  if (sampler.bins == 0) throw ValidationError("train: bins must be >= 1");
  adam.validate();
}

std::size_t epoch_points(const TrainConfig& cfg, std::size_t n_cells) {
  if (cfg.sampler.method == SamplerMethod::Full) return n_cells;
  if (cfg.steps_per_epoch > 0) return static_cast<std::size_t>(cfg.steps_per_epoch) * cfg.batch_size;
  return std::max<std::size_t>(1, round_half_even(cfg.sampler.rho * static_cast<double>(n_cells)));
}

std::optional<double> TrainLog::final_full_mse() const {
  for (auto it = epochs.rbegin(); it != epochs.rend(); ++it)
    if (it->full_mse) return it->full_mse;
  return std::nullopt;
}

double TrainLog::total_wall_ms() const {
  double sum = setup_ms;
  for (const auto& e : epochs) sum += e.wall_ms;
  return sum;
}

double TrainLog::mean_epoch_ms() const {
  if (epochs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : epochs) sum += e.wall_ms;
  return sum / static_cast<double>(epochs.size());
}

double TrainLog::mean_sample_ms() const {
  if (epochs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : epochs) sum += e.sample_ms;
  return sum / static_cast<double>(epochs.size());
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_loss,full_mse,wall_ms\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.train_loss << ',';
    if (e.full_mse) os << *e.full_mse;
    os << ',' << e.wall_ms << '\n';
  }
  return os.str();
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_csv();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) { return mse(pred, target); }

double evaluate_full(const ModelParams& model, const Volume3D& volume, std::size_t chunk) {
  if (chunk == 0) throw ValidationError("evaluate_full: chunk must be >= 1");
  const std::size_t n = volume.size();
  double sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t len = std::min(chunk, n - start);
    idx.resize(len);
    std::iota(idx.begin(), idx.end(), start);
    const SampleSet s = gather(volume, idx);
    const Eigen::VectorXd pred = forward(model, s.coords);
    for (Eigen::Index k = 0; k < pred.size(); ++k) {
      const double d = pred[k] - s.targets[k];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(n);
}

TrainResult train(const Volume3D& volume, const ModelSpec& spec, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (spec.in_dim != 3) throw ValidationError("train: volumes need a 3-input model");
  return train(volume, build_model(spec), cfg, on_epoch);
}

TrainResult train(const Volume3D& volume, ModelParams model, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  if (volume.size() == 0) throw ValidationError("train: empty volume");

  TrainResult result;
  const auto setup_start = Clock::now();
  const EpochSampler sampler(volume, cfg.sampler);
  const bool full = cfg.sampler.method == SamplerMethod::Full;
  SampleSet full_set;
  if (full) {
    // One seeded permutation reused every epoch: flat order puts one or two
    // contiguous c-slices in each batch and Adam never settles.
    Rng order_rng(cfg.seed, kFullOrderStream);
    full_set = gather(volume, permutation(volume.size(), order_rng));
  }
  result.log.setup_ms = ms_since(setup_start);

  AdamState adam = AdamState::init(model.layers, cfg.adam);
  const Rng master(cfg.seed);
  const std::size_t n_epoch = epoch_points(cfg, volume.size());
  const std::size_t batch = cfg.batch_size;

  Eigen::MatrixXd coords;
  Eigen::VectorXd targets;
  BackwardWorkspace ws;
  ParamSet grads;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    Rng rng = master.split(epoch);

    SampleSet drawn;
    const SampleSet* set = &full_set;
    if (!full || cfg.shuffle) {
      const auto indices = sampler.draw(n_epoch, rng);
      if (indices.empty()) throw ValidationError("train: sampler produced an empty epoch (rho too small)");
      drawn = gather(volume, indices);
      set = &drawn;
    }
    const double sample_ms = ms_since(epoch_start);

    const auto n = static_cast<Eigen::Index>(set->size());
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += static_cast<Eigen::Index>(batch)) {
      const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(batch), n - start);
      coords = set->coords.middleCols(start, len);
      targets = set->targets.segment(start, len);
      double loss = 0.0;
      try {
        loss = backward_into(model, coords, targets, grads, ws);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", offset " +
                             std::to_string(start) + ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(len);
      adam_step(model.layers, grads, adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.sample_ms = sample_ms;
    rec.wall_ms = ms_since(epoch_start);
    if ((epoch + 1) % cfg.loss_eval_every == 0 || epoch + 1 == cfg.epochs) {
      rec.full_mse = evaluate_full(model, volume);
      if (!std::isfinite(*rec.full_mse)) throw NumericalError("non-finite full-volume MSE at epoch " + std::to_string(epoch));
    }
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace sparseinr
