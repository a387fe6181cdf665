#include "sparseinr/models.hpp"

#include <cmath>
#include <numbers>

#include "sparseinr/detail/fastmath.hpp"
#include "sparseinr/error.hpp"
#include "sparseinr/rng.hpp"

namespace sparseinr {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mlp: return "mlp";
    case ModelKind::FfNet: return "ffnet";
    case ModelKind::Siren: return "siren";
    case ModelKind::Wire: return "wire";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "ffnet") return ModelKind::FfNet;
  if (name == "siren") return ModelKind::Siren;
  if (name == "wire") return ModelKind::Wire;
  throw ValidationError("unknown model kind '" + name + "' (expected mlp, ffnet, siren, wire)");
}

void ModelSpec::validate() const {
  if (in_dim == 0) throw ValidationError("model: in_dim must be >= 1");
  if (out_dim != 1) throw ValidationError("model: out_dim must be 1");
  if (hidden_dims.empty()) throw ValidationError("model: at least one hidden layer is required");
  for (auto w : hidden_dims)
    if (w == 0) throw ValidationError("model: hidden widths must be >= 1");
  switch (kind) {
    case ModelKind::Mlp: break;
    case ModelKind::FfNet:
      if (fourier.n_features == 0) throw ValidationError("model: ffnet needs n_features >= 1");
      if (!(fourier.sigma > 0.0)) throw ValidationError("model: ffnet sigma must be positive");
      break;
    case ModelKind::Siren:
      if (!(siren_omega0 > 0.0)) throw ValidationError("model: siren omega0 must be positive");
      break;
    case ModelKind::Wire:
      if (!(wire.omega0 > 0.0) || !(wire.s0 > 0.0)) throw ValidationError("model: wire omega0 and s0 must be positive");
      break;
    default:
      throw ValidationError("model: unknown kind");
  }
}

std::uint32_t ModelSpec::encoded_dim() const noexcept {
  return kind == ModelKind::FfNet ? 2 * fourier.n_features : in_dim;
}

std::size_t ModelSpec::param_count() const noexcept {
  std::size_t n = 0;
  std::size_t fan_in = encoded_dim();
  for (auto w : hidden_dims) {
    n += fan_in * w + w;
    fan_in = w;
  }
  return n + fan_in * out_dim + out_dim;
}

void ModelParams::validate() const {
  spec.validate();
  const std::size_t expected_layers = spec.hidden_dims.size() + 1;
  if (layers.size() != expected_layers) throw ValidationError("model: layer count does not match spec");
  Eigen::Index fan_in = spec.encoded_dim();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Eigen::Index fan_out = l + 1 < layers.size() ? spec.hidden_dims[l] : spec.out_dim;
    if (layers[l].W.rows() != fan_out || layers[l].W.cols() != fan_in || layers[l].b.size() != fan_out) {
      throw ValidationError("model: layer " + std::to_string(l) + " shape does not chain");
    }
    fan_in = fan_out;
  }
  const bool wants_b = spec.kind == ModelKind::FfNet;
  if (wants_b != fourier_B.has_value()) throw ValidationError("model: fourier_B present iff kind is ffnet");
  if (fourier_B && (fourier_B->rows() != spec.fourier.n_features || fourier_B->cols() != spec.in_dim)) {
    throw ValidationError("model: fourier_B shape mismatch");
  }
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (!(a.spec == b.spec) || a.layers != b.layers || a.fourier_B.has_value() != b.fourier_B.has_value()) return false;
  if (!a.fourier_B) return true;
  return a.fourier_B->rows() == b.fourier_B->rows() && a.fourier_B->cols() == b.fourier_B->cols() &&
         *a.fourier_B == *b.fourier_B;
}

ModelParams build_model(const ModelSpec& spec) {
  spec.validate();
  ModelParams params;
  params.spec = spec;
  Rng rng(spec.init_seed);

  const std::size_t n_layers = spec.hidden_dims.size() + 1;
  std::uint32_t fan_in = spec.encoded_dim();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::uint32_t fan_out = l + 1 < n_layers ? spec.hidden_dims[l] : spec.out_dim;
    double bound = 0.0;
    switch (spec.kind) {
      case ModelKind::Mlp:
      case ModelKind::FfNet:
        bound = std::sqrt(6.0 / (fan_in + fan_out));
        break;
      case ModelKind::Siren:
        bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / spec.siren_omega0;
        break;
      case ModelKind::Wire:
        bound = std::sqrt(6.0 / fan_in) / spec.wire.omega0;
        break;
    }
    const double bias_bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    LayerParams layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
    for (std::uint32_t i = 0; i < fan_out; ++i)
      for (std::uint32_t j = 0; j < fan_in; ++j) layer.W(i, j) = rng.uniform(-bound, bound);
    for (std::uint32_t i = 0; i < fan_out; ++i) layer.b[i] = rng.uniform(-bias_bound, bias_bound);
    params.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }

  if (spec.kind == ModelKind::FfNet) {
    // B is frozen and stored at fp32 in artifacts, so draw it fp32-exact.
    Rng brng(spec.fourier.seed);
    Eigen::MatrixXd B(spec.fourier.n_features, spec.in_dim);
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j)
        B(i, j) = static_cast<double>(static_cast<float>(spec.fourier.sigma * brng.normal()));
    params.fourier_B = std::move(B);
  }
  return params;
}

Eigen::MatrixXd fourier_features(const CoordBatch& coords, const Eigen::MatrixXd& B) {
  if (B.cols() != coords.rows()) {
    throw ValidationError("fourier_features: B has " + std::to_string(B.cols()) + " columns for " +
                          std::to_string(coords.rows()) + "-dimensional inputs");
  }
  const Eigen::Index f = B.rows();
  const Eigen::Index n = coords.cols();
  Eigen::MatrixXd phase = (2.0 * std::numbers::pi) * (B * coords);
  Eigen::MatrixXd s(f, n);
  Eigen::MatrixXd c(f, n);
  detail::sincos_array(phase.data(), s.data(), c.data(), static_cast<std::size_t>(phase.size()));
  Eigen::MatrixXd out(2 * f, n);
  out.topRows(f) = s;
  out.bottomRows(f) = c;
  return out;
}

double wire_activation(double u, double omega0, double s0) noexcept {
  const double su = s0 * u;
  return std::cos(omega0 * u) * std::exp(-su * su);
}

double siren_forward(const ModelParams& params, const Eigen::VectorXd& x) {
  if (params.spec.kind != ModelKind::Siren) throw ValidationError("siren_forward: model is not a SIREN");
  if (x.size() != static_cast<Eigen::Index>(params.spec.in_dim)) throw ValidationError("siren_forward: shape mismatch");
  Eigen::VectorXd a = x;
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    const Eigen::VectorXd z = params.layers[l].W * a + params.layers[l].b;
    a = (params.spec.siren_omega0 * z).array().sin().matrix();
  }
  return (params.layers.back().W * a + params.layers.back().b)(0);
}

Eigen::MatrixXd encode_inputs(const ModelParams& params, const CoordBatch& coords) {
  if (params.spec.kind == ModelKind::FfNet) {
    if (!params.fourier_B) throw ValidationError("ffnet model is missing its frequency matrix");
    return fourier_features(coords, *params.fourier_B);
  }
  return coords;
}

Eigen::VectorXd eval_model(const ModelParams& params, const CoordBatch& coords) {
  return forward(params, coords);
}

}  // namespace sparseinr
