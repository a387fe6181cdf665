#include "sparseinr/nncore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparseinr/detail/fastmath.hpp"
#include "sparseinr/error.hpp"
#include "sparseinr/models.hpp"

namespace sparseinr {

namespace {

enum class Activation { Relu, Sine, Gabor };

struct HiddenActivation {
  Activation kind = Activation::Relu;
  double omega0 = 1.0;
  double s0 = 1.0;
};

HiddenActivation hidden_activation(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::Mlp:
    case ModelKind::FfNet:
      return {Activation::Relu, 1.0, 1.0};
    case ModelKind::Siren:
      return {Activation::Sine, spec.siren_omega0, 1.0};
    case ModelKind::Wire:
      return {Activation::Gabor, spec.wire.omega0, spec.wire.s0};
  }
  throw ValidationError("unknown model kind");
}

constexpr Eigen::Index kTileCols = 512;

// a = act(z + b) column by column; if d is given, d = act'(z + b). One pass so
// the tile stays in cache.
void bias_activate(const HiddenActivation& act, const Eigen::MatrixXd& z, const Eigen::VectorXd& bias,
                   Eigen::MatrixXd& a, Eigen::MatrixXd* d) {
  const Eigen::Index rows = z.rows();
  const Eigen::Index cols = z.cols();
  // The derivative is always written (to scratch when not requested): the
  // sine loop only vectorizes when both outputs are stored.
  thread_local Eigen::MatrixXd scratch;
  if (!d) d = &scratch;
  a.resize(rows, cols);
  d->resize(rows, cols);
  const double* __restrict b = bias.data();
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double* __restrict zc = z.data() + c * rows;
    double* __restrict ac = a.data() + c * rows;
    double* __restrict dc = d->data() + c * rows;
    switch (act.kind) {
      case Activation::Relu:
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double u = zc[r] + b[r];
          ac[r] = u > 0.0 ? u : 0.0;
        }
        for (Eigen::Index r = 0; r < rows; ++r) dc[r] = zc[r] + b[r] > 0.0 ? 1.0 : 0.0;
        break;
      case Activation::Sine: {
        const double w = act.omega0;
        for (Eigen::Index r = 0; r < rows; ++r) {
          double s, co;
          detail::sincos_kernel(w * (zc[r] + b[r]), s, co);
          ac[r] = s;
          dc[r] = w * co;
        }
        break;
      }
      case Activation::Gabor: {
        const double w = act.omega0;
        const double s0sq = act.s0 * act.s0;
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double u = zc[r] + b[r];
          double s, co;
          detail::sincos_kernel(w * u, s, co);
          const double env = std::exp(-s0sq * u * u);
          ac[r] = co * env;
          dc[r] = env * (-w * s - 2.0 * s0sq * u * co);
        }
        break;
      }
    }
  }
  // Arguments past the fast reduction range are recomputed with libm.
  if (act.kind != Activation::Relu) {
    const double w = act.omega0;
    int wide = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double* __restrict zc = z.data() + c * rows;
      for (Eigen::Index r = 0; r < rows; ++r) wide |= std::fabs(w * (zc[r] + b[r])) >= detail::kFastTrigLimit;
    }
    if (wide) {
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) {
          const double u = z(r, c) + b[r];
          if (std::fabs(w * u) < detail::kFastTrigLimit) continue;
          if (act.kind == Activation::Sine) {
            a(r, c) = std::sin(w * u);
            (*d)(r, c) = w * std::cos(w * u);
          } else {
            const double env = std::exp(-act.s0 * act.s0 * u * u);
            a(r, c) = std::cos(w * u) * env;
            (*d)(r, c) = env * (-w * std::sin(w * u) - 2.0 * act.s0 * act.s0 * u * std::cos(w * u));
          }
        }
    }
  }
}

void check_batch(const ModelParams& model, const CoordBatch& coords) {
  if (coords.cols() == 0) throw ValidationError("forward: empty batch");
  if (coords.rows() != static_cast<Eigen::Index>(model.spec.in_dim)) {
    throw ValidationError("forward: coordinate dimension " + std::to_string(coords.rows()) +
                          " does not match model input dimension " + std::to_string(model.spec.in_dim));
  }
}

void check_finite(const Eigen::MatrixXd& m, std::size_t layer, const char* what) {
  if (!m.allFinite()) {
    throw NumericalError("non-finite " + std::string(what) + " at layer " + std::to_string(layer));
  }
}

}  // namespace

bool operator==(const LayerParams& a, const LayerParams& b) {
  return a.W.rows() == b.W.rows() && a.W.cols() == b.W.cols() && a.b.size() == b.b.size() && a.W == b.W &&
         a.b == b.b;
}

ParamSet zeros_like(const ParamSet& p) {
  ParamSet out;
  out.reserve(p.size());
  for (const auto& layer : p) {
    out.push_back({Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()), Eigen::VectorXd::Zero(layer.b.size())});
  }
  return out;
}

std::size_t param_count(const ParamSet& p) noexcept {
  std::size_t n = 0;
  for (const auto& layer : p) n += static_cast<std::size_t>(layer.W.size() + layer.b.size());
  return n;
}

Eigen::VectorXd forward(const ModelParams& model, const CoordBatch& coords) {
  check_batch(model, coords);
  const HiddenActivation act = hidden_activation(model.spec);
  const std::size_t n_layers = model.layers.size();
  const Eigen::Index n = coords.cols();
  Eigen::VectorXd out(n);
  Eigen::MatrixXd a;
  Eigen::MatrixXd z;
  for (Eigen::Index start = 0; start < n; start += kTileCols) {
    const Eigen::Index len = std::min(kTileCols, n - start);
    a = encode_inputs(model, coords.middleCols(start, len));
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
      z.noalias() = model.layers[l].W * a;
      bias_activate(act, z, model.layers[l].b, a, nullptr);
    }
    const auto& last = model.layers.back();
    out.segment(start, len) = (last.W * a).row(0).transpose().array() + last.b[0];
  }
  return out;
}

LossAndGrad backward(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets) {
  BackwardWorkspace ws;
  LossAndGrad out;
  out.loss = backward_into(model, coords, targets, out.grads, ws);
  return out;
}

double backward_into(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets,
                     ParamSet& grads, BackwardWorkspace& ws) {
  check_batch(model, coords);
  if (targets.size() != coords.cols()) {
    throw ValidationError("backward: " + std::to_string(coords.cols()) + " coords but " +
                          std::to_string(targets.size()) + " targets");
  }
  const HiddenActivation act = hidden_activation(model.spec);
  const std::size_t n_layers = model.layers.size();
  const Eigen::Index n = coords.cols();
  ws.inputs.resize(n_layers);
  ws.derivs.resize(n_layers - 1);
  grads.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grads[l].W.setZero(model.layers[l].W.rows(), model.layers[l].W.cols());
    grads[l].b.setZero(model.layers[l].b.size());
  }

  // The batch is processed in column tiles; per-tile gradients are summed in
  // tile order and the squared errors in sample order, so the result depends
  // only on the batch.
  const double scale = 2.0 / static_cast<double>(n);
  double sq_sum = 0.0;
  for (Eigen::Index start = 0; start < n; start += kTileCols) {
    const Eigen::Index len = std::min(kTileCols, n - start);
    ws.inputs[0] = encode_inputs(model, coords.middleCols(start, len));
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
      ws.z.noalias() = model.layers[l].W * ws.inputs[l];
      bias_activate(act, ws.z, model.layers[l].b, ws.inputs[l + 1], &ws.derivs[l]);
    }
    const auto& last = model.layers.back();
    ws.z.noalias() = last.W * ws.inputs[n_layers - 1];
    ws.g.resize(1, len);
    for (Eigen::Index k = 0; k < len; ++k) {
      const double diff = ws.z(0, k) + last.b[0] - targets[start + k];
      sq_sum += diff * diff;
      ws.g(0, k) = scale * diff;
    }
    if (!std::isfinite(sq_sum)) {
      // Name the first layer whose activations went bad.
      for (std::size_t l = 1; l < n_layers; ++l) check_finite(ws.inputs[l], l - 1, "activation");
      throw NumericalError("non-finite output at layer " + std::to_string(n_layers - 1));
    }

    for (std::size_t l = n_layers; l-- > 0;) {
      grads[l].W.noalias() += ws.g * ws.inputs[l].transpose();
      grads[l].b += ws.g.rowwise().sum();
      if (l > 0) {
        ws.g_prev.noalias() = model.layers[l].W.transpose() * ws.g;
        ws.g.resize(ws.g_prev.rows(), ws.g_prev.cols());
        ws.g.array() = ws.g_prev.array() * ws.derivs[l - 1].array();
      }
    }
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (!grads[l].W.allFinite() || !grads[l].b.allFinite()) {
      throw NumericalError("non-finite gradient at layer " + std::to_string(l));
    }
  }
  return sq_sum / static_cast<double>(n);
}

double gradcheck(const ModelParams& model, const CoordBatch& coords, const Eigen::VectorXd& targets, double h) {
  if (!(h > 0.0)) throw ValidationError("gradcheck: step must be positive");
  const LossAndGrad analytic = backward(model, coords, targets);
  ModelParams probe = model;
  const auto loss_at = [&](const ModelParams& m) { return mse(forward(m, coords), targets); };
  const auto rel_err = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
  };

  double worst = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& W = probe.layers[l].W;
    for (Eigen::Index n = 0; n < W.size(); ++n) {
      const double saved = W.data()[n];
      W.data()[n] = saved + h;
      const double up = loss_at(probe);
      W.data()[n] = saved - h;
      const double down = loss_at(probe);
      W.data()[n] = saved;
      worst = std::max(worst, rel_err(analytic.grads[l].W.data()[n], (up - down) / (2.0 * h)));
    }
    auto& b = probe.layers[l].b;
    for (Eigen::Index n = 0; n < b.size(); ++n) {
      const double saved = b[n];
      b[n] = saved + h;
      const double up = loss_at(probe);
      b[n] = saved - h;
      const double down = loss_at(probe);
      b[n] = saved;
      worst = std::max(worst, rel_err(analytic.grads[l].b[n], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

void AdamHyper::validate() const {
  if (!(lr > 0.0)) throw ValidationError("adam: learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ValidationError("adam: eps must be positive");
}

AdamState AdamState::init(const ParamSet& params, AdamHyper hyper) {
  hyper.validate();
  return {zeros_like(params), zeros_like(params), 0, hyper};
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ValidationError("adam_step: parameter/gradient layer count mismatch");
  }
  const AdamHyper& h = state.hyper;
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);

  const auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    if (p.size() != g.size()) throw ValidationError("adam_step: shape mismatch");
    m.array() = h.beta1 * m.array() + (1.0 - h.beta1) * g.array();
    v.array() = h.beta2 * v.array() + (1.0 - h.beta2) * g.array().square();
    p.array() -= h.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + h.eps);
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].W, grads[l].W, state.m[l].W, state.v[l].W);
    update(params[l].b, grads[l].b, state.m[l].b, state.v[l].b);
  }
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size()) {
    throw ValidationError("mse: length mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(target.size()) + ")");
  }
  if (pred.size() == 0) throw ValidationError("mse: empty batch");
  double sum = 0.0;
  for (Eigen::Index n = 0; n < pred.size(); ++n) {
    const double d = pred[n] - target[n];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace sparseinr
