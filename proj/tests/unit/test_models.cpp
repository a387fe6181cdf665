#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sparseinr/error.hpp"
#include "sparseinr/models.hpp"
#include "sparseinr/rng.hpp"

using namespace sparseinr;

TEST_CASE("model kind names") {
  for (auto kind : {ModelKind::Mlp, ModelKind::FfNet, ModelKind::Siren, ModelKind::Wire})
    CHECK(parse_model_kind(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_model_kind("relu"), ValidationError);
}

TEST_CASE("parameter count follows the layer shapes") {
  ModelSpec s;
  // 3*128+128 + 2*(128*128+128) + 128+1
  CHECK(s.param_count() == 512 + 2 * 16512 + 129);
  CHECK(s.param_count() == 33665);
  s.kind = ModelKind::FfNet;
  s.fourier.n_features = 256;
  CHECK(s.encoded_dim() == 512);
  CHECK(s.param_count() == 512 * 128 + 128 + 2 * 16512 + 129);
  for (auto kind : {ModelKind::Mlp, ModelKind::FfNet, ModelKind::Siren, ModelKind::Wire}) {
    ModelSpec k;
    k.kind = kind;
    k.hidden_dims = {7, 5};
    const ModelParams m = build_model(k);
    CHECK(param_count(m.layers) == k.param_count());
  }
}

TEST_CASE("initialization respects the documented bounds") {
  for (auto kind : {ModelKind::Mlp, ModelKind::Siren, ModelKind::Wire}) {
    ModelSpec s;
    s.kind = kind;
    s.hidden_dims = {64, 64};
    const ModelParams m = build_model(s);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const double fan_in = static_cast<double>(m.layers[l].W.cols());
      const double fan_out = static_cast<double>(m.layers[l].W.rows());
      double bound = 0.0;
      if (kind == ModelKind::Mlp) bound = std::sqrt(6.0 / (fan_in + fan_out));
      if (kind == ModelKind::Siren) bound = l == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / s.siren_omega0;
      if (kind == ModelKind::Wire) bound = std::sqrt(6.0 / fan_in) / s.wire.omega0;
      CHECK(m.layers[l].W.cwiseAbs().maxCoeff() <= bound);
      // A uniform draw of this many weights comes close to the bound.
      CHECK(m.layers[l].W.cwiseAbs().maxCoeff() > 0.8 * bound);
      CHECK(m.layers[l].b.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(fan_in));
    }
  }
}

TEST_CASE("initialization is a pure function of the seeds") {
  ModelSpec s;
  s.kind = ModelKind::FfNet;
  s.fourier.n_features = 32;
  s.init_seed = 5;
  s.fourier.seed = 6;
  CHECK(build_model(s) == build_model(s));
  ModelSpec t = s;
  t.init_seed = 7;
  const ModelParams a = build_model(s);
  const ModelParams b = build_model(t);
  CHECK_FALSE(a.layers[0].W == b.layers[0].W);
  CHECK(*a.fourier_B == *b.fourier_B);
}

TEST_CASE("Fourier frequency matrix is Gaussian with scale sigma") {
  ModelSpec s;
  s.kind = ModelKind::FfNet;
  s.fourier.n_features = 4000;
  s.fourier.sigma = 10.0;
  const ModelParams m = build_model(s);
  REQUIRE(m.fourier_B);
  CHECK(m.fourier_B->rows() == 4000);
  CHECK(m.fourier_B->cols() == 3);
  const double mean = m.fourier_B->mean();
  const double var = (m.fourier_B->array() - mean).square().mean();
  // 12000 draws: the standard error of the mean is 10/sqrt(12000) ~ 0.09.
  CHECK(std::abs(mean) < 0.5);
  CHECK(std::sqrt(var) == doctest::Approx(10.0).epsilon(0.05));
  for (Eigen::Index n = 0; n < m.fourier_B->size(); ++n) {
    const double v = m.fourier_B->data()[n];
    CHECK(static_cast<double>(static_cast<float>(v)) == v);
  }
}

TEST_CASE("Fourier features are bounded trig pairs") {
  Rng rng(2);
  Eigen::MatrixXd B(5, 3);
  for (Eigen::Index n = 0; n < B.size(); ++n) B.data()[n] = 10.0 * rng.normal();
  Eigen::MatrixXd x(3, 50);
  for (Eigen::Index n = 0; n < x.size(); ++n) x.data()[n] = rng.uniform(-1.0, 1.0);
  const Eigen::MatrixXd g = fourier_features(x, B);
  CHECK(g.rows() == 10);
  CHECK(g.cols() == 50);
  CHECK(g.cwiseAbs().maxCoeff() <= 1.0);
  for (Eigen::Index j = 0; j < 50; ++j)
    for (Eigen::Index f = 0; f < 5; ++f) {
      const double p = 2.0 * std::numbers::pi * B.row(f).dot(x.col(j));
      CHECK(g(f, j) == doctest::Approx(std::sin(p)).epsilon(1e-12));
      CHECK(g(f + 5, j) * g(f + 5, j) + g(f, j) * g(f, j) == doctest::Approx(1.0));
    }
}

TEST_CASE("Gabor wavelet activation") {
  CHECK(wire_activation(0.0, 20.0, 10.0) == 1.0);
  CHECK(std::abs(wire_activation(10.0 / 10.0, 20.0, 10.0)) < 1e-40);
  CHECK(std::abs(wire_activation(-10.0 / 3.0, 20.0, 3.0)) < 1e-40);
  CHECK(wire_activation(0.05, 20.0, 10.0) == doctest::Approx(std::cos(1.0) * std::exp(-0.25)));
}

TEST_CASE("spec validation") {
  ModelSpec s;
  s.hidden_dims.clear();
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.hidden_dims = {16, 0};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.siren_omega0 = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.kind = ModelKind::Wire;
  s.wire.s0 = -1.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.out_dim = 2;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("model validation catches shape damage") {
  ModelParams m = build_model(ModelSpec{});
  m.validate();
  m.layers[1].W.resize(127, 128);
  CHECK_THROWS_AS(m.validate(), ValidationError);
  ModelParams f = build_model(ModelSpec{});
  f.fourier_B = Eigen::MatrixXd::Zero(4, 3);
  CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("eval_model dispatches per kind") {
  Eigen::MatrixXd x(3, 2);
  x << 0.1, -0.4, 0.2, 0.0, -0.9, 1.0;
  for (auto kind : {ModelKind::Mlp, ModelKind::FfNet, ModelKind::Siren, ModelKind::Wire}) {
    ModelSpec s;
    s.kind = kind;
    s.hidden_dims = {8};
    s.fourier.n_features = 4;
    const ModelParams m = build_model(s);
    const Eigen::VectorXd y = eval_model(m, x);
    CHECK(y.size() == 2);
    CHECK(y.allFinite());
    if (kind == ModelKind::Siren) CHECK(y[1] == doctest::Approx(siren_forward(m, x.col(1))).epsilon(1e-12));
  }
}
