#include "sparseinr/codec.hpp"

#include <bit>
#include <cmath>
#include <string_view>

#include "sparseinr/detail/binary_io.hpp"
#include "sparseinr/error.hpp"

namespace sparseinr {

namespace {

constexpr std::string_view kInrcMagic = "INRC";

double round_to(WeightPrecision p, double w) noexcept {
  const auto f = static_cast<float>(w);
  return p == WeightPrecision::Fp32 ? static_cast<double>(f) : static_cast<double>(half_to_float(float_to_half(f)));
}

template <typename Fn>
void for_each_weight(const ParamSet& layers, Fn&& fn) {
  for (const auto& layer : layers) {
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j) fn(layer.W(i, j));
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) fn(layer.b[i]);
  }
}

void check_dims(const Dims& d, const char* what) {
  if (d.c == 0 || d.z == 0 || d.r == 0) throw ValidationError(std::string(what) + " dims must be >= 1 on every axis");
}

Dims decimated(const Dims& d, const Factors& f) {
  return {(d.c + f.c - 1) / f.c, (d.z + f.z - 1) / f.z, (d.r + f.r - 1) / f.r};
}

}  // namespace

std::string to_string(WeightPrecision p) { return p == WeightPrecision::Fp16 ? "fp16" : "fp32"; }

WeightPrecision parse_precision(const std::string& name) {
  if (name == "fp32") return WeightPrecision::Fp32;
  if (name == "fp16") return WeightPrecision::Fp16;
  throw ValidationError("unknown precision '" + name + "' (expected fp32, fp16)");
}

std::uint16_t float_to_half(float f) noexcept {
  const auto x = std::bit_cast<std::uint32_t>(f);
  const auto sign = static_cast<std::uint16_t>((x >> 16) & 0x8000U);
  const std::uint32_t ax = x & 0x7FFFFFFFU;
  if (ax >= 0x7F800000U) {
    if (ax == 0x7F800000U) return sign | 0x7C00U;
    return static_cast<std::uint16_t>(sign | 0x7E00U | ((ax >> 13) & 0x3FFU));
  }
  if (ax >= 0x477FF000U) return sign | 0x7C00U;  // rounds past 65504
  if (ax < 0x38800000U) {
    // Subnormal half: round(|f| * 2^24) with ties to even.
    if (ax < 0x33000000U) return sign;
    const std::uint32_t e = ax >> 23;
    const std::uint32_t m = (ax & 0x7FFFFFU) | 0x800000U;
    const std::uint32_t shift = 126 - e;
    std::uint32_t q = m >> shift;
    const std::uint32_t rem = m & ((1U << shift) - 1);
    const std::uint32_t half = 1U << (shift - 1);
    if (rem > half || (rem == half && (q & 1U))) ++q;
    return static_cast<std::uint16_t>(sign | q);
  }
  std::uint32_t q = (ax - 0x38000000U) >> 13;
  const std::uint32_t rem = ax & 0x1FFFU;
  if (rem > 0x1000U || (rem == 0x1000U && (q & 1U))) ++q;
  return static_cast<std::uint16_t>(sign | q);
}

float half_to_float(std::uint16_t h) noexcept {
  const std::uint32_t sign = static_cast<std::uint32_t>(h & 0x8000U) << 16;
  const std::uint32_t e = (h >> 10) & 0x1FU;
  const std::uint32_t m = h & 0x3FFU;
  if (e == 0) {
    const float v = std::ldexp(static_cast<float>(m), -24);
    return sign ? -v : v;
  }
  if (e == 31) return std::bit_cast<float>(sign | 0x7F800000U | (m << 13));
  return std::bit_cast<float>(sign | ((e + 112) << 23) | (m << 13));
}

void CompressedArtifact::validate() const {
  if (format_version != kInrcVersion) throw ValidationError("artifact: unsupported format version");
  if (precision != WeightPrecision::Fp32 && precision != WeightPrecision::Fp16) {
    throw ValidationError("artifact: unknown weight precision");
  }
  model.validate();
  check_dims(source_dims, "artifact source");
  if (factors.c == 0 || factors.z == 0 || factors.r == 0) throw ValidationError("artifact: factors must be >= 1");
}

CompressedArtifact package(ModelParams model, Dims source_dims, Factors factors, WeightPrecision precision) {
  model.spec.init_seed = 0;
  if (model.spec.kind == ModelKind::Wire) {
    model.spec.siren_omega0 = ModelSpec{}.siren_omega0;
  } else {
    model.spec.wire.omega0 = WireParams{}.omega0;
  }
  for (auto& layer : model.layers) {
    layer.W = layer.W.unaryExpr([&](double w) { return round_to(precision, w); });
    layer.b = layer.b.unaryExpr([&](double w) { return round_to(precision, w); });
  }
  if (model.fourier_B) {
    *model.fourier_B = model.fourier_B->unaryExpr([](double w) { return static_cast<double>(static_cast<float>(w)); });
  }
  CompressedArtifact a;
  a.precision = precision;
  a.model = std::move(model);
  a.source_dims = source_dims;
  a.factors = factors;
  a.validate();
  return a;
}

CompressResult compress(const Volume3D& volume, const ModelSpec& spec, const TrainConfig& cfg,
                        const CompressOptions& opts, const EpochCallback& on_epoch) {
  const Dims source = opts.source_dims.value_or(volume.dims());
  check_dims(source, "source");
  if (opts.factors.c == 0 || opts.factors.z == 0 || opts.factors.r == 0) {
    throw ValidationError("compress: factors must be >= 1");
  }
  if (!(decimated(source, opts.factors) == volume.dims())) {
    throw ValidationError("compress: training volume " + to_string(volume.dims()) + " is not " + to_string(source) +
                          " decimated by the given factors");
  }
  TrainResult trained = train(volume, spec, cfg, on_epoch);
  CompressResult out;
  out.artifact = package(std::move(trained.model), source, opts.factors, opts.precision);
  out.log = std::move(trained.log);
  return out;
}

std::size_t artifact_header_bytes(const ModelSpec& spec) noexcept {
  // magic, version, kind, precision, in/out/n_hidden, hidden dims, 3 f64 +
  // n_features + fourier seed, source dims, factors, weight count
  return 4 + 4 + 1 + 1 + 3 * 4 + 4 * spec.hidden_dims.size() + 3 * 8 + 4 + 8 + 3 * 4 + 3 * 4 + 8;
}

std::vector<std::uint8_t> encode_artifact(const CompressedArtifact& a) {
  a.validate();
  const ModelSpec& s = a.model.spec;
  const std::size_t width = a.precision == WeightPrecision::Fp16 ? 2 : 4;
  detail::ByteWriter w;
  w.reserve(artifact_header_bytes(s) + s.param_count() * width +
            (a.model.fourier_B ? 4 * static_cast<std::size_t>(a.model.fourier_B->size()) : 0));
  w.bytes(kInrcMagic);
  w.u32(a.format_version);
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u8(static_cast<std::uint8_t>(a.precision));
  w.u32(s.in_dim);
  w.u32(s.out_dim);
  w.u32(static_cast<std::uint32_t>(s.hidden_dims.size()));
  for (auto h : s.hidden_dims) w.u32(h);
  w.f64(s.kind == ModelKind::Wire ? s.wire.omega0 : s.siren_omega0);
  w.f64(s.fourier.sigma);
  w.f64(s.wire.s0);
  w.u32(s.fourier.n_features);
  w.u64(s.fourier.seed);
  for (auto d : {a.source_dims.c, a.source_dims.z, a.source_dims.r}) w.u32(d);
  for (auto f : {a.factors.c, a.factors.z, a.factors.r}) w.u32(f);
  w.u64(s.param_count());
  if (a.precision == WeightPrecision::Fp16) {
    for_each_weight(a.model.layers, [&](double v) { w.u16(float_to_half(static_cast<float>(v))); });
  } else {
    for_each_weight(a.model.layers, [&](double v) { w.f32(static_cast<float>(v)); });
  }
  if (a.model.fourier_B) {
    const auto& B = *a.model.fourier_B;
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j) w.f32(static_cast<float>(B(i, j)));
  }
  return std::move(w.buffer());
}

CompressedArtifact decode_artifact(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "INRC");
  if (r.remaining() < 4 || r.bytes(4) != kInrcMagic) throw FormatError("INRC: bad magic (not an INRC artifact)");
  CompressedArtifact a;
  a.format_version = r.u32();
  if (a.format_version != kInrcVersion) {
    throw FormatError("INRC: unsupported version " + std::to_string(a.format_version) + " (expected " +
                      std::to_string(kInrcVersion) + ")");
  }
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ModelKind::Wire)) throw FormatError("INRC: unknown model kind " + std::to_string(kind));
  const std::uint8_t precision = r.u8();
  if (precision > 1) throw FormatError("INRC: unknown weight precision " + std::to_string(precision));
  a.precision = static_cast<WeightPrecision>(precision);

  ModelSpec& s = a.model.spec;
  s = ModelSpec{};
  s.kind = static_cast<ModelKind>(kind);
  s.in_dim = r.u32();
  s.out_dim = r.u32();
  const std::uint32_t n_hidden = r.u32();
  r.need(4 * static_cast<std::size_t>(n_hidden));
  s.hidden_dims.resize(n_hidden);
  for (auto& h : s.hidden_dims) {
    h = r.u32();
    if (h > bytes.size()) throw FormatError("INRC: hidden width " + std::to_string(h) + " exceeds payload size");
  }
  const double omega0 = r.f64();
  (s.kind == ModelKind::Wire ? s.wire.omega0 : s.siren_omega0) = omega0;
  s.fourier.sigma = r.f64();
  s.wire.s0 = r.f64();
  s.fourier.n_features = r.u32();
  s.fourier.seed = r.u64();
  a.source_dims.c = r.u32();
  a.source_dims.z = r.u32();
  a.source_dims.r = r.u32();
  a.factors.c = r.u32();
  a.factors.z = r.u32();
  a.factors.r = r.u32();
  if (s.in_dim > bytes.size() || s.out_dim > bytes.size() || s.fourier.n_features > bytes.size()) {
    throw FormatError("INRC: layer dimensions exceed payload size");
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("INRC: invalid model header: ") + e.what());
  }

  const std::uint64_t count = r.u64();
  if (count != s.param_count()) {
    throw FormatError("INRC: weight-count mismatch (header says " + std::to_string(count) + ", shape implies " +
                      std::to_string(s.param_count()) + ")");
  }
  const std::size_t width = a.precision == WeightPrecision::Fp16 ? 2 : 4;
  r.need(count * width);

  auto read_weight = [&]() -> double {
    return a.precision == WeightPrecision::Fp16 ? static_cast<double>(half_to_float(r.u16()))
                                                : static_cast<double>(r.f32());
  };
  const std::size_t n_layers = s.hidden_dims.size() + 1;
  a.model.layers.resize(n_layers);
  std::uint32_t fan_in = s.encoded_dim();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::uint32_t fan_out = l + 1 < n_layers ? s.hidden_dims[l] : s.out_dim;
    auto& layer = a.model.layers[l];
    layer.W.resize(fan_out, fan_in);
    layer.b.resize(fan_out);
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j) layer.W(i, j) = read_weight();
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b[i] = read_weight();
    fan_in = fan_out;
  }
  if (s.kind == ModelKind::FfNet) {
    r.need(4 * static_cast<std::size_t>(s.fourier.n_features) * s.in_dim);
    Eigen::MatrixXd B(s.fourier.n_features, s.in_dim);
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j) B(i, j) = static_cast<double>(r.f32());
    a.model.fourier_B = std::move(B);
  }
  if (r.remaining() != 0) {
    throw FormatError("INRC: " + std::to_string(r.remaining()) + " trailing bytes after payload");
  }
  try {
    a.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("INRC: ") + e.what());
  }
  return a;
}

void save_artifact(const CompressedArtifact& a, const std::filesystem::path& path) {
  detail::write_file(path, encode_artifact(a));
}

CompressedArtifact load_artifact(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_artifact(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Volume3D decompress(const CompressedArtifact& a, Dims target, const DecodeOptions& opts) {
  check_dims(target, "target");
  if (opts.chunk == 0) throw ValidationError("decompress: chunk must be >= 1");
  if (a.model.spec.in_dim != 3) throw ValidationError("decompress: artifact model does not take 3D coordinates");
  const std::size_t n = target.cells();
  std::vector<std::uint16_t> values(n);
  Eigen::MatrixXd coords;
  for (std::size_t start = 0; start < n; start += opts.chunk) {
    const std::size_t len = std::min(opts.chunk, n - start);
    coords.resize(3, static_cast<Eigen::Index>(len));
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t flat = start + k;
      const auto i = static_cast<std::uint32_t>(flat / (static_cast<std::size_t>(target.z) * target.r));
      const auto j = static_cast<std::uint32_t>((flat / target.r) % target.z);
      const auto l = static_cast<std::uint32_t>(flat % target.r);
      const auto col = static_cast<Eigen::Index>(k);
      coords(0, col) = axis_coord(i, target.c);
      coords(1, col) = axis_coord(j, target.z);
      coords(2, col) = axis_coord(l, target.r);
    }
    const Eigen::VectorXd pred = eval_model(a.model, coords);
    for (std::size_t k = 0; k < len; ++k) {
      std::uint16_t v = denormalize_value(pred[static_cast<Eigen::Index>(k)]);
      if (opts.resuppress && v < kZeroSuppression) v = 0;
      values[start + k] = v;
    }
  }
  return Volume3D(target, std::move(values));
}

Volume3D decompress(const CompressedArtifact& a) { return decompress(a, a.source_dims); }

std::size_t raw_bytes(const Dims& d) noexcept { return d.cells() * sizeof(std::uint16_t); }

double compression_ratio(const Dims& source, std::size_t artifact_bytes) noexcept {
  return static_cast<double>(raw_bytes(source)) / static_cast<double>(artifact_bytes);
}

double compression_ratio(const CompressedArtifact& a) {
  return compression_ratio(a.source_dims, encode_artifact(a).size());
}

ErrorReport error_map(const Volume3D& decoded, const Volume3D& reference) {
  if (!(decoded.dims() == reference.dims())) {
    throw ValidationError("error_map: dims differ (" + to_string(decoded.dims()) + " vs " +
                          to_string(reference.dims()) + ")");
  }
  const std::size_t n = decoded.size();
  std::vector<std::uint16_t> diff(n);
  double sq = 0.0;
  double l1 = 0.0;
  double mx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = std::abs(static_cast<int>(decoded[i]) - static_cast<int>(reference[i]));
    diff[i] = static_cast<std::uint16_t>(d);
    sq += static_cast<double>(d) * d;
    l1 += d;
    mx = std::max(mx, static_cast<double>(d));
  }
  ErrorReport out{Volume3D(decoded.dims(), std::move(diff))};
  if (n > 0) {
    out.raw_mse = sq / static_cast<double>(n);
    out.l1_mean = l1 / static_cast<double>(n);
  }
  out.mse = out.raw_mse / (static_cast<double>(kAdcMax) * kAdcMax);
  out.max_abs = mx;
  if (out.raw_mse > 0.0) out.psnr = 10.0 * std::log10(static_cast<double>(kAdcMax) * kAdcMax / out.raw_mse);
  return out;
}

}  // namespace sparseinr
