#include "sparseinr/volume.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sparseinr/detail/binary_io.hpp"
#include "sparseinr/error.hpp"

namespace sparseinr {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace detail

namespace {

constexpr std::string_view kInrvMagic = "INRV";
constexpr std::uint32_t kInrvVersion = 1;

void check_values(std::span<const std::uint16_t> values) {
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (values[n] > kAdcMax) {
      throw ValidationError("value " + std::to_string(values[n]) + " at cell " + std::to_string(n) +
                            " exceeds the 10-bit ADC range");
    }
  }
}

}  // namespace

Dims parse_dims(const std::string& text) {
  Dims d;
  std::array<std::uint32_t*, 3> out{&d.c, &d.z, &d.r};
  std::size_t pos = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t end = axis < 2 ? text.find_first_of("xX", pos) : text.size();
    if (end == std::string::npos || end == pos) throw ValidationError("dims must look like CxZxR, got '" + text + "'");
    const std::string part = text.substr(pos, end - pos);
    if (!std::all_of(part.begin(), part.end(), [](char ch) { return ch >= '0' && ch <= '9'; }) || part.size() > 9) {
      throw ValidationError("dims must look like CxZxR, got '" + text + "'");
    }
    *out[axis] = static_cast<std::uint32_t>(std::stoul(part));
    if (*out[axis] == 0) throw ValidationError("every dimension must be >= 1, got '" + text + "'");
    pos = end + 1;
  }
  return d;
}

std::string to_string(const Dims& d) {
  return std::to_string(d.c) + "x" + std::to_string(d.z) + "x" + std::to_string(d.r);
}

Volume3D::Volume3D(Dims dims) : dims_(dims), values_(dims.cells(), 0) {}

Volume3D::Volume3D(Dims dims, std::vector<std::uint16_t> values) : dims_(dims), values_(std::move(values)) {
  if (values_.size() != dims_.cells()) {
    throw ValidationError("payload length mismatch: " + std::to_string(values_.size()) + " values for dims " +
                          to_string(dims_));
  }
  check_values(values_);
}

Index3 Volume3D::unflatten(std::size_t flat) const noexcept {
  const auto k = static_cast<std::uint32_t>(flat % dims_.r);
  flat /= dims_.r;
  const auto j = static_cast<std::uint32_t>(flat % dims_.z);
  const auto i = static_cast<std::uint32_t>(flat / dims_.z);
  return {i, j, k};
}

std::uint16_t Volume3D::at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
  if (i >= dims_.c || j >= dims_.z || k >= dims_.r) throw ValidationError("index out of range");
  return values_[flat_index(i, j, k)];
}

bool Volume3D::is_zero_suppressed() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](std::uint16_t v) { return v == 0 || v >= kZeroSuppression; });
}

void SynthConfig::validate() const {
  if (dims.cells() == 0) throw ValidationError("synth: every dimension must be >= 1");
  if (!(target_occupancy > 0.0 && target_occupancy <= 1.0)) {
    throw ValidationError("synth: target occupancy must lie in (0, 1]");
  }
  const auto [lo, hi] = intensity_range;
  if (lo < kZeroSuppression) throw ValidationError("synth: intensity floor must be >= 64");
  if (hi > kAdcMax) throw ValidationError("synth: intensity ceiling must be <= 1023");
  if (lo > hi) throw ValidationError("synth: intensity range is empty");
}

std::vector<std::uint8_t> encode_volume(const Volume3D& v) {
  detail::ByteWriter w;
  w.reserve(kInrvHeaderBytes + 2 * v.size());
  w.bytes(kInrvMagic);
  w.u32(kInrvVersion);
  w.u32(v.dims().c);
  w.u32(v.dims().z);
  w.u32(v.dims().r);
  for (std::uint16_t value : v.values()) w.u16(value);
  return std::move(w.buffer());
}

Volume3D decode_volume(std::span<const std::uint8_t> bytes) {
  detail::ByteReader rd(bytes, "INRV");
  if (bytes.size() < 4 || rd.bytes(4) != kInrvMagic) throw FormatError("INRV: bad magic");
  const std::uint32_t version = rd.u32();
  if (version != kInrvVersion) throw FormatError("INRV: unsupported format version " + std::to_string(version));
  Dims d;
  d.c = rd.u32();
  d.z = rd.u32();
  d.r = rd.u32();
  if (d.cells() == 0) throw FormatError("INRV: zero-sized dimension");
  if (rd.remaining() != 2 * d.cells()) {
    throw FormatError("INRV: payload length mismatch (" + std::to_string(rd.remaining()) + " bytes for dims " +
                      to_string(d) + ")");
  }
  std::vector<std::uint16_t> values(d.cells());
  for (auto& value : values) {
    value = rd.u16();
    if (value > kAdcMax) throw FormatError("INRV: value " + std::to_string(value) + " exceeds 1023");
  }
  return Volume3D(d, std::move(values));
}

Volume3D load_volume(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_volume(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_volume(const Volume3D& v, const std::filesystem::path& path) {
  detail::write_file(path, encode_volume(v));
}

Volume3D downsample(const Volume3D& v, Factors f) {
  if (f.c == 0 || f.z == 0 || f.r == 0) throw ValidationError("downsample factors must be >= 1");
  const Dims& in = v.dims();
  const Dims out{(in.c + f.c - 1) / f.c, (in.z + f.z - 1) / f.z, (in.r + f.r - 1) / f.r};
  std::vector<std::uint16_t> values;
  values.reserve(out.cells());
  for (std::uint32_t i = 0; i < out.c; ++i)
    for (std::uint32_t j = 0; j < out.z; ++j)
      for (std::uint32_t k = 0; k < out.r; ++k) values.push_back(v[v.flat_index(i * f.c, j * f.z, k * f.r)]);
  return Volume3D(out, std::move(values));
}

double axis_coord(std::uint32_t t, std::uint32_t size) noexcept {
  if (size <= 1) return 0.0;
  if (t == size - 1) return 1.0;
  return -1.0 + 2.0 * static_cast<double>(t) / static_cast<double>(size - 1);
}

NormalizedCoord normalize_coords(Index3 index, Dims dims) {
  if (index.i >= dims.c || index.j >= dims.z || index.k >= dims.r) {
    throw ValidationError("normalize_coords: index out of range for dims " + to_string(dims));
  }
  return {{axis_coord(index.i, dims.c), axis_coord(index.j, dims.z), axis_coord(index.k, dims.r)}};
}

double normalize_value(int adc) {
  if (adc < 0 || adc > kAdcMax) throw ValidationError("ADC value " + std::to_string(adc) + " outside [0, 1023]");
  return static_cast<double>(adc) / kAdcMax;
}

std::uint16_t denormalize_value(double u) noexcept {
  if (!(u > 0.0)) return 0;  // also maps NaN to 0
  const double scaled = std::nearbyint(u * kAdcMax);
  return scaled >= kAdcMax ? kAdcMax : static_cast<std::uint16_t>(scaled);
}

std::size_t count_nonzero(const Volume3D& v) noexcept {
  return static_cast<std::size_t>(std::count_if(v.values().begin(), v.values().end(), [](auto x) { return x != 0; }));
}

double occupancy(const Volume3D& v) noexcept {
  if (v.size() == 0) return 0.0;
  return static_cast<double>(count_nonzero(v)) / static_cast<double>(v.size());
}

}  // namespace sparseinr
