#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace sparseinr::detail {

// Branch-free sin/cos pair. Cody-Waite reduction by pi/2 in three parts and the
// Cephes minimax polynomials on [-pi/4, pi/4]; within 1 ulp of libm for
// |x| < 2^20, which covers every pre-activation a trained network produces.
inline void sincos_kernel(double x, double& s_out, double& c_out) noexcept {
  const double q = std::nearbyint(x * 0.63661977236758134308);
  double r = x - q * 1.57079632673412561417e+00;
  r -= q * 6.07710050630396597660e-11;
  r -= q * 2.02226624879595063154e-21;
  const double z = r * r;

  double s = 1.58962301576546568060e-10;
  s = s * z - 2.50507477628578072866e-8;
  s = s * z + 2.75573136213857245213e-6;
  s = s * z - 1.98412698295895385996e-4;
  s = s * z + 8.33333333332211858878e-3;
  s = s * z - 1.66666666666666307295e-1;
  s = r + r * z * s;

  double c = -1.13585365213876817300e-11;
  c = c * z + 2.08757008419747316778e-9;
  c = c * z - 2.75573141792967388112e-7;
  c = c * z + 2.48015872888517045348e-5;
  c = c * z - 1.38888888888730564116e-3;
  c = c * z + 4.16666666666665929218e-2;
  c = 1.0 - 0.5 * z + z * z * c;

  const std::int64_t k = static_cast<std::int64_t>(q) & 3;
  const double sa = (k & 1) ? c : s;
  const double ca = (k & 1) ? s : c;
  s_out = (k & 2) ? -sa : sa;
  c_out = ((k + 1) & 2) ? -ca : ca;
}

inline constexpr double kFastTrigLimit = 1048576.0;  // 2^20

/// s[i] = sin(x[i]), c[i] = cos(x[i]). Arguments beyond the reduction range fall
/// back to libm. Outputs must not alias the input.
inline void sincos_array(const double* __restrict x, double* __restrict s, double* __restrict c,
                         std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) sincos_kernel(x[i], s[i], c[i]);
  int wide = 0;
  for (std::size_t i = 0; i < n; ++i) wide |= static_cast<int>(std::fabs(x[i]) >= kFastTrigLimit);
  if (wide == 0) return;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::fabs(x[i]) < kFastTrigLimit)) {
      s[i] = std::sin(x[i]);
      c[i] = std::cos(x[i]);
    }
  }
}

}  // namespace sparseinr::detail
