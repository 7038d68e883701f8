#pragma once

// Periodized orthogonal 2-D discrete wavelet transform (separable filter bank).

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mind::wavelet {

enum class Filter { Haar, Sym6 };

/// Decomposition low-pass filter taps (orthonormal: sum h^2 = 1, sum h = sqrt 2).
inline std::span<const double> lowpass(Filter f) {
  static const std::array<double, 2> haar = {0.70710678118654752440, 0.70710678118654752440};
  // Symlet with six vanishing moments (12 taps).
  static const std::array<double, 12> sym6 = {
      0.015404109327027373,  0.0034907120842174702, -0.11799011114819057,
      -0.048311742585633,    0.4910559419267466,    0.787641141030194,
      0.3379294217276218,    -0.07263752278646252,  -0.021060292512300564,
      0.04472490177066578,   0.0017677118642428036, -0.007800708325034148};
  switch (f) {
    case Filter::Haar: return haar;
    case Filter::Sym6: return sym6;
  }
  throw std::invalid_argument("wavelet: unknown filter");
}

inline const char* name(Filter f) { return f == Filter::Haar ? "haar" : "sym6"; }

/// Quadrature-mirror high-pass: g[m] = (-1)^m h[L-1-m].
inline std::vector<double> highpass(std::span<const double> h) {
  std::vector<double> g(h.size());
  for (std::size_t m = 0; m < h.size(); ++m)
    g[m] = ((m % 2) ? -1.0 : 1.0) * h[h.size() - 1 - m];
  return g;
}

/// One analysis step on a strided periodic signal of even length n.
/// Low-pass outputs go to out[0..n/2), high-pass to out[n/2..n).
inline void analyze_1d(const double* in, std::size_t stride, std::size_t n,
                       std::span<const double> h, std::span<const double> g, double* out) {
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t m = 0; m < h.size(); ++m) {
      const double x = in[((2 * k + m) % n) * stride];
      a += h[m] * x;
      d += g[m] * x;
    }
    out[k] = a;
    out[half + k] = d;
  }
}

/// Transpose of analyze_1d.
inline void synthesize_1d(const double* in, std::size_t n, std::span<const double> h,
                          std::span<const double> g, double* out, std::size_t stride) {
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < n; ++i) out[i * stride] = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    const double a = in[k], d = in[half + k];
    for (std::size_t m = 0; m < h.size(); ++m)
      out[((2 * k + m) % n) * stride] += h[m] * a + g[m] * d;
  }
}

/// In-place multi-level forward transform of a row-major width x height array.
/// After the call, level j (1 = finest) occupies the Mallat layout: the LL block of
/// size (width >> depth, height >> depth) sits in the top-left corner.
inline void forward_2d(std::span<double> data, int width, int height, int depth, Filter f) {
  const auto h = lowpass(f);
  const auto g = highpass(h);
  std::vector<double> tmp(static_cast<std::size_t>(std::max(width, height)));
  int w = width, ht = height;
  for (int level = 0; level < depth; ++level) {
    for (int r = 0; r < ht; ++r) {
      double* row = data.data() + static_cast<std::size_t>(r) * width;
      analyze_1d(row, 1, w, h, g, tmp.data());
      std::copy(tmp.begin(), tmp.begin() + w, row);
    }
    for (int c = 0; c < w; ++c) {
      double* col = data.data() + c;
      analyze_1d(col, width, ht, h, g, tmp.data());
      for (int r = 0; r < ht; ++r) col[static_cast<std::size_t>(r) * width] = tmp[r];
    }
    w /= 2;
    ht /= 2;
  }
}

inline void inverse_2d(std::span<double> data, int width, int height, int depth, Filter f) {
  const auto h = lowpass(f);
  const auto g = highpass(h);
  std::vector<double> tmp(static_cast<std::size_t>(std::max(width, height)));
  for (int level = depth - 1; level >= 0; --level) {
    const int w = width >> level, ht = height >> level;
    for (int c = 0; c < w; ++c) {
      double* col = data.data() + c;
      for (int r = 0; r < ht; ++r) tmp[r] = col[static_cast<std::size_t>(r) * width];
      synthesize_1d(tmp.data(), ht, h, g, col, width);
    }
    for (int r = 0; r < ht; ++r) {
      double* row = data.data() + static_cast<std::size_t>(r) * width;
      std::copy(row, row + w, tmp.begin());
      synthesize_1d(tmp.data(), w, h, g, row, 1);
    }
  }
}

}  // namespace mind::wavelet
