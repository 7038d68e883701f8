#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mind/image.hpp"

namespace mind {

struct QualityReport {
  double mise = 0.0;
  double psnr = 0.0;  // dB; +infinity for identical images
  double ssim = 1.0;
};

inline double mise(const Image& fhat, const Image& f) {
  require_same_grid(fhat, f, "mise");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (fhat[i] - f[i]) * (fhat[i] - f[i]);
  return s / static_cast<double>(f.size());
}

inline double psnr(const Image& fhat, const Image& f, double peak = 1.0) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
  const double mse = mise(fhat, f);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

/// Mean local SSIM over all fully contained 11x11 Gaussian windows (SD 1.5),
/// C1 = (0.01 peak)^2, C2 = (0.03 peak)^2.
inline double ssim(const Image& fhat, const Image& f, double peak = 1.0) {
  require_same_grid(fhat, f, "ssim");
  if (!(peak > 0.0)) throw std::invalid_argument("ssim: peak must be > 0");
  constexpr int kWin = 11;
  if (f.width() < kWin || f.height() < kWin)
    throw std::invalid_argument("ssim: images must be at least 11x11");
  double w[kWin * kWin];
  double wsum = 0.0;
  for (int r = 0; r < kWin; ++r)
    for (int c = 0; c < kWin; ++c) {
      const double dr = r - 5, dc = c - 5;
      w[r * kWin + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * 1.5 * 1.5));
      wsum += w[r * kWin + c];
    }
  for (double& x : w) x /= wsum;
  const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
  double total = 0.0;
  std::size_t count = 0;
  for (int r0 = 0; r0 + kWin <= f.height(); ++r0)
    for (int c0 = 0; c0 + kWin <= f.width(); ++c0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int r = 0; r < kWin; ++r)
        for (int c = 0; c < kWin; ++c) {
          const double wt = w[r * kWin + c], x = fhat(r0 + r, c0 + c), y = f(r0 + r, c0 + c);
          mx += wt * x;
          my += wt * y;
          sxx += wt * x * x;
          syy += wt * y * y;
          sxy += wt * x * y;
        }
      const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

inline QualityReport quality(const Image& fhat, const Image& f, double peak = 1.0) {
  return QualityReport{mise(fhat, f), psnr(fhat, f, peak), ssim(fhat, f, peak)};
}

}  // namespace mind
