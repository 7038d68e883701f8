#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mind {

/// Equidistant 2-D sampling grid. Pixel (row k, column j) is identified with
/// the point ((j + 1/2) / width, (k + 1/2) / height) of the unit square.
struct ImageGrid {
  int width = 1;
  int height = 1;

  ImageGrid() = default;
  ImageGrid(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1)
      throw std::invalid_argument("ImageGrid: width and height must be >= 1");
  }

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Real-valued image stored row-major. Intensities are dimensionless; files
/// are mapped to [0, 1] on load.
class Image {
 public:
  Image() = default;
  explicit Image(ImageGrid grid, double fill = 0.0)
      : grid_(grid), values_(grid.size(), fill) {}
  Image(ImageGrid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("Image: value count does not match grid");
  }

  [[nodiscard]] const ImageGrid& grid() const { return grid_; }
  [[nodiscard]] int width() const { return grid_.width; }
  [[nodiscard]] int height() const { return grid_.height; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  double& operator()(int row, int col) { return values_[grid_.index(row, col)]; }
  double operator()(int row, int col) const { return values_[grid_.index(row, col)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::vector<double>& data() { return values_; }
  [[nodiscard]] const std::vector<double>& data() const { return values_; }

  [[nodiscard]] bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  ImageGrid grid_;
  std::vector<double> values_;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Name of the pseudo-random source recorded in run reports.
inline constexpr const char* kGeneratorName = "mt19937_64+std::normal_distribution(libstdc++)";

inline void require_same_grid(const Image& a, const Image& b, const char* what) {
  if (a.grid() != b.grid())
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fills `out` with i.i.d. standard normal draws from a generator seeded by `seed`.
inline void fill_standard_normal(std::span<double> out, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& x : out) x = normal(gen);
}

/// Grid inner product <h, g> = n^-1 sum_i h(x_i) g(x_i).
inline double inner_product(const Image& h, const Image& g) {
  require_same_grid(h, g, "inner_product");
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * g[i];
  return s / static_cast<double>(h.size());
}

/// Y = f + sigma * eps with eps drawn from the seeded generator.
inline Image add_noise(const Image& f, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  Image y = f;
  if (spec.sigma == 0.0) return y;
  std::vector<double> eps(f.size());
  fill_standard_normal(eps, spec.seed);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += spec.sigma * eps[i];
  return y;
}

/// Noise level giving max_i |f(x_i)| / sigma = snr.
inline double snr_to_sigma(const Image& f, double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr_to_sigma: snr must be > 0");
  double peak = 0.0;
  for (double v : f.values()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw std::invalid_argument("snr_to_sigma: image is identically zero");
  return peak / snr;
}

}  // namespace mind
