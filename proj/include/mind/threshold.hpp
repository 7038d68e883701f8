#pragma once

// Multiscale statistic, threshold calibration and noise-level estimation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mind/dictionary.hpp"
#include "mind/image.hpp"
#include "mind/linalg.hpp"

namespace mind {

struct ThresholdSpec {
  double alpha = 0.5;
  int reps = 1000;
  std::uint64_t seed = 0;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ThresholdSpec: alpha must lie in (0, 1)");
    if (reps < 1) throw std::invalid_argument("ThresholdSpec: reps must be >= 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("ThresholdSpec: sigma must be >= 0");
  }
};

struct SigmaEstimate {
  double sigma_hat = 0.0;
  std::string method;
};

/// ||r||_MS = max_l |[K r]_l|.
inline double ms_statistic(const Dictionary& dict, const Image& r) {
  return linalg::norm_inf(analyze(dict, r));
}

/// Empirical quantile at level p in [0, 1] with linear interpolation between
/// order statistics (h = (m - 1) p).
inline double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

/// Unit-sigma multiscale statistics of `reps` independent noise images. Draw k
/// uses the generator seeded with mix_seed(seed, k), so the sample does not
/// depend on how repetitions are distributed over threads.
inline std::vector<double> monte_carlo_sample(const Dictionary& dict, int reps, std::uint64_t seed,
                                              unsigned threads = std::thread::hardware_concurrency()) {
  std::vector<double> stats(static_cast<std::size_t>(reps));
  threads = std::clamp(threads, 1u, static_cast<unsigned>(reps));
  auto work = [&](unsigned t) {
    std::vector<double> eps(dict.n()), coeff(dict.element_count());
    for (int k = static_cast<int>(t); k < reps; k += static_cast<int>(threads)) {
      fill_standard_normal(eps, mix_seed(seed, static_cast<std::uint64_t>(k)));
      dict.analyze(eps, coeff);
      stats[k] = linalg::norm_inf(coeff);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  return stats;
}

/// (1 - alpha)-quantile of sigma * ||eps||_MS; alpha = 0.5 is the median rule.
inline double monte_carlo_quantile(const Dictionary& dict, const ThresholdSpec& spec) {
  spec.validate();
  if (spec.sigma == 0.0) return 0.0;
  return spec.sigma * empirical_quantile(monte_carlo_sample(dict, spec.reps, spec.seed),
                                         1.0 - spec.alpha);
}

/// q_n = C sigma sqrt(log n / n), natural logarithm.
inline double universal_threshold(double C, double sigma, std::size_t n) {
  if (n < 2) throw std::invalid_argument("universal_threshold: n must be >= 2");
  if (!(C > 0.0)) throw std::invalid_argument("universal_threshold: C must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("universal_threshold: sigma must be >= 0");
  const double nn = static_cast<double>(n);
  return C * sigma * std::sqrt(std::log(nn) / nn);
}

/// Second-order difference estimator: pseudo-residuals of the 5-point mask
/// (4, -1, -1, -1, -1) / sqrt(20) over interior pixels. The mask annihilates
/// affine trends and has unit squared norm.
inline SigmaEstimate estimate_sigma(const Image& y) {
  if (y.width() < 3 || y.height() < 3)
    throw std::invalid_argument("estimate_sigma: grid must be at least 3x3");
  double s = 0.0;
  std::size_t m = 0;
  for (int r = 1; r + 1 < y.height(); ++r)
    for (int c = 1; c + 1 < y.width(); ++c) {
      const double e = 4.0 * y(r, c) - y(r - 1, c) - y(r + 1, c) - y(r, c - 1) - y(r, c + 1);
      s += e * e;
      ++m;
    }
  return SigmaEstimate{std::sqrt(s / (20.0 * static_cast<double>(m))), "difference-5point"};
}

// Cached thresholds live in a small JSON file holding one record per key.
struct ThresholdCacheKey {
  std::string dictionary;
  std::size_t n = 0;
  double alpha = 0.5;
  int reps = 0;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorName;

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"dictionary", dictionary}, {"n", n},       {"alpha", alpha},
            {"reps", reps},             {"seed", seed}, {"generator", generator}};
  }
};

/// Cached unit-sigma quantile for `key`, if present in the cache file.
inline std::optional<double> cache_lookup(const std::string& path, const ThresholdCacheKey& key) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!doc.contains("records")) return std::nullopt;
  const auto k = key.to_json();
  for (const auto& rec : doc["records"])
    if (rec.value("key", nlohmann::json{}) == k) return rec.at("unit_quantile").get<double>();
  return std::nullopt;
}

inline void cache_store(const std::string& path, const ThresholdCacheKey& key, double unit_quantile) {
  nlohmann::json doc = {{"records", nlohmann::json::array()}};
  if (std::ifstream in(path); in) {
    try {
      in >> doc;
    } catch (const nlohmann::json::exception&) {
      doc = {{"records", nlohmann::json::array()}};
    }
  }
  auto& recs = doc["records"];
  const auto k = key.to_json();
  recs.erase(std::remove_if(recs.begin(), recs.end(),
                            [&](const nlohmann::json& r) { return r.value("key", nlohmann::json{}) == k; }),
             recs.end());
  recs.push_back({{"key", k}, {"unit_quantile", unit_quantile}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("threshold cache: cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace mind
