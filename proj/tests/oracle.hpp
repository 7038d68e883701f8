#pragma once

// Independent reference constructions used across the test suite.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mind/dictionary.hpp"
#include "mind/wavelet.hpp"

namespace oracle {

// Rows phi_l(x_i) / n built from the cube definitions, canonical order:
// dyadic by (level, row, col); small cubes by (edge, row, col).
inline Eigen::MatrixXd cube_matrix(const mind::ImageGrid& g, mind::DictionaryKind kind, int max_edge = 0,
                                   int max_level = -1) {
  const int W = g.width, H = g.height;
  const double n = static_cast<double>(W) * H;
  std::vector<std::vector<double>> rows;
  auto add = [&](int r0, int c0, int e) {
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    const double amp = std::sqrt(n / (double(e) * e));
    for (int r = r0; r < r0 + e; ++r)
      for (int c = c0; c < c0 + e; ++c) row[r * W + c] = amp / n;
    rows.push_back(row);
  };
  if (kind == mind::DictionaryKind::DyadicCubes) {
    int levels = 0;
    while ((1 << levels) < W) ++levels;
    if (max_level >= 0) levels = max_level;
    for (int l = 0; l <= levels; ++l) {
      const int e = W >> l;
      for (int r = 0; r < H; r += e)
        for (int c = 0; c < W; c += e) add(r, c, e);
    }
  } else {
    for (int e = 1; e <= max_edge; ++e)
      for (int r = 0; r + e <= H; ++r)
        for (int c = 0; c + e <= W; ++c) add(r, c, e);
  }
  Eigen::MatrixXd M(rows.size(), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < rows[k].size(); ++i) M(k, i) = rows[k][i];
  return M;
}

// One periodized analysis level as an explicit n x n matrix: rows 0..n/2 are
// low-pass outputs, rows n/2..n high-pass.
inline Eigen::MatrixXd filter_bank(int n, mind::wavelet::Filter f) {
  const auto h = mind::wavelet::lowpass(f);
  const int L = static_cast<int>(h.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n / 2; ++k)
    for (int m = 0; m < L; ++m) {
      const int i = (2 * k + m) % n;
      A(k, i) += h[m];
      A(n / 2 + k, i) += ((m % 2) ? -1.0 : 1.0) * h[L - 1 - m];
    }
  return A;
}

// Rows of K for the tensor wavelet dictionary, canonical (level, band, row,
// col) order with band 0 = scaling, 1 = column detail (top right of the
// Mallat layout), 2 = row detail (bottom left), 3 = diagonal.
inline Eigen::MatrixXd wavelet_matrix(int W, int H, int depth, mind::wavelet::Filter f) {
  const int n = W * H;
  Eigen::MatrixXd mallat(n, n);  // column i: transform of unit image e_i
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(H, W);
    X(i / W, i % W) = 1.0;
    int w = W, h = H;
    for (int l = 0; l < depth; ++l) {
      const Eigen::MatrixXd blk = X.topLeftCorner(h, w);
      X.topLeftCorner(h, w) = filter_bank(h, f) * blk * filter_bank(w, f).transpose();
      w /= 2;
      h /= 2;
    }
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c) mallat(r * W + c, i) = X(r, c);
  }
  Eigen::MatrixXd K(n, n);
  int k = 0;
  for (int l = 0; l < std::max(depth, 1); ++l) {
    const int bw = W >> (depth - l), bh = H >> (depth - l);
    for (int band = (l == 0 ? 0 : 1); band <= (depth == 0 ? 0 : 3); ++band) {
      const int ro = (band >= 2) ? bh : 0, co = (band % 2) ? bw : 0;
      for (int r = 0; r < bh; ++r)
        for (int c = 0; c < bw; ++c) K.row(k++) = mallat.row((ro + r) * W + co + c) / std::sqrt(double(n));
    }
  }
  return K;
}

// Matrix of a library dictionary obtained by probing with unit images.
inline Eigen::MatrixXd probe(const mind::Dictionary& d) {
  const auto n = static_cast<Eigen::Index>(d.n());
  Eigen::MatrixXd M(static_cast<Eigen::Index>(d.element_count()), n);
  std::vector<double> e(d.n(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    e[i] = 1.0;
    const auto col = d.analyze(e);
    for (Eigen::Index k = 0; k < M.rows(); ++k) M(k, i) = col[k];
    e[i] = 0.0;
  }
  return M;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Zoomed exhaustive grid search; adequate for convex objectives of up to four variables.
inline std::vector<double> grid_minimize(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> best, double half, int points, int levels) {
  const int dim = static_cast<int>(best.size());
  std::vector<double> x(dim);
  double fbest = f(best);
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
  for (int lev = 0; lev < levels; ++lev, half *= 0.6) {
    const auto c = best;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (int d = 0; d < dim; ++d, rest /= points)
        x[d] = c[d] - half + 2.0 * half * static_cast<double>(rest % points) / (points - 1);
      if (const double fx = f(x); fx < fbest) {
        fbest = fx;
        best = x;
      }
    }
  }
  return best;
}

}  // namespace oracle
