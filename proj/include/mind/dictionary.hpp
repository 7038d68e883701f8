#pragma once

// Multiscale dictionaries {phi_l} and their analysis operator K.
//
// Every element is normalized on the grid so that sum_i phi_l(x_i)^2 = n; an
// indicator element therefore reads sqrt(n / |B|) * 1_B. With the grid inner
// product, [K g]_l = n^-1 sum_i phi_l(x_i) g(x_i) is N(0, sigma^2 / n) for pure
// noise g = sigma * eps, whatever the support size.
//
// Canonical coefficient order:
//   dyadic cubes  (level, row, col), level 0 is the full domain;
//   small cubes   (edge, row, col), edge = 1 .. max_edge;
//   wavelets      (level, band, row, col), level 0 holds the scaling band
//                 (band 0) and the coarsest details; bands 1, 2, 3 are the
//                 column-highpass, row-highpass and diagonal detail blocks.
// Rows and columns are top-left pixel offsets for cubes and block positions
// for wavelet bands.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mind/image.hpp"
#include "mind/wavelet.hpp"

namespace mind {

enum class DictionaryKind { DyadicCubes, SmallCubes, Wavelet };

inline const char* to_string(DictionaryKind k) {
  switch (k) {
    case DictionaryKind::DyadicCubes: return "dyadic-cubes";
    case DictionaryKind::SmallCubes: return "small-cubes";
    case DictionaryKind::Wavelet: return "wavelet";
  }
  return "?";
}

inline DictionaryKind dictionary_kind_from_string(const std::string& s) {
  if (s == "dyadic-cubes" || s == "dyadic") return DictionaryKind::DyadicCubes;
  if (s == "small-cubes" || s == "small") return DictionaryKind::SmallCubes;
  if (s == "wavelet" || s == "wavelets") return DictionaryKind::Wavelet;
  throw std::invalid_argument("unknown dictionary kind: " + s);
}

struct DictionaryParams {
  int max_edge = 30;                              // small cubes
  wavelet::Filter filter = wavelet::Filter::Haar;  // wavelets
  int depth = 0;                                   // wavelets; 0 = full depth
  int max_level = -1;                              // dyadic cubes; -1 = down to single pixels
};

struct ElementId {
  DictionaryKind kind;
  int level;  // dyadic level, small-cube edge, or wavelet level
  int row;
  int col;
  int band;  // wavelet band, 0 for cubes

  friend bool operator==(const ElementId&, const ElementId&) = default;
};

/// Axis-aligned pixel rectangle [row, row + rows) x [col, col + cols).
struct PixelRect {
  int row, col, rows, cols;
};

class Dictionary {
 public:
  Dictionary(ImageGrid grid, DictionaryKind kind, DictionaryParams params = {})
      : grid_(grid), kind_(kind), params_(params) {
    switch (kind_) {
      case DictionaryKind::DyadicCubes: {
        if (grid.width != grid.height || !std::has_single_bit(static_cast<unsigned>(grid.width)))
          throw std::invalid_argument("dyadic cubes need a square grid with power-of-two side");
        levels_ = std::countr_zero(static_cast<unsigned>(grid.width));
        if (params_.max_level > levels_ || params_.max_level < -1)
          throw std::invalid_argument("dyadic cubes: max_level must lie in [-1, log2(side)]");
        if (params_.max_level >= 0) levels_ = params_.max_level;
        count_ = 0;
        for (int l = 0; l <= levels_; ++l) count_ += std::size_t{1} << (2 * l);
        break;
      }
      case DictionaryKind::SmallCubes: {
        if (params.max_edge < 1 || params.max_edge > std::min(grid.width, grid.height))
          throw std::invalid_argument("small cubes: max_edge must lie in [1, min(width, height)]");
        count_ = 0;
        for (int e = 1; e <= params.max_edge; ++e)
          count_ += static_cast<std::size_t>(grid.width - e + 1) * (grid.height - e + 1);
        break;
      }
      case DictionaryKind::Wavelet: {
        const int full = std::min(std::countr_zero(static_cast<unsigned>(grid.width)),
                                  std::countr_zero(static_cast<unsigned>(grid.height)));
        if (params_.depth == 0) params_.depth = full;
        if (params_.depth < 0 || params_.depth > full)
          throw std::invalid_argument("wavelets: width and height must be divisible by 2^depth");
        levels_ = params_.depth;
        count_ = grid.size();
        break;
      }
    }
  }

  [[nodiscard]] const ImageGrid& grid() const { return grid_; }
  [[nodiscard]] DictionaryKind kind() const { return kind_; }
  [[nodiscard]] const DictionaryParams& params() const { return params_; }
  [[nodiscard]] std::size_t element_count() const { return count_; }
  [[nodiscard]] std::size_t n() const { return grid_.size(); }

  /// Stable textual identity used for threshold caching and run reports.
  [[nodiscard]] std::string fingerprint() const {
    std::ostringstream os;
    os << to_string(kind_) << '/' << grid_.width << 'x' << grid_.height;
    if (kind_ == DictionaryKind::DyadicCubes) os << "/levels=" << levels_ + 1;
    if (kind_ == DictionaryKind::SmallCubes) os << "/max_edge=" << params_.max_edge;
    if (kind_ == DictionaryKind::Wavelet)
      os << '/' << wavelet::name(params_.filter) << "/depth=" << params_.depth;
    os << "/count=" << count_;
    return os.str();
  }

  /// Calls f(ElementId, PixelRect support) for every element in canonical order.
  /// For wavelets the rectangle is the dyadic block the element is attached to.
  template <class F>
  void for_each_element(F&& f) const {
    const int W = grid_.width, H = grid_.height;
    switch (kind_) {
      case DictionaryKind::DyadicCubes:
        for (int l = 0; l <= levels_; ++l) {
          const int e = W >> l;
          for (int r = 0; r < H; r += e)
            for (int c = 0; c < W; c += e) f(ElementId{kind_, l, r, c, 0}, PixelRect{r, c, e, e});
        }
        break;
      case DictionaryKind::SmallCubes:
        for (int e = 1; e <= params_.max_edge; ++e)
          for (int r = 0; r + e <= H; ++r)
            for (int c = 0; c + e <= W; ++c) f(ElementId{kind_, e, r, c, 0}, PixelRect{r, c, e, e});
        break;
      case DictionaryKind::Wavelet: {
        const int D = levels_;
        for (int l = 0; l < std::max(D, 1); ++l) {
          const int shift = D - l;
          const int bw = W >> shift, bh = H >> shift;
          const int ew = W / bw, eh = H / bh;
          for (int band = (l == 0 ? 0 : 1); band <= (D == 0 ? 0 : 3); ++band)
            for (int r = 0; r < bh; ++r)
              for (int c = 0; c < bw; ++c)
                f(ElementId{kind_, l, r, c, band}, PixelRect{r * eh, c * ew, eh, ew});
        }
        break;
      }
    }
  }

  [[nodiscard]] std::vector<ElementId> elements() const {
    std::vector<ElementId> out;
    out.reserve(count_);
    for_each_element([&](const ElementId& id, const PixelRect&) { out.push_back(id); });
    return out;
  }

  /// Coefficients [K g]_l = n^-1 sum_i phi_l(x_i) g(x_i) in canonical order.
  [[nodiscard]] std::vector<double> analyze(std::span<const double> g) const {
    std::vector<double> out(count_);
    analyze(g, out);
    return out;
  }

  void analyze(std::span<const double> g, std::span<double> out) const {
    if (g.size() != n()) throw std::invalid_argument("analyze: image does not match grid");
    if (out.size() != count_) throw std::invalid_argument("analyze: output length mismatch");
    if (kind_ == DictionaryKind::Wavelet) {
      analyze_wavelet(g, out);
      return;
    }
    const int W = grid_.width;
    // Summed-area table with a zero border row and column.
    std::vector<double> sat(static_cast<std::size_t>(W + 1) * (grid_.height + 1), 0.0);
    for (int r = 0; r < grid_.height; ++r) {
      double run = 0.0;
      for (int c = 0; c < W; ++c) {
        run += g[grid_.index(r, c)];
        sat[(r + 1) * (W + 1) + c + 1] = sat[r * (W + 1) + c + 1] + run;
      }
    }
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
    std::size_t k = 0;
    for_each_element([&](const ElementId&, const PixelRect& b) {
      const std::size_t r0 = b.row, c0 = b.col, r1 = b.row + b.rows, c1 = b.col + b.cols;
      const double s = sat[r1 * (W + 1) + c1] - sat[r0 * (W + 1) + c1] -
                       sat[r1 * (W + 1) + c0] + sat[r0 * (W + 1) + c0];
      out[k++] = s * inv_sqrt_n / std::sqrt(static_cast<double>(b.rows) * b.cols);
    });
  }

  /// Adjoint K*: pixel i receives n^-1 sum_l c_l phi_l(x_i).
  [[nodiscard]] std::vector<double> adjoint(std::span<const double> c) const {
    std::vector<double> out(n());
    adjoint(c, out);
    return out;
  }

  void adjoint(std::span<const double> c, std::span<double> out) const {
    if (c.size() != count_) throw std::invalid_argument("adjoint: coefficient length mismatch");
    if (out.size() != n()) throw std::invalid_argument("adjoint: output length mismatch");
    if (kind_ == DictionaryKind::Wavelet) {
      adjoint_wavelet(c, out);
      return;
    }
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
    scatter_rects(out, [&](std::size_t k, const PixelRect& b) {
      return c[k] * inv_sqrt_n / std::sqrt(static_cast<double>(b.rows) * b.cols);
    });
  }

  /// Diagonal of K^T diag(m) K, i.e. pixel i gets sum_l m_l K_li^2. Exact for
  /// cube dictionaries and Haar wavelets; for longer wavelet filters the squared
  /// element is approximated by its uniform spread over the attached block.
  [[nodiscard]] std::vector<double> weighted_gram_diagonal(std::span<const double> m) const {
    if (m.size() != count_) throw std::invalid_argument("gram diagonal: weight length mismatch");
    std::vector<double> out(n());
    const double inv_n = 1.0 / static_cast<double>(n());
    scatter_rects(out, [&](std::size_t k, const PixelRect& b) {
      return m[k] * inv_n / (static_cast<double>(b.rows) * b.cols);
    });
    return out;
  }

  Image adjoint_image(std::span<const double> c) const { return Image(grid_, adjoint(c)); }

 private:
  // Adds value(k, rect) to every pixel of every element's rectangle using a
  // 2-D difference array (the transpose of the summed-area lookup).
  template <class ValueFn>
  void scatter_rects(std::span<double> out, ValueFn&& value) const {
    const int W = grid_.width, H = grid_.height;
    std::vector<double> diff(static_cast<std::size_t>(W + 1) * (H + 1), 0.0);
    std::size_t k = 0;
    for_each_element([&](const ElementId&, const PixelRect& b) {
      const double v = value(k++, b);
      const std::size_t r0 = b.row, c0 = b.col, r1 = b.row + b.rows, c1 = b.col + b.cols;
      diff[r0 * (W + 1) + c0] += v;
      diff[r0 * (W + 1) + c1] -= v;
      diff[r1 * (W + 1) + c0] -= v;
      diff[r1 * (W + 1) + c1] += v;
    });
    std::vector<double> col_run(W, 0.0);
    for (int r = 0; r < H; ++r) {
      double run = 0.0;
      for (int c = 0; c < W; ++c) {
        run += diff[r * (W + 1) + c];
        col_run[c] += run;
        out[grid_.index(r, c)] = col_run[c];
      }
    }
  }

  // Mallat-layout position of canonical element k is resolved by walking the
  // same (level, band, row, col) order used by for_each_element.
  template <class F>
  void for_each_wavelet_slot(F&& f) const {
    const int W = grid_.width, H = grid_.height, D = levels_;
    std::size_t k = 0;
    for (int l = 0; l < std::max(D, 1); ++l) {
      const int shift = D - l;
      const int bw = W >> shift, bh = H >> shift;
      for (int band = (l == 0 ? 0 : 1); band <= (D == 0 ? 0 : 3); ++band) {
        const int roff = (band == 2 || band == 3) ? bh : 0;
        const int coff = (band == 1 || band == 3) ? bw : 0;
        for (int r = 0; r < bh; ++r)
          for (int c = 0; c < bw; ++c) f(k++, grid_.index(roff + r, coff + c));
      }
    }
  }

  void analyze_wavelet(std::span<const double> g, std::span<double> out) const {
    std::vector<double> buf(g.begin(), g.end());
    wavelet::forward_2d(buf, grid_.width, grid_.height, levels_, params_.filter);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
    for_each_wavelet_slot([&](std::size_t k, std::size_t pos) { out[k] = buf[pos] * inv_sqrt_n; });
  }

  void adjoint_wavelet(std::span<const double> c, std::span<double> out) const {
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n()));
    for_each_wavelet_slot([&](std::size_t k, std::size_t pos) { out[pos] = c[k] * inv_sqrt_n; });
    wavelet::inverse_2d(out, grid_.width, grid_.height, levels_, params_.filter);
  }

  ImageGrid grid_;
  DictionaryKind kind_;
  DictionaryParams params_;
  int levels_ = 0;
  std::size_t count_ = 0;
};

inline std::vector<double> analyze(const Dictionary& dict, const Image& g) {
  if (g.grid() != dict.grid()) throw std::invalid_argument("analyze: grid mismatch");
  return dict.analyze(g.values());
}

inline Image adjoint(const Dictionary& dict, std::span<const double> c) {
  return dict.adjoint_image(c);
}

struct OperatorNorm {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// ||K||_op by power iteration on K*K from a fixed seeded start vector.
inline OperatorNorm operator_norm(const Dictionary& dict, double tol = 1e-8, int max_iter = 1000) {
  if (!(tol > 0.0)) throw std::invalid_argument("operator_norm: tol must be > 0");
  std::vector<double> x(dict.n()), coeff(dict.element_count()), y(dict.n());
  fill_standard_normal(x, 0x5EEDULL);
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    s = std::sqrt(s);
    for (double& a : v) a /= s;
    return s;
  };
  normalize(x);
  OperatorNorm res;
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    dict.analyze(x, coeff);
    dict.adjoint(coeff, y);
    const double next = normalize(y);
    std::swap(x, y);
    res.iterations = it;
    if (lambda > 0.0 && std::abs(next - lambda) <= tol * next) {
      lambda = next;
      res.converged = true;
      break;
    }
    lambda = next;
  }
  res.value = std::sqrt(lambda);
  return res;
}

// Coefficient dump: 8-byte magic, little-endian uint64 element count, then
// little-endian IEEE-754 doubles in canonical order.
inline constexpr char kCoefficientMagic[8] = {'M', 'I', 'N', 'D', 'C', 'O', 'E', 'F'};

namespace detail {
inline void put_le64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t get_le64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("coefficient dump: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

inline void write_coefficients(std::ostream& out, std::span<const double> c) {
  out.write(kCoefficientMagic, 8);
  detail::put_le64(out, c.size());
  for (double v : c) detail::put_le64(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw std::runtime_error("coefficient dump: write failed");
}

inline std::vector<double> read_coefficients(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCoefficientMagic, 8) != 0)
    throw std::runtime_error("coefficient dump: bad magic");
  const std::uint64_t count = detail::get_le64(in);
  std::vector<double> c(count);
  for (auto& v : c) v = std::bit_cast<double>(detail::get_le64(in));
  return c;
}

}  // namespace mind
