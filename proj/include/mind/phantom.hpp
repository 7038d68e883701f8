#pragma once

// Synthetic test images on [0, 1] intensities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "mind/image.hpp"

namespace mind {

enum class PhantomKind { Blocks, Ramp, Bubbles, Mixed, Quadrants };

inline PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "blocks") return PhantomKind::Blocks;
  if (s == "ramp") return PhantomKind::Ramp;
  if (s == "bubbles") return PhantomKind::Bubbles;
  if (s == "mixed") return PhantomKind::Mixed;
  if (s == "quadrants") return PhantomKind::Quadrants;
  throw std::invalid_argument("unknown phantom: " + s);
}

namespace detail {

inline void paint_blocks(Image& img, std::mt19937_64& gen, int count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int W = img.width(), H = img.height();
  for (int k = 0; k < count; ++k) {
    const int bw = std::max(2, static_cast<int>(W * (0.15 + 0.35 * unit(gen))));
    const int bh = std::max(2, static_cast<int>(H * (0.15 + 0.35 * unit(gen))));
    const int c0 = static_cast<int>((W - bw) * unit(gen));
    const int r0 = static_cast<int>((H - bh) * unit(gen));
    const double level = 0.2 + 0.8 * unit(gen);
    for (int r = r0; r < r0 + bh; ++r)
      for (int c = c0; c < c0 + bw; ++c) img(r, c) = level;
  }
}

inline void paint_bubbles(Image& img, std::mt19937_64& gen, int count) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int W = img.width(), H = img.height();
  const double side = std::min(W, H);
  for (int k = 0; k < count; ++k) {
    const double rad = side * (0.03 + 0.07 * unit(gen));
    const double cx = W * unit(gen), cy = H * unit(gen);
    for (int r = 0; r < H; ++r)
      for (int c = 0; c < W; ++c)
        if (std::hypot(c + 0.5 - cx, r + 0.5 - cy) <= rad) img(r, c) = 1.0;
  }
}

}  // namespace detail

/// Piecewise-constant blocks, an affine ramp, bright disks, blocks plus disks,
/// or four quadrants at levels 0.2, 0.5, 0.8, 1.0 (seed unused).
inline Image make_phantom(ImageGrid grid, PhantomKind kind, std::uint64_t seed = 0) {
  Image img(grid, 0.1);
  std::mt19937_64 gen(seed);
  switch (kind) {
    case PhantomKind::Blocks: detail::paint_blocks(img, gen, 4); break;
    case PhantomKind::Ramp:
      for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c)
          img(r, c) = 0.1 + 0.4 * (c + 0.5) / grid.width + 0.4 * (r + 0.5) / grid.height;
      break;
    case PhantomKind::Bubbles: detail::paint_bubbles(img, gen, 8); break;
    case PhantomKind::Mixed:
      detail::paint_blocks(img, gen, 3);
      detail::paint_bubbles(img, gen, 4);
      break;
    case PhantomKind::Quadrants:
      for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) {
          const bool right = 2 * c >= grid.width, lower = 2 * r >= grid.height;
          img(r, c) = lower ? (right ? 1.0 : 0.8) : (right ? 0.5 : 0.2);
        }
      break;
  }
  return img;
}

}  // namespace mind
