#pragma once

// Binary PGM (P5) codec, 8- and 16-bit (big-endian) samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mind/image.hpp"

namespace mind::pgm {

struct Raw {
  ImageGrid grid;
  int maxval = 255;
  std::vector<std::uint16_t> samples;
};

namespace detail {

inline void skip_space_and_comments(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_header_int(std::istream& in) {
  skip_space_and_comments(in);
  int v = -1;
  if (!(in >> v)) throw std::runtime_error("pgm: malformed header");
  return v;
}

}  // namespace detail

inline Raw read_raw(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    throw std::runtime_error("pgm: not a binary PGM (P5) stream");
  Raw raw;
  int w = detail::read_header_int(in);
  int h = detail::read_header_int(in);
  raw.maxval = detail::read_header_int(in);
  if (w < 1 || h < 1) throw std::runtime_error("pgm: invalid dimensions");
  if (raw.maxval < 1 || raw.maxval > 65535) throw std::runtime_error("pgm: invalid maxval");
  in.get();  // single whitespace before raster
  raw.grid = ImageGrid(w, h);
  raw.samples.resize(raw.grid.size());
  const bool wide = raw.maxval > 255;
  std::vector<unsigned char> buf(raw.grid.size() * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!in) throw std::runtime_error("pgm: truncated raster");
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    raw.samples[i] = wide ? static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1])
                          : buf[i];
    if (raw.samples[i] > raw.maxval) throw std::runtime_error("pgm: sample exceeds maxval");
  }
  return raw;
}

inline void write_raw(std::ostream& out, const Raw& raw) {
  out << "P5\n" << raw.grid.width << ' ' << raw.grid.height << '\n' << raw.maxval << '\n';
  const bool wide = raw.maxval > 255;
  std::vector<unsigned char> buf;
  buf.reserve(raw.samples.size() * (wide ? 2 : 1));
  for (std::uint16_t s : raw.samples) {
    if (wide) buf.push_back(static_cast<unsigned char>(s >> 8));
    buf.push_back(static_cast<unsigned char>(s & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("pgm: write failed");
}

/// Samples are mapped to [0, 1] by dividing by maxval.
inline Image to_image(const Raw& raw) {
  Image img(raw.grid);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = static_cast<double>(raw.samples[i]) / raw.maxval;
  return img;
}

/// Quantizes to round(v * maxval), clamped to [0, maxval].
inline Raw from_image(const Image& img, int maxval) {
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("pgm: invalid maxval");
  Raw raw{img.grid(), maxval, std::vector<std::uint16_t>(img.size())};
  for (std::size_t i = 0; i < img.size(); ++i) {
    double q = std::round(img[i] * maxval);
    q = std::clamp(q, 0.0, static_cast<double>(maxval));
    raw.samples[i] = static_cast<std::uint16_t>(q);
  }
  return raw;
}

inline Image read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path);
  return to_image(read_raw(in));
}

inline void write(const std::string& path, const Image& img, int bits = 16) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("pgm: bits must be 8 or 16");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot create " + path);
  write_raw(out, from_image(img, bits == 8 ? 255 : 65535));
}

}  // namespace mind::pgm
