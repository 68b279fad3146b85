// Image ingestion (PGM P5, PNG gray/RGB) and PGM debug export.
#pragma once

#include <png.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpix/image.hpp"

namespace quadpix {

inline double luma(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in) {
  skip_pnm_whitespace(in);
  int v = 0;
  if (!(in >> v)) throw std::runtime_error("PGM: malformed header");
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace detail

/// Binary PGM (P5), 8- or 16-bit; values scaled to [0,1].
inline Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
  const int width = detail::read_pnm_int(in);
  const int height = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("read_pgm: bad header in " + path);
  in.get();  // single whitespace byte after maxval
  Image img(width, height);
  const std::size_t n = img.data.size();
  if (maxval < 256) {
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    for (std::size_t i = 0; i < n; ++i) img.data[i] = raw[i] / static_cast<double>(maxval);
  } else {
    std::vector<std::uint8_t> raw(2 * n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
    if (!in) throw std::runtime_error("read_pgm: truncated pixel data in " + path);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      img.data[i] = v / static_cast<double>(maxval);
    }
  }
  return img;
}

/// Debug export. With rescale=true the value range is mapped to 0..255;
/// otherwise values are clamped to [0,1].
inline void write_pgm(const Image& image, const std::string& path, bool rescale = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  double lo = 0.0, hi = 1.0;
  if (rescale && !image.data.empty()) {
    lo = *std::min_element(image.data.begin(), image.data.end());
    hi = *std::max_element(image.data.begin(), image.data.end());
    if (hi <= lo) hi = lo + 1.0;
  }
  std::vector<std::uint8_t> raw(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    double v = (image.data[i] - lo) / (hi - lo);
    v = std::clamp(v, 0.0, 1.0);
    raw[i] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
}

/// 8-bit grayscale or 24-bit RGB PNG → grayscale in [0,1]. Palette images are
/// expanded, 16-bit depth stripped, alpha dropped, RGB reduced by luma.
inline Image read_png(const std::string& path) {
  std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("read_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("read_png: png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("read_png: png_create_info_struct failed");
  }
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: failed to decode " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const png_byte channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("read_png: unsupported channel count in " + path);
  }
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.assign(row_bytes * height, 0);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 r = 0; r < height; ++r) {
    const std::uint8_t* row = pixels.data() + r * row_bytes;
    for (png_uint_32 c = 0; c < width; ++c) {
      double v;
      if (channels == 1) {
        v = row[c] / 255.0;
      } else {
        v = luma(row[3 * c] / 255.0, row[3 * c + 1] / 255.0, row[3 * c + 2] / 255.0);
      }
      img.at(static_cast<int>(r), static_cast<int>(c)) = v;
    }
  }
  return img;
}

/// Dispatch on file magic: PNG signature or PGM "P5".
inline Image read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("read_image: cannot open " + path);
  unsigned char sig[8] = {0};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::equal(sig, sig + 8, png_sig)) return read_png(path);
  if (sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  throw std::runtime_error("read_image: unsupported format: " + path);
}

}  // namespace quadpix
