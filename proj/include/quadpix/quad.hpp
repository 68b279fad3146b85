// Local second-order features: the full redundant form (small-scale oracle)
// and the compact M·D form used for classification.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quadpix/hog.hpp"
#include "quadpix/image.hpp"

namespace quadpix {

// Full-form extraction materializes M²·D values; restricted to oracle scale.
inline constexpr int kFullQuadPixelCap = 256;

/// Square pixel neighborhood of odd side 2·radius+1, offsets enumerated
/// row-major (dy outer, dx inner), zero offset included.
struct LocalWindow {
  int radius = 0;
  std::vector<std::pair<int, int>> offsets;  // (dy, dx)

  static LocalWindow square(int radius) {
    if (radius < 0) throw std::invalid_argument("LocalWindow: radius must be >= 0");
    LocalWindow w;
    w.radius = radius;
    const int side = 2 * radius + 1;
    w.offsets.reserve(static_cast<std::size_t>(side) * side);
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx) w.offsets.emplace_back(dy, dx);
    return w;
  }

  int size() const { return static_cast<int>(offsets.size()); }

  /// Index of offset (dy, dx), or -1 if outside the window.
  int offset_index(int dy, int dx) const {
    if (dy < -radius || dy > radius || dx < -radius || dx > radius) return -1;
    return (dy + radius) * (2 * radius + 1) + (dx + radius);
  }
};

/// Compact local second-order feature: M blocks of length D; block m holds
/// the shifted image (impulse filter at offset m) multiplied pointwise by x.
struct QuadFeature {
  FeatureVector values;  // length M·D
  int window_size = 0;   // M
  int pixel_count = 0;   // D
};

inline long long quad_dimension(int width, int height, const LocalWindow& window) {
  return static_cast<long long>(window.size()) * width * height;
}

namespace detail {

inline double shifted_pixel(const Image& img, int r, int c, int dy, int dx) {
  const int rr = r + dy;
  const int cc = c + dx;
  if (rr < 0 || rr >= img.height || cc < 0 || cc >= img.width) return 0.0;
  return img.at(rr, cc);
}

}  // namespace detail

/// All local unary second-order interactions: for every center i the window
/// outer product S_i (zero-padded at borders), vectorized row-major and
/// concatenated center-major. Length M²·D. Oracle-scale only.
inline FeatureVector local_quadratic_full(const Image& image, const LocalWindow& window) {
  const int d = image.pixels();
  if (d > kFullQuadPixelCap)
    throw std::invalid_argument(
        "local_quadratic_full: image exceeds the oracle size cap (D <= 256)");
  const int m = window.size();
  FeatureVector out(static_cast<Eigen::Index>(m) * m * d);
  std::vector<double> patch(m);
  Eigen::Index pos = 0;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int k = 0; k < m; ++k)
        patch[k] = detail::shifted_pixel(image, r, c, window.offsets[k].first,
                                         window.offsets[k].second);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out[pos++] = patch[a] * patch[b];
    }
  }
  return out;
}

/// Compact form: block m = shift(x, offset_m) ⊙ x, blocks concatenated in
/// window order. Entries whose shifted partner falls outside the image are
/// exactly zero.
inline QuadFeature local_quadratic_compact(const Image& image, const LocalWindow& window) {
  const int d = image.pixels();
  const int m = window.size();
  QuadFeature feat;
  feat.window_size = m;
  feat.pixel_count = d;
  feat.values.resize(static_cast<Eigen::Index>(m) * d);
  Eigen::Index pos = 0;
  for (int k = 0; k < m; ++k) {
    const int dy = window.offsets[k].first;
    const int dx = window.offsets[k].second;
    for (int r = 0; r < image.height; ++r) {
      const int rr = r + dy;
      const bool row_ok = (rr >= 0 && rr < image.height);
      for (int c = 0; c < image.width; ++c) {
        const int cc = c + dx;
        double v = 0.0;
        if (row_ok && cc >= 0 && cc < image.width) v = image.at(rr, cc) * image.at(r, c);
        feat.values[pos++] = v;
      }
    }
  }
  return feat;
}

/// Writes the compact feature directly into `row` (length M·D); used by
/// trainers that materialize rows on demand.
inline void local_quadratic_compact_into(const Image& image, const LocalWindow& window,
                                         double* row) {
  const int m = window.size();
  std::size_t pos = 0;
  for (int k = 0; k < m; ++k) {
    const int dy = window.offsets[k].first;
    const int dx = window.offsets[k].second;
    for (int r = 0; r < image.height; ++r) {
      const int rr = r + dy;
      const bool row_ok = (rr >= 0 && rr < image.height);
      const double* base = row_ok ? &image.data[static_cast<std::size_t>(rr) * image.width]
                                  : nullptr;
      const double* cur = &image.data[static_cast<std::size_t>(r) * image.width];
      for (int c = 0; c < image.width; ++c) {
        const int cc = c + dx;
        row[pos++] = (row_ok && cc >= 0 && cc < image.width) ? base[cc] * cur[c] : 0.0;
      }
    }
  }
}

/// Deterministic index of the product x_p·x_q inside the compact feature, for
/// an in-window pair (|Δrow|, |Δcol| ≤ radius). Returns -1 when the pair is
/// not within the window.
inline long long compact_product_index(const LocalWindow& window, int width, int height,
                                       int p, int q) {
  const int pr = p / width, pc = p % width;
  const int qr = q / width, qc = q % width;
  const int k = window.offset_index(qr - pr, qc - pc);
  if (k < 0) return -1;
  return static_cast<long long>(k) * width * height + p;
}

}  // namespace quadpix
