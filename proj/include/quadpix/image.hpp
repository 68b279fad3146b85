// Grayscale image type, 2-D convolution, power normalization and pooling.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadpix {

/// Row-major grayscale raster. Pixel (r, c) lives at data[r*width + c];
/// the flat data vector doubles as the vectorized view x ∈ R^D.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Image: dimensions must be positive");
  }

  int pixels() const { return width * height; }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }

  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// 2-D filter taps; odd dimensions so "same" output stays centered.
struct Kernel {
  int width = 0;
  int height = 0;
  std::vector<double> taps;

  Kernel() = default;
  Kernel(int w, int h, double fill = 0.0)
      : width(w), height(h), taps(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Kernel: dimensions must be positive");
    if (w % 2 == 0 || h % 2 == 0)
      throw std::invalid_argument("Kernel: dimensions must be odd");
  }

  double& at(int r, int c) { return taps[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return taps[static_cast<std::size_t>(r) * width + c]; }
};

/// Pooling = blur with a box kernel, then downsample by `stride`.
struct PoolingSpec {
  Kernel blur;
  int stride = 1;
};

inline Kernel make_identity_kernel() {
  Kernel k(1, 1);
  k.taps[0] = 1.0;
  return k;
}

/// Box blur of side `side` with total mass 1. Even sides are embedded in the
/// next odd kernel with the last row/column zeroed, keeping same-convolution
/// centered while preserving the even aggregation footprint.
inline Kernel make_box_blur(int side) {
  if (side < 1) throw std::invalid_argument("make_box_blur: side must be >= 1");
  const int ksize = (side % 2 == 0) ? side + 1 : side;
  Kernel k(ksize, ksize);
  const double tap = 1.0 / (static_cast<double>(side) * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) k.at(r, c) = tap;
  return k;
}

/// Same-size 2-D convolution with zero padding, sliding-window convention:
/// out[r][c] = Σ_{j} taps[j] · x[(r,c) + j − center]. An impulse therefore
/// reproduces the kernel flipped about the impulse position.
inline Image conv2d_same(const Image& image, const Kernel& kernel) {
  if (kernel.width > image.width || kernel.height > image.height)
    throw std::invalid_argument("conv2d_same: kernel larger than image");
  const int cy = kernel.height / 2;
  const int cx = kernel.width / 2;
  Image out(image.width, image.height);
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      double acc = 0.0;
      const int kr_lo = std::max(0, cy - r);
      const int kr_hi = std::min(kernel.height, image.height + cy - r);
      const int kc_lo = std::max(0, cx - c);
      const int kc_hi = std::min(kernel.width, image.width + cx - c);
      for (int kr = kr_lo; kr < kr_hi; ++kr) {
        const double* img_row = &image.data[static_cast<std::size_t>(r + kr - cy) * image.width];
        const double* tap_row = &kernel.taps[static_cast<std::size_t>(kr) * kernel.width];
        for (int kc = kc_lo; kc < kc_hi; ++kc)
          acc += tap_row[kc] * img_row[c + kc - cx];
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

/// Rescale to zero mean and unit RMS. A zero-variance input cannot be
/// normalized; it maps to the all-zero image and sets *degenerate.
inline Image power_normalize(const Image& image, bool* degenerate = nullptr) {
  if (image.pixels() == 0) throw std::invalid_argument("power_normalize: empty image");
  const double n = static_cast<double>(image.pixels());
  double mean = 0.0;
  for (double v : image.data) mean += v;
  mean /= n;
  double ms = 0.0;
  for (double v : image.data) ms += (v - mean) * (v - mean);
  ms /= n;
  Image out(image.width, image.height);
  if (ms <= 0.0) {
    if (degenerate) *degenerate = true;
    return out;
  }
  if (degenerate) *degenerate = false;
  const double inv_rms = 1.0 / std::sqrt(ms);
  for (int i = 0; i < image.pixels(); ++i) out.data[i] = (image.data[i] - mean) * inv_rms;
  return out;
}

inline int pooled_extent(int extent, int stride) {
  const int offset = stride / 2;
  return (extent - offset + stride - 1) / stride;
}

/// Blur + downsample. Samples land at offset ⌊stride/2⌋ so cells sit centered;
/// equals applying the sparse selection matrix D to the blurred image.
inline Image pool(const Image& image, const PoolingSpec& spec) {
  if (spec.stride < 1) throw std::invalid_argument("pool: stride must be >= 1");
  if (spec.stride > image.width || spec.stride > image.height)
    throw std::invalid_argument("pool: stride exceeds image dimension");
  const Image blurred = conv2d_same(image, spec.blur);
  const int offset = spec.stride / 2;
  const int out_h = pooled_extent(image.height, spec.stride);
  const int out_w = pooled_extent(image.width, spec.stride);
  Image out(out_w, out_h);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c)
      out.at(r, c) = blurred.at(offset + r * spec.stride, offset + c * spec.stride);
  return out;
}

}  // namespace quadpix
