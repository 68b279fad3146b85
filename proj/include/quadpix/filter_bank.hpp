// Oriented filter banks (even-symmetric Gabors over orientations × scales).
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadpix/image.hpp"

namespace quadpix {

/// Ordered oriented-edge filters, scale-major: filter index f = s*orientations + k
/// holds orientation k at scale s. Kernels at one scale share an odd support.
struct FilterBank {
  std::vector<Kernel> filters;
  int orientations = 0;
  int scales = 0;

  int size() const { return static_cast<int>(filters.size()); }
};

namespace detail {

inline Kernel make_gabor(int support, double theta, double wavelength, double sigma) {
  Kernel k(support, support);
  const int c = support / 2;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  double sum = 0.0;
  for (int r = 0; r < support; ++r) {
    for (int col = 0; col < support; ++col) {
      const double y = r - c;
      const double x = col - c;
      const double along = x * cos_t + y * sin_t;
      const double envelope = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      const double v = envelope * std::cos(2.0 * M_PI * along / wavelength);
      k.at(r, col) = v;
      sum += v;
    }
  }
  // zero mean, then unit L2 norm
  const double mean = sum / (static_cast<double>(support) * support);
  double norm_sq = 0.0;
  for (double& t : k.taps) {
    t -= mean;
    norm_sq += t * t;
  }
  if (norm_sq <= 0.0) throw std::runtime_error("make_gabor: degenerate kernel");
  const double inv_norm = 1.0 / std::sqrt(norm_sq);
  for (double& t : k.taps) t *= inv_norm;
  return k;
}

}  // namespace detail

/// Even-symmetric (cosine-phase) Gabor bank. Orientation k is θ = kπ/orientations;
/// each scale level roughly doubles support and wavelength while keeping the
/// support odd: support_s = (base_support−1)·2^s + 1, wavelength = support/2,
/// envelope σ = support/5. Every kernel is zero-mean with unit L2 norm.
inline FilterBank make_gabor_bank(int orientations, int scales, int base_support) {
  if (orientations < 1) throw std::invalid_argument("make_gabor_bank: orientations >= 1");
  if (scales < 1) throw std::invalid_argument("make_gabor_bank: scales >= 1");
  if (base_support < 3 || base_support % 2 == 0)
    throw std::invalid_argument("make_gabor_bank: base_support must be odd and >= 3");
  FilterBank bank;
  bank.orientations = orientations;
  bank.scales = scales;
  bank.filters.reserve(static_cast<std::size_t>(orientations) * scales);
  for (int s = 0; s < scales; ++s) {
    const int support = ((base_support - 1) << s) + 1;
    const double wavelength = support / 2.0;
    const double sigma = support / 5.0;
    for (int k = 0; k < orientations; ++k) {
      const double theta = M_PI * k / orientations;
      bank.filters.push_back(detail::make_gabor(support, theta, wavelength, sigma));
    }
  }
  return bank;
}

}  // namespace quadpix
