// FFT helpers (FFTW-backed), spectral whitening and radial spectrum measures.
#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "quadpix/image.hpp"

namespace quadpix {

namespace detail {
// FFTW plan creation/destruction is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

using ComplexGrid = std::vector<std::complex<double>>;

/// Unnormalized forward 2-D DFT of a real image, full complex grid,
/// row-major with frequency index (ky, kx) at [ky*width + kx].
inline ComplexGrid fft2(const Image& image) {
  ComplexGrid in(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) in[i] = image.data[i];
  ComplexGrid out(in.size());
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_2d(image.height, image.width,
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  return out;
}

/// Inverse 2-D DFT, normalized by 1/N; returns the real part.
inline Image ifft2_real(const ComplexGrid& grid, int width, int height) {
  if (static_cast<std::size_t>(width) * height != grid.size())
    throw std::invalid_argument("ifft2_real: grid size mismatch");
  ComplexGrid in(grid);
  ComplexGrid out(grid.size());
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_plan plan = fftw_plan_dft_2d(height, width,
                                      reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()),
                                      FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  }
  Image img(width, height);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) img.data[i] = out[i].real() * scale;
  return img;
}

// signed frequency index: 0..n/2 positive, remainder negative
inline int signed_frequency(int k, int n) { return (2 * k <= n) ? k : k - n; }

/// Scale every Fourier coefficient by its radial frequency (cycles/pixel)
/// raised to `spectrum_exponent`; zero the DC term; power-normalize the
/// result. The default exponent +1 flattens a 1/f amplitude spectrum.
inline Image whiten(const Image& image, double spectrum_exponent = 1.0) {
  if (image.width < 2 || image.height < 2)
    throw std::invalid_argument("whiten: image must be at least 2x2");
  ComplexGrid grid = fft2(image);
  for (int ky = 0; ky < image.height; ++ky) {
    for (int kx = 0; kx < image.width; ++kx) {
      const std::size_t idx = static_cast<std::size_t>(ky) * image.width + kx;
      if (ky == 0 && kx == 0) {
        grid[idx] = 0.0;
        continue;
      }
      const double fy = static_cast<double>(signed_frequency(ky, image.height)) / image.height;
      const double fx = static_cast<double>(signed_frequency(kx, image.width)) / image.width;
      const double r = std::hypot(fx, fy);
      grid[idx] *= std::pow(r, spectrum_exponent);
    }
  }
  return power_normalize(ifft2_real(grid, image.width, image.height));
}

/// Radially averaged amplitude spectrum. Bin b collects |F| over the annulus
/// radius ∈ [b, b+1) in cycles/image; returns per-bin (mean radius, mean amp).
struct RadialProfile {
  std::vector<double> radius;
  std::vector<double> amplitude;
  std::vector<std::size_t> count;
};

inline RadialProfile radial_amplitude_profile(const Image& image) {
  const ComplexGrid grid = fft2(image);
  const int max_bin = std::max(image.width, image.height);
  RadialProfile p;
  p.radius.assign(max_bin, 0.0);
  p.amplitude.assign(max_bin, 0.0);
  p.count.assign(max_bin, 0);
  for (int ky = 0; ky < image.height; ++ky) {
    for (int kx = 0; kx < image.width; ++kx) {
      const double fy = signed_frequency(ky, image.height);
      const double fx = signed_frequency(kx, image.width);
      const double r = std::hypot(fx, fy);
      const int b = static_cast<int>(r);
      if (b >= max_bin) continue;
      p.radius[b] += r;
      p.amplitude[b] += std::abs(grid[static_cast<std::size_t>(ky) * image.width + kx]);
      p.count[b] += 1;
    }
  }
  return p;
}

inline void accumulate_profile(RadialProfile& total, const RadialProfile& part) {
  if (total.count.empty()) {
    total = part;
    return;
  }
  if (total.count.size() != part.count.size())
    throw std::invalid_argument("accumulate_profile: mismatched bin counts");
  for (std::size_t b = 0; b < part.count.size(); ++b) {
    total.radius[b] += part.radius[b];
    total.amplitude[b] += part.amplitude[b];
    total.count[b] += part.count[b];
  }
}

/// Least-squares slope of log(amplitude) against log(radius) over annuli
/// lo_bin..hi_bin inclusive. Empty or zero-amplitude bins are skipped.
inline double spectral_slope(const RadialProfile& profile, int lo_bin, int hi_bin) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int b = lo_bin; b <= hi_bin && b < static_cast<int>(profile.count.size()); ++b) {
    if (profile.count[b] == 0) continue;
    const double amp = profile.amplitude[b] / profile.count[b];
    const double rad = profile.radius[b] / profile.count[b];
    if (amp <= 0.0 || rad <= 0.0) continue;
    const double x = std::log(rad);
    const double y = std::log(amp);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::runtime_error("spectral_slope: not enough populated bins");
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace quadpix
