// HOG via the convolutional squared-filter-response path, plus the classic
// gradient-binning baseline used for experiment comparisons.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadpix/filter_bank.hpp"
#include "quadpix/image.hpp"

namespace quadpix {

using FeatureVector = Eigen::VectorXd;

/// Pooled squared filter responses, filter-major: value for (filter f, cell
/// row i, cell col j) sits at f*cells + i*cells_w + j.
struct HogDescriptor {
  FeatureVector values;
  int filters = 0;
  int cells_w = 0;
  int cells_h = 0;

  int cells() const { return cells_w * cells_h; }
};

/// Per filter: convolve, square pointwise, blur + downsample; concatenate.
inline HogDescriptor hog_conv(const Image& image, const FilterBank& bank,
                              const PoolingSpec& pooling) {
  if (bank.size() == 0) throw std::invalid_argument("hog_conv: empty filter bank");
  HogDescriptor desc;
  desc.filters = bank.size();
  desc.cells_w = pooled_extent(image.width, pooling.stride);
  desc.cells_h = pooled_extent(image.height, pooling.stride);
  desc.values.resize(static_cast<Eigen::Index>(desc.filters) * desc.cells());
  Eigen::Index pos = 0;
  for (const Kernel& filter : bank.filters) {
    Image response = conv2d_same(image, filter);
    for (double& v : response.data) v *= v;
    const Image pooled = pool(response, pooling);
    for (double v : pooled.data) desc.values[pos++] = v;
  }
  return desc;
}

/// Gradient-orientation-binning HOG baseline: central-difference gradients,
/// bilinear binning over signed orientations, cell aggregation, and
/// four-neighborhood L2 block normalization clipped at 0.2. Output layout is
/// (cell row, cell col, block, orientation). Experimental baseline only; not
/// algebraically related to hog_conv.
inline FeatureVector hog_baseline(const Image& image, int orientations, int cell) {
  if (orientations < 1) throw std::invalid_argument("hog_baseline: orientations >= 1");
  if (cell < 1) throw std::invalid_argument("hog_baseline: cell >= 1");
  if (image.width % cell != 0 || image.height % cell != 0)
    throw std::invalid_argument("hog_baseline: image dimensions must be divisible by cell");
  const int cells_w = image.width / cell;
  const int cells_h = image.height / cell;

  // orientation histograms per cell
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(cells_h * cells_w, orientations);
  const double bin_width = 2.0 * M_PI / orientations;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      const double right = (c + 1 < image.width) ? image.at(r, c + 1) : 0.0;
      const double left = (c - 1 >= 0) ? image.at(r, c - 1) : 0.0;
      const double below = (r + 1 < image.height) ? image.at(r + 1, c) : 0.0;
      const double above = (r - 1 >= 0) ? image.at(r - 1, c) : 0.0;
      const double gx = 0.5 * (right - left);
      const double gy = 0.5 * (below - above);
      const double mag = std::hypot(gx, gy);
      if (mag <= 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * M_PI;
      const double pos = angle / bin_width;
      int b0 = static_cast<int>(pos) % orientations;
      const double frac = pos - std::floor(pos);
      const int b1 = (b0 + 1) % orientations;
      const int cell_idx = (r / cell) * cells_w + (c / cell);
      hist(cell_idx, b0) += mag * (1.0 - frac);
      hist(cell_idx, b1) += mag * frac;
    }
  }

  // cell gradient energies
  Eigen::VectorXd energy(cells_h * cells_w);
  for (int i = 0; i < energy.size(); ++i) energy[i] = hist.row(i).squaredNorm();

  // four 2x2 block normalizations per cell, neighbors clamped at the border
  const double clip = 0.2;
  const double eps = 1e-12;
  FeatureVector out(static_cast<Eigen::Index>(cells_h) * cells_w * 4 * orientations);
  Eigen::Index pos = 0;
  const int block_dr[4] = {-1, -1, 1, 1};
  const int block_dc[4] = {-1, 1, -1, 1};
  auto cell_energy = [&](int r, int c) {
    r = std::clamp(r, 0, cells_h - 1);
    c = std::clamp(c, 0, cells_w - 1);
    return energy[r * cells_w + c];
  };
  for (int r = 0; r < cells_h; ++r) {
    for (int c = 0; c < cells_w; ++c) {
      const int cell_idx = r * cells_w + c;
      for (int b = 0; b < 4; ++b) {
        const int nr = r + block_dr[b];
        const int nc = c + block_dc[b];
        const double block_energy = cell_energy(r, c) + cell_energy(nr, c) +
                                    cell_energy(r, nc) + cell_energy(nr, nc);
        const double inv_norm = 1.0 / std::sqrt(block_energy + eps);
        for (int o = 0; o < orientations; ++o)
          out[pos++] = std::min(hist(cell_idx, o) * inv_norm, clip);
      }
    }
  }
  return out;
}

}  // namespace quadpix
