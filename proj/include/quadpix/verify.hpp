// Equivalence suites behind the `verify` CLI subcommand: the two algebraic
// identities the library is built around, checked over random inputs.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "quadpix/common.hpp"
#include "quadpix/experiments.hpp"
#include "quadpix/filter_bank.hpp"
#include "quadpix/hog.hpp"
#include "quadpix/image.hpp"
#include "quadpix/projection.hpp"
#include "quadpix/quad.hpp"

namespace quadpix {

inline Image random_image(int width, int height, std::uint64_t seed) {
  RandomStream rng(seed);
  Image img(width, height);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

/// Max deviation between the two descriptor routes, relative to the
/// convolutional descriptor's sup norm.
inline double reformulation_deviation(const Image& img, const FilterBank& bank,
                                      const PoolingSpec& pooling,
                                      const ProjectionMatrix& proj) {
  const HogDescriptor conv_path = hog_conv(img, bank, pooling);
  const HogDescriptor matrix_path = apply_projection(proj, img);
  const double scale = std::max(conv_path.values.cwiseAbs().maxCoeff(), 1e-300);
  return (conv_path.values - matrix_path.values).cwiseAbs().maxCoeff() / scale;
}

/// Reformulation equivalence over ≥100 random images (≤16×16) and 3 bank
/// configurations: hog_conv vs apply_projection within 1e−8 relative.
inline std::vector<CheckResult> verify_reformulation(std::uint64_t seed = 2024,
                                                     int images_per_config = 34) {
  struct Config {
    int orientations, scales, support, image_w, image_h, pool_side;
  };
  const Config configs[3] = {
      {3, 1, 3, 12, 12, 4},
      {2, 2, 3, 16, 16, 4},
      {4, 1, 5, 10, 14, 2},
  };
  std::vector<CheckResult> checks;
  for (int ci = 0; ci < 3; ++ci) {
    const Config& c = configs[ci];
    const FilterBank bank = make_gabor_bank(c.orientations, c.scales, c.support);
    const PoolingSpec pooling{make_box_blur(c.pool_side), c.pool_side};
    const ProjectionMatrix proj = build_projection(bank, pooling, c.image_w, c.image_h);
    double worst = 0.0;
    for (int i = 0; i < images_per_config; ++i) {
      const Image img = random_image(c.image_w, c.image_h,
                                     mix_seed(seed, static_cast<std::uint64_t>(ci),
                                              static_cast<std::uint64_t>(i)));
      worst = std::max(worst, reformulation_deviation(img, bank, pooling, proj));
    }
    checks.push_back({"reformulation equivalence config " + std::to_string(ci) + " (" +
                          std::to_string(c.orientations) + " orient x " +
                          std::to_string(c.scales) + " scales, " + std::to_string(c.image_w) +
                          "x" + std::to_string(c.image_h) + ")",
                      worst <= 1e-8,
                      "max relative deviation " + detail::format_double(worst) + " over " +
                          std::to_string(images_per_config) + " images"});
  }
  return checks;
}

/// Compact-feature fidelity: every distinct in-window pixel product recovered
/// from Ψ*(x) matches the brute-force outer-product oracle within 1e−15.
inline std::vector<CheckResult> verify_quad_fidelity(std::uint64_t seed = 4048,
                                                     int image_count = 50) {
  std::vector<CheckResult> checks;
  for (int radius : {1, 2}) {
    const LocalWindow window = LocalWindow::square(radius);
    const int m = window.size();
    double worst = 0.0;
    long long pairs_checked = 0;
    for (int i = 0; i < image_count; ++i) {
      const Image img = random_image(6, 6, mix_seed(seed, static_cast<std::uint64_t>(radius),
                                                    static_cast<std::uint64_t>(i)));
      const int d = img.pixels();
      const FeatureVector full = local_quadratic_full(img, window);
      const QuadFeature compact = local_quadratic_compact(img, window);
      const int zero_off = window.offset_index(0, 0);
      for (int p = 0; p < d; ++p) {
        const int pr = p / img.width, pc = p % img.width;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const int qr = pr + dy, qc = pc + dx;
            if (qr < 0 || qr >= img.height || qc < 0 || qc >= img.width) continue;
            const int q = qr * img.width + qc;
            const long long ci = compact_product_index(window, img.width, img.height, p, q);
            // oracle lookup: center p, offsets (0,0) and (dy,dx)
            const int b = window.offset_index(dy, dx);
            const long long fi =
                (static_cast<long long>(p) * m + zero_off) * m + b;
            worst = std::max(worst, std::abs(compact.values[ci] - full[fi]));
            ++pairs_checked;
          }
        }
      }
    }
    checks.push_back({"compact-feature fidelity radius " + std::to_string(radius),
                      worst <= 1e-15,
                      "max product deviation " + detail::format_double(worst) + " over " +
                          std::to_string(pairs_checked) + " pairs"});
  }
  return checks;
}

}  // namespace quadpix
