// Procedural labeled image families for the desk-scale experiments: six
// parametric texture/shape classes for the alignment sweep (identity =
// parameter draw within its class), and textured-silhouette positives vs
// background patches for the detection-style run.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "quadpix/common.hpp"
#include "quadpix/image.hpp"
#include "quadpix/synth.hpp"

namespace quadpix {

inline constexpr int kSweepClassCount = 6;

namespace detail {

inline double soft_step(double signed_dist, double softness) {
  return 0.5 * (1.0 + std::tanh(signed_dist / softness));
}

// smooth ring
inline Image render_ring(int n, RandomStream& rng) {
  Image img(n, n);
  const double cx = 0.5 * n + rng.uniform(-2.0, 2.0);
  const double cy = 0.5 * n + rng.uniform(-2.0, 2.0);
  const double radius = rng.uniform(0.26, 0.36) * n;
  const double width = rng.uniform(0.05, 0.09) * n;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double d = std::hypot(c - cx, r - cy) - radius;
      img.at(r, c) = std::exp(-(d * d) / (2.0 * width * width));
    }
  return img;
}

// soft-edged plus sign, slightly rotated
inline Image render_cross(int n, RandomStream& rng) {
  Image img(n, n);
  const double cx = 0.5 * n + rng.uniform(-2.0, 2.0);
  const double cy = 0.5 * n + rng.uniform(-2.0, 2.0);
  const double angle = rng.uniform(-0.26, 0.26);
  const double bar = rng.uniform(0.05, 0.09) * n;
  const double arm = rng.uniform(0.3, 0.42) * n;
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double soft = 1.2;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double x = (c - cx) * ca + (r - cy) * sa;
      const double y = -(c - cx) * sa + (r - cy) * ca;
      const double across = soft_step(bar - std::abs(y), soft) * soft_step(arm - std::abs(x), soft);
      const double down = soft_step(bar - std::abs(x), soft) * soft_step(arm - std::abs(y), soft);
      img.at(r, c) = std::max(across, down);
    }
  return img;
}

inline Image render_grating(int n, RandomStream& rng, double base_angle) {
  Image img(n, n);
  const double angle = base_angle + rng.uniform(-0.14, 0.14);
  const double freq = rng.uniform(2.0, 3.2) * 2.0 * M_PI / n;
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) img.at(r, c) = std::sin(freq * (c * ca + r * sa) + phase);
  return img;
}

// three Gaussian blobs on a jittered triangle
inline Image render_blobs(int n, RandomStream& rng) {
  Image img(n, n);
  const double cx = 0.5 * n, cy = 0.5 * n;
  const double ring = rng.uniform(0.24, 0.32) * n;
  const double rot = rng.uniform(0.0, 2.0 * M_PI);
  const double sigma = rng.uniform(0.06, 0.09) * n;
  for (int k = 0; k < 3; ++k) {
    const double a = rot + k * 2.0 * M_PI / 3.0 + rng.uniform(-0.12, 0.12);
    const double bx = cx + ring * std::cos(a);
    const double by = cy + ring * std::sin(a);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const double d2 = (c - bx) * (c - bx) + (r - by) * (r - by);
        img.at(r, c) += std::exp(-d2 / (2.0 * sigma * sigma));
      }
  }
  return img;
}

inline Image render_checker(int n, RandomStream& rng) {
  Image img(n, n);
  const double period = rng.uniform(0.2, 0.3) * n;
  const double angle = rng.uniform(-0.1, 0.1);
  const double px = rng.uniform(0.0, period);
  const double py = rng.uniform(0.0, period);
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double k = 2.0 * M_PI / period;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double x = (c * ca + r * sa) + px;
      const double y = (-c * sa + r * ca) + py;
      img.at(r, c) = std::tanh(2.2 * std::sin(k * x)) * std::tanh(2.2 * std::sin(k * y));
    }
  return img;
}

}  // namespace detail

/// One identity of one sweep class, power-normalized. Identity variation is
/// per-draw parameter jitter inside the class family.
inline Image render_sweep_identity(int cls, int patch_size, std::uint64_t seed) {
  if (cls < 0 || cls >= kSweepClassCount)
    throw std::invalid_argument("render_sweep_identity: class out of range");
  RandomStream rng(seed);
  Image img;
  switch (cls) {
    case 0: img = detail::render_ring(patch_size, rng); break;
    case 1: img = detail::render_cross(patch_size, rng); break;
    case 2: img = detail::render_grating(patch_size, rng, 0.0); break;
    case 3: img = detail::render_grating(patch_size, rng, M_PI / 4.0); break;
    case 4: img = detail::render_blobs(patch_size, rng); break;
    default: img = detail::render_checker(patch_size, rng); break;
  }
  return power_normalize(img);
}

// ---------------------------------------------------------------------------
// detection-style positives and negatives

/// Background texture patch (negative class): a structured sample.
inline Image render_detect_negative(int patch_size, std::uint64_t seed) {
  return sample_structured(patch_size, seed);
}

/// Textured silhouette over background (positive class): head disc + body
/// ellipse with jittered pose, random contrast polarity, interior texture.
inline Image render_detect_positive(int patch_size, std::uint64_t seed) {
  const int n = patch_size;
  RandomStream rng(mix_seed(seed, 0xBEEF));
  const Image background = sample_structured(n, mix_seed(seed, 1));
  const Image interior = sample_structured(n, mix_seed(seed, 2));

  const double cx = 0.5 * n + rng.uniform(-1.5, 1.5);
  const double body_cy = 0.62 * n + rng.uniform(-1.5, 1.5);
  const double body_a = rng.uniform(0.13, 0.18) * n;  // semi-axis across
  const double body_b = rng.uniform(0.26, 0.33) * n;  // semi-axis down
  const double head_cy = body_cy - body_b - rng.uniform(0.02, 0.05) * n;
  const double head_r = rng.uniform(0.08, 0.11) * n;
  const double polarity = rng.bernoulli() ? 1.0 : -1.0;
  const double strength = polarity * rng.uniform(1.2, 1.8);
  const double soft = 1.0;

  Image img(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double bx = (c - cx) / body_a;
      const double by = (r - body_cy) / body_b;
      const double body_dist = (1.0 - std::hypot(bx, by)) * std::min(body_a, body_b);
      const double head_dist = head_r - std::hypot(c - cx, r - head_cy);
      const double mask = std::max(detail::soft_step(body_dist, soft),
                                   detail::soft_step(head_dist, soft));
      img.at(r, c) = 0.55 * background.at(r, c) + mask * (strength + 0.45 * interior.at(r, c));
    }
  }
  return power_normalize(img);
}

}  // namespace quadpix
