#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "quadpix/common.hpp"
#include "quadpix/image.hpp"
#include "quadpix/projection.hpp"

using namespace quadpix;

namespace {

Image make_random(int w, int h, std::uint64_t seed) {
  RandomStream rng(seed);
  Image img(w, h);
  for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
  return img;
}

// direct double-loop convolution, the spatial-domain oracle
Image conv_reference(const Image& x, const Kernel& k) {
  Image out(x.width, x.height);
  const int cy = k.height / 2, cx = k.width / 2;
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < k.height; ++kr)
        for (int kc = 0; kc < k.width; ++kc) {
          const int rr = r + kr - cy;
          const int cc = c + kc - cx;
          if (rr < 0 || rr >= x.height || cc < 0 || cc >= x.width) continue;
          acc += k.at(kr, kc) * x.at(rr, cc);
        }
      out.at(r, c) = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("conv2d_same identity kernel") {
  const Image img = make_random(7, 5, 11);
  const Image out = conv2d_same(img, make_identity_kernel());
  for (int i = 0; i < img.pixels(); ++i) REQUIRE(out.data[i] == img.data[i]);
}

TEST_CASE("conv2d_same impulse embeds the flipped kernel") {
  Image impulse(9, 9);
  impulse.at(4, 4) = 1.0;
  Kernel k(3, 3);
  for (int i = 0; i < 9; ++i) k.taps[static_cast<std::size_t>(i)] = i + 1;
  const Image out = conv2d_same(impulse, k);
  // position p+(dr,dc) holds the tap at center−(dr,dc): flipped embedding
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      REQUIRE(out.at(4 + dr, 4 + dc) == k.at(1 - dr, 1 - dc));
}

TEST_CASE("conv2d_same matches the double-loop oracle") {
  const Image img = make_random(8, 8, 23);
  Kernel k(3, 3);
  RandomStream rng(99);
  for (double& t : k.taps) t = rng.uniform(-1.0, 1.0);
  const Image a = conv2d_same(img, k);
  const Image b = conv_reference(img, k);
  for (int i = 0; i < img.pixels(); ++i) REQUIRE(std::abs(a.data[i] - b.data[i]) <= 1e-12);
}

TEST_CASE("conv2d_same is linear") {
  const Image x = make_random(10, 10, 3);
  const Image y = make_random(10, 10, 4);
  Kernel k(5, 3);
  RandomStream rng(5);
  for (double& t : k.taps) t = rng.uniform(-1.0, 1.0);
  Image sum(10, 10);
  for (int i = 0; i < sum.pixels(); ++i) sum.data[i] = x.data[i] + y.data[i];
  const Image conv_sum = conv2d_same(sum, k);
  const Image cx = conv2d_same(x, k);
  const Image cy = conv2d_same(y, k);
  for (int i = 0; i < sum.pixels(); ++i)
    REQUIRE(std::abs(conv_sum.data[i] - cx.data[i] - cy.data[i]) <= 1e-10);
}

TEST_CASE("conv2d_same rejects oversized kernels") {
  const Image img = make_random(3, 3, 1);
  REQUIRE_THROWS_AS(conv2d_same(img, Kernel(5, 5)), std::invalid_argument);
}

TEST_CASE("power_normalize two-value image") {
  Image img(1, 2);
  img.data = {1.0, 3.0};
  const Image out = power_normalize(img);
  REQUIRE(std::abs(out.data[0] + 1.0) <= 1e-15);
  REQUIRE(std::abs(out.data[1] - 1.0) <= 1e-15);
}

TEST_CASE("power_normalize flags constant images") {
  Image img(4, 4, 2.5);
  bool degenerate = false;
  const Image out = power_normalize(img, &degenerate);
  REQUIRE(degenerate);
  for (double v : out.data) REQUIRE(v == 0.0);
}

TEST_CASE("power_normalize statistics and idempotence") {
  const Image img = make_random(16, 16, 77);
  const Image out = power_normalize(img);
  double mean = 0.0, ms = 0.0;
  for (double v : out.data) mean += v;
  mean /= out.pixels();
  for (double v : out.data) ms += v * v;
  ms /= out.pixels();
  REQUIRE(std::abs(mean) < 1e-12);
  REQUIRE(std::abs(std::sqrt(ms) - 1.0) < 1e-12);

  const Image twice = power_normalize(out);
  for (int i = 0; i < out.pixels(); ++i)
    REQUIRE(std::abs(twice.data[i] - out.data[i]) <= 1e-12);
}

TEST_CASE("pool with unit stride and identity blur is a no-op") {
  const Image img = make_random(6, 6, 8);
  const Image out = pool(img, PoolingSpec{make_identity_kernel(), 1});
  REQUIRE(out.width == img.width);
  REQUIRE(out.height == img.height);
  for (int i = 0; i < img.pixels(); ++i) REQUIRE(out.data[i] == img.data[i]);
}

TEST_CASE("pool of constant image with even box blur tiles exactly") {
  // 2x2-equivalent box (3x3 kernel, zero last row/col), stride 2, offset 1:
  // every sampled window sits fully inside the image, so the unit-mass box
  // reproduces the constant
  const double value = 3.25;
  Image img(4, 4, value);
  const Image out = pool(img, PoolingSpec{make_box_blur(2), 2});
  REQUIRE(out.width == 2);
  REQUIRE(out.height == 2);
  for (double v : out.data) REQUIRE(std::abs(v - value) <= 1e-12);
}

TEST_CASE("pool equals the materialized selection-times-blur matrix") {
  const Image img = make_random(8, 8, 31);
  const PoolingSpec spec{make_box_blur(3), 2};
  const Image pooled = pool(img, spec);

  const SparseRowMatrix dp = pooling_matrix(spec, img.width, img.height);
  Eigen::VectorXd x(img.pixels());
  for (int i = 0; i < img.pixels(); ++i) x[i] = img.data[i];
  const Eigen::VectorXd by_matrix = dp * x;
  REQUIRE(by_matrix.size() == pooled.pixels());
  for (int i = 0; i < pooled.pixels(); ++i)
    REQUIRE(std::abs(pooled.data[i] - by_matrix[i]) <= 1e-12);
}

TEST_CASE("pool rejects oversized strides") {
  const Image img = make_random(4, 4, 2);
  REQUIRE_THROWS_AS(pool(img, PoolingSpec{make_identity_kernel(), 5}), std::invalid_argument);
}

TEST_CASE("convolution_matrix reproduces conv2d_same") {
  const Image img = make_random(7, 6, 13);
  Kernel k(3, 5);
  RandomStream rng(17);
  for (double& t : k.taps) t = rng.uniform(-1.0, 1.0);
  const Image direct = conv2d_same(img, k);
  const SparseRowMatrix g = convolution_matrix(k, img.width, img.height);
  Eigen::VectorXd x(img.pixels());
  for (int i = 0; i < img.pixels(); ++i) x[i] = img.data[i];
  const Eigen::VectorXd by_matrix = g * x;
  for (int i = 0; i < img.pixels(); ++i)
    REQUIRE(std::abs(direct.data[i] - by_matrix[i]) <= 1e-12);
}
