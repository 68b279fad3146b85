// The HOG reformulation: descriptor as an explicit sparse linear operator L
// acting on the Kronecker self-product x⊗x, assembled per filter from the
// pooled products of convolution-matrix rows.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpix/filter_bank.hpp"
#include "quadpix/hog.hpp"
#include "quadpix/image.hpp"

namespace quadpix {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Explicit-L construction is capped: column count grows as D².
inline constexpr int kProjectionPixelCap = 400;

/// Sparse operator with Φ(x) = L·(x⊗x). Row layout matches hog_conv:
/// filter-major, then pooled cells row-major. Column p·D+q carries the
/// coefficient of the pixel product x_p·x_q.
struct ProjectionMatrix {
  SparseRowMatrix matrix;
  int image_width = 0;
  int image_height = 0;
  int filters = 0;
  int cells_w = 0;
  int cells_h = 0;

  int pixel_count() const { return image_width * image_height; }
};

/// Matrix form of conv2d_same: row p of the result reproduces output pixel p
/// from the vectorized input, including the zero-padding boundary behavior.
inline SparseRowMatrix convolution_matrix(const Kernel& kernel, int width, int height) {
  if (kernel.width > width || kernel.height > height)
    throw std::invalid_argument("convolution_matrix: kernel larger than image");
  const int cy = kernel.height / 2;
  const int cx = kernel.width / 2;
  const int d = width * height;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(d) * kernel.taps.size());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const int row = r * width + c;
      for (int kr = 0; kr < kernel.height; ++kr) {
        const int rr = r + kr - cy;
        if (rr < 0 || rr >= height) continue;
        for (int kc = 0; kc < kernel.width; ++kc) {
          const int cc = c + kc - cx;
          if (cc < 0 || cc >= width) continue;
          const double tap = kernel.at(kr, kc);
          if (tap == 0.0) continue;
          triplets.emplace_back(row, rr * width + cc, tap);
        }
      }
    }
  }
  SparseRowMatrix m(d, d);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Vectorized-pixel indices picked by the pooling downsampler, in output order.
inline std::vector<int> downsample_indices(int width, int height, int stride) {
  const int offset = stride / 2;
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(pooled_extent(height, stride)) *
              pooled_extent(width, stride));
  for (int r = offset; r < height; r += stride)
    for (int c = offset; c < width; c += stride) idx.push_back(r * width + c);
  return idx;
}

/// Matrix form of pool(): selection of blurred rows.
inline SparseRowMatrix pooling_matrix(const PoolingSpec& spec, int width, int height) {
  const SparseRowMatrix blur = convolution_matrix(spec.blur, width, height);
  const std::vector<int> picks = downsample_indices(width, height, spec.stride);
  SparseRowMatrix out(static_cast<int>(picks.size()), width * height);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int r = 0; r < static_cast<int>(picks.size()); ++r)
    for (SparseRowMatrix::InnerIterator it(blur, picks[r]); it; ++it)
      triplets.emplace_back(r, static_cast<int>(it.col()), it.value());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

/// Build L so apply_projection(L, x) == hog_conv(x, bank, pooling) for every
/// image of the given dimensions. Rows are assembled directly from products
/// of convolution-matrix row pairs; the D²×D² Kronecker factor (G⊗G) and the
/// diagonal selection M are never materialized.
inline ProjectionMatrix build_projection(const FilterBank& bank, const PoolingSpec& pooling,
                                         int image_width, int image_height) {
  const int d = image_width * image_height;
  if (d > kProjectionPixelCap) {
    std::ostringstream msg;
    msg << "build_projection: " << image_width << "x" << image_height << " has D=" << d
        << " pixels; explicit L needs D^2=" << static_cast<long long>(d) * d
        << " columns which exceeds the cap (D <= " << kProjectionPixelCap
        << "). Use the convolutional path for larger images.";
    throw std::invalid_argument(msg.str());
  }
  if (bank.size() == 0) throw std::invalid_argument("build_projection: empty filter bank");

  ProjectionMatrix proj;
  proj.image_width = image_width;
  proj.image_height = image_height;
  proj.filters = bank.size();
  proj.cells_w = pooled_extent(image_width, pooling.stride);
  proj.cells_h = pooled_extent(image_height, pooling.stride);
  const int cells = proj.cells_w * proj.cells_h;
  const SparseRowMatrix pool_mat = pooling_matrix(pooling, image_width, image_height);

  const long long cols = static_cast<long long>(d) * d;
  SparseRowMatrix L(proj.filters * cells, static_cast<int>(cols));

  // dense per-row accumulator with a touched-column list, swept into triplets
  std::vector<double> acc(static_cast<std::size_t>(cols), 0.0);
  std::vector<long long> touched;
  std::vector<Eigen::Triplet<double>> triplets;

  for (int f = 0; f < proj.filters; ++f) {
    const SparseRowMatrix conv_mat = convolution_matrix(bank.filters[f], image_width, image_height);
    for (int cell = 0; cell < cells; ++cell) {
      const int row = f * cells + cell;
      touched.clear();
      for (SparseRowMatrix::InnerIterator pool_it(pool_mat, cell); pool_it; ++pool_it) {
        const int i = static_cast<int>(pool_it.col());
        const double pool_w = pool_it.value();
        for (SparseRowMatrix::InnerIterator pit(conv_mat, i); pit; ++pit) {
          const long long p_base = static_cast<long long>(pit.col()) * d;
          const double gp = pool_w * pit.value();
          for (SparseRowMatrix::InnerIterator qit(conv_mat, i); qit; ++qit) {
            const long long col = p_base + qit.col();
            if (acc[col] == 0.0) touched.push_back(col);
            acc[col] += gp * qit.value();
          }
        }
      }
      for (long long col : touched) {
        if (acc[col] != 0.0)
          triplets.emplace_back(row, static_cast<int>(col), acc[col]);
        acc[col] = 0.0;
      }
    }
  }
  L.setFromTriplets(triplets.begin(), triplets.end());
  proj.matrix = std::move(L);
  return proj;
}

/// Φ(x) = L·(x⊗x), evaluated nonzero-by-nonzero; the dense D² product vector
/// is never formed.
inline HogDescriptor apply_projection(const ProjectionMatrix& proj, const Image& image) {
  const int d = image.pixels();
  if (d != proj.pixel_count())
    throw std::invalid_argument("apply_projection: image dimensions do not match L");
  HogDescriptor desc;
  desc.filters = proj.filters;
  desc.cells_w = proj.cells_w;
  desc.cells_h = proj.cells_h;
  desc.values = FeatureVector::Zero(proj.matrix.rows());
  const double* x = image.data.data();
  for (int row = 0; row < proj.matrix.rows(); ++row) {
    double acc = 0.0;
    for (SparseRowMatrix::InnerIterator it(proj.matrix, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      const int p = col / d;
      const int q = col % d;
      acc += it.value() * x[p] * x[q];
    }
    desc.values[row] = acc;
  }
  return desc;
}

/// Triplet text export: header "rows cols nnz", then one "row col value" line
/// per nonzero in row-major order.
inline void export_projection(const ProjectionMatrix& proj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_projection: cannot open " + path);
  out << proj.matrix.rows() << " " << proj.matrix.cols() << " " << proj.matrix.nonZeros()
      << "\n";
  char buf[64];
  for (int row = 0; row < proj.matrix.rows(); ++row) {
    for (SparseRowMatrix::InnerIterator it(proj.matrix, row); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %lld %.17g\n", row,
                    static_cast<long long>(it.col()), it.value());
      out << buf;
    }
  }
}

/// Inverse of export_projection (layout metadata is not part of the format).
inline SparseRowMatrix import_projection_triplets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_projection_triplets: cannot open " + path);
  long long rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz))
    throw std::runtime_error("import_projection_triplets: bad header in " + path);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long long i = 0; i < nnz; ++i) {
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v))
      throw std::runtime_error("import_projection_triplets: truncated triplets in " + path);
    triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  }
  SparseRowMatrix m(static_cast<int>(rows), static_cast<int>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace quadpix
