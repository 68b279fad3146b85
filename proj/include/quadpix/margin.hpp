// Margin-absorption checks: training in descriptor space Φ(x)=L(x⊗x) and
// carrying the weights back through Lᵀ must leave decision values unchanged,
// and with L=I the machine coincides with a unary-quadratic-kernel SVM.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadpix/image.hpp"
#include "quadpix/projection.hpp"
#include "quadpix/svm.hpp"

namespace quadpix {

struct ImageDataset {
  std::vector<Image> images;
  Eigen::VectorXi labels;
};

/// Reference kernel-dual SVM for small problems: coordinate ascent on the
/// precomputed kernel matrix, L1 hinge, no bias. Decision values are
/// Σ_j α_j y_j k(x_j, ·).
struct KernelSvm {
  Eigen::VectorXd alpha;
  Eigen::VectorXi labels;
};

inline KernelSvm kernel_dual_train(const Eigen::MatrixXd& gram, const Eigen::VectorXi& labels,
                                   double C, double tol, int max_epochs,
                                   std::uint64_t seed) {
  const Eigen::Index n = gram.rows();
  if (gram.cols() != n || labels.size() != n)
    throw std::invalid_argument("kernel_dual_train: dimension mismatch");
  KernelSvm svm;
  svm.alpha = Eigen::VectorXd::Zero(n);
  svm.labels = labels;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);  // f_i = Σ_j α_j y_j K_ij
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  RandomStream rng(seed);
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(static_cast<int>(i) + 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    double max_pg = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::Index i = order[static_cast<std::size_t>(s)];
      const double g = labels[i] * f[i] - 1.0;
      double pg = g;
      if (svm.alpha[i] <= 0.0)
        pg = std::min(g, 0.0);
      else if (svm.alpha[i] >= C)
        pg = std::max(g, 0.0);
      max_pg = std::max(max_pg, std::abs(pg));
      if (std::abs(pg) > 1e-12 && gram(i, i) > 0.0) {
        const double a_new = std::clamp(svm.alpha[i] - g / gram(i, i), 0.0, C);
        const double delta = a_new - svm.alpha[i];
        if (delta != 0.0) {
          svm.alpha[i] = a_new;
          f += delta * labels[i] * gram.col(i);
        }
      }
    }
    if (max_pg < tol) break;
  }
  return svm;
}

struct MarginReweightReport {
  // |vᵀΦ(x_i) − wᵀ(x_i⊗x_i)| with w = Lᵀv, maximum over the dataset
  double max_projection_deviation = 0.0;
  // identity-weighting run: |linear-on-(x⊗x) decision − kernel decision|
  double max_kernel_deviation = 0.0;
  bool ltl_possibly_rank_deficient = false;
  std::string note;
};

/// Kronecker self-product dot: wᵀ(x⊗x) without materializing x⊗x.
inline double kron_self_dot(const Eigen::VectorXd& w, const Image& image) {
  const int d = image.pixels();
  if (w.size() != static_cast<Eigen::Index>(d) * d)
    throw std::invalid_argument("kron_self_dot: dimension mismatch");
  double acc = 0.0;
  Eigen::Index idx = 0;
  for (int p = 0; p < d; ++p) {
    const double xp = image.data[static_cast<std::size_t>(p)];
    for (int q = 0; q < d; ++q, ++idx) acc += w[idx] * xp * image.data[static_cast<std::size_t>(q)];
  }
  return acc;
}

/// Runs both halves of the margin-absorption story on a toy image set:
/// (a) train v on Φ(x)=L(x⊗x), set w = Lᵀv, compare decision values along
/// both routes; (b) with identity weighting, train directly on (x⊗x) and
/// compare against a unary-quadratic-kernel machine k(a,b) = (aᵀb)².
/// (LᵀL)⁻¹ is never formed; with a wide L the check notes that it operates on
/// decision-value equality, which is always well defined.
inline MarginReweightReport margin_reweighting_check(const ProjectionMatrix& proj,
                                                     const ImageDataset& data, double C) {
  if (data.images.empty() || data.labels.size() != static_cast<Eigen::Index>(data.images.size()))
    throw std::invalid_argument("margin_reweighting_check: bad dataset");
  const int d = proj.pixel_count();
  for (const Image& img : data.images)
    if (img.pixels() != d)
      throw std::invalid_argument("margin_reweighting_check: image dims do not match L");

  MarginReweightReport report;
  const Eigen::Index n = static_cast<Eigen::Index>(data.images.size());

  // (a) projection route
  {
    RowMatrixXd feats(n, proj.matrix.rows());
    for (Eigen::Index i = 0; i < n; ++i)
      feats.row(i) = apply_projection(proj, data.images[static_cast<std::size_t>(i)])
                         .values.transpose();
    Dataset ds{feats, data.labels, {}};
    const SvmModel model = dcd_train(ds, C, 1e-10, 4000, 7, /*add_bias=*/false);
    const Eigen::VectorXd v = model.w;
    const Eigen::VectorXd w = proj.matrix.transpose() * v;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double via_phi = feats.row(i).dot(v);
      const double via_kron = kron_self_dot(w, data.images[static_cast<std::size_t>(i)]);
      report.max_projection_deviation =
          std::max(report.max_projection_deviation, std::abs(via_phi - via_kron));
    }
    if (proj.matrix.rows() < proj.matrix.cols()) report.ltl_possibly_rank_deficient = true;
  }

  // (b) identity weighting vs explicit unary quadratic kernel
  {
    RowMatrixXd kron(n, static_cast<Eigen::Index>(d) * d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Image& img = data.images[static_cast<std::size_t>(i)];
      Eigen::Index idx = 0;
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q, ++idx)
          kron(i, idx) = img.data[static_cast<std::size_t>(p)] *
                         img.data[static_cast<std::size_t>(q)];
    }
    Dataset ds{kron, data.labels, {}};
    const SvmModel linear = dcd_train(ds, C, 1e-10, 4000, 11, /*add_bias=*/false);
    const Eigen::VectorXd linear_decisions = predict(linear, kron);

    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& xi = data.images[static_cast<std::size_t>(i)].data;
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto& xj = data.images[static_cast<std::size_t>(j)].data;
        double dot = 0.0;
        for (int p = 0; p < d; ++p) dot += xi[static_cast<std::size_t>(p)] * xj[static_cast<std::size_t>(p)];
        gram(i, j) = dot * dot;
      }
    }
    const KernelSvm ref = kernel_dual_train(gram, data.labels, C, 1e-10, 4000, 13);
    for (Eigen::Index i = 0; i < n; ++i) {
      double f = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) f += ref.alpha[j] * data.labels[j] * gram(i, j);
      report.max_kernel_deviation =
          std::max(report.max_kernel_deviation, std::abs(linear_decisions[i] - f));
    }
  }

  report.note = report.ltl_possibly_rank_deficient
                    ? "LtL rank-deficient or untested; check operates on decision-value "
                      "equality only (no inverse is formed)"
                    : "check operates on decision-value equality (no inverse is formed)";
  return report;
}

}  // namespace quadpix
