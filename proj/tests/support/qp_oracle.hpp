// Test-side reference solver for the SVM dual box QP:
//   min ½αᵀQα − mᵀα  s.t. 0 ≤ α ≤ C,
// solved with FISTA projected gradient until the primal-dual gap certifies
// optimality. Independent of the coordinate-descent path under test.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace qp_oracle {

struct Certified {
  Eigen::VectorXd alpha;
  double dual_objective = 0.0;    // maximization form: mᵀα − ½αᵀQα
  double primal_objective = 0.0;  // ½‖w‖² + C·Σ hinge, from w(α)
  double gap = 0.0;
};

/// Solve the dual and certify with the duality gap. `features` rows are the
/// (already bias-augmented, if any) examples; margins default to 1.
inline Certified solve_svm_reference(const Eigen::MatrixXd& features,
                                     const Eigen::VectorXi& labels, double C,
                                     double gap_tol = 1e-9, int max_iters = 2000000) {
  const Eigen::Index n = features.rows();
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      q(i, j) = labels[i] * labels[j] * features.row(i).dot(features.row(j));

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
  const double lip = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lip;

  auto project = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], 0.0, C);
    return v;
  };
  auto dual_value = [&](const Eigen::VectorXd& a) {
    return ones.dot(a) - 0.5 * a.dot(q * a);
  };
  auto primal_value = [&](const Eigen::VectorXd& a) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(features.cols());
    for (Eigen::Index i = 0; i < n; ++i) w += a[i] * labels[i] * features.row(i).transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      loss += std::max(0.0, 1.0 - labels[i] * features.row(i).dot(w));
    return 0.5 * w.squaredNorm() + C * loss;
  };

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y_acc = alpha;
  double t_acc = 1.0;
  Certified out;
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd grad = q * y_acc - ones;
    const Eigen::VectorXd alpha_next = project(y_acc - step * grad);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    y_acc = alpha_next + ((t_acc - 1.0) / t_next) * (alpha_next - alpha);
    alpha = alpha_next;
    t_acc = t_next;
    if (it % 200 == 199 || it + 1 == max_iters) {
      const double d = dual_value(alpha);
      const double p = primal_value(alpha);
      if (p - d <= gap_tol * (1.0 + std::abs(p))) {
        out.alpha = alpha;
        out.dual_objective = d;
        out.primal_objective = p;
        out.gap = p - d;
        return out;
      }
    }
  }
  throw std::runtime_error("qp_oracle: failed to certify optimality within iteration budget");
}

}  // namespace qp_oracle
