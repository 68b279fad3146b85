// Linear L1-hinge SVM trained by dual coordinate descent.
//
// The solver follows the standard DCD scheme (single-coordinate closed-form
// clipped steps over shuffled examples) without shrinking, so runs are
// deterministic in the seed. It works through a RowSource so the same code
// path trains from memory, from the binary feature container, or from rows
// materialized on demand.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadpix/common.hpp"

namespace quadpix {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Training data held in memory; rows are examples, labels in {−1,+1}.
struct Dataset {
  RowMatrixXd features;
  Eigen::VectorXi labels;
  std::vector<std::string> tags;  // optional row provenance

  void validate() const {
    if (features.rows() != labels.size())
      throw std::invalid_argument("Dataset: feature/label row mismatch");
    if (features.rows() < 2) throw std::invalid_argument("Dataset: need at least 2 examples");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      if (labels[i] == 1)
        pos = true;
      else if (labels[i] == -1)
        neg = true;
      else
        throw std::invalid_argument("Dataset: labels must be +1 or -1");
    }
    if (!pos || !neg) throw std::invalid_argument("Dataset: training needs both classes");
    if (!features.allFinite())
      throw std::invalid_argument("Dataset: features must be finite");
  }
};

struct SvmModel {
  Eigen::VectorXd w;  // includes the augmented bias coordinate when trained with one
  double C = 1.0;
  double tol = 1e-4;
  int iterations_run = 0;   // epochs
  double objective = 0.0;   // primal value at termination
};

struct DcdOptions {
  double C = 1.0;
  double tol = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 0;
  bool add_bias = true;  // augment each example with a constant coordinate 1
};

/// Row access abstraction; the returned pointer stays valid until the next
/// row() call on the same source. Implementations are single-consumer.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual const double* row(Eigen::Index i) = 0;
};

class DenseRowSource final : public RowSource {
 public:
  explicit DenseRowSource(const RowMatrixXd& m) : m_(m) {}
  Eigen::Index rows() const override { return m_.rows(); }
  Eigen::Index cols() const override { return m_.cols(); }
  const double* row(Eigen::Index i) override { return m_.data() + i * m_.cols(); }

 private:
  const RowMatrixXd& m_;
};

struct DcdResult {
  SvmModel model;
  Eigen::VectorXd alpha;
  std::vector<double> dual_objective;  // per epoch, maximization form
  std::vector<double> max_violation;   // per epoch
  bool converged = false;
};

namespace detail {

inline double dot_row(const double* x, const Eigen::VectorXd& w, Eigen::Index d,
                      bool add_bias) {
  double acc = 0.0;
  const double* wp = w.data();
  for (Eigen::Index j = 0; j < d; ++j) acc += wp[j] * x[j];
  if (add_bias) acc += wp[d];
  return acc;
}

inline void axpy_row(double coeff, const double* x, Eigen::VectorXd& w, Eigen::Index d,
                     bool add_bias) {
  double* wp = w.data();
  for (Eigen::Index j = 0; j < d; ++j) wp[j] += coeff * x[j];
  if (add_bias) wp[d] += coeff;
}

}  // namespace detail

/// Primal objective ½‖w‖² + C·Σ max(0, m_i − y_i·wᵀx̃_i).
inline double primal_objective(const Eigen::VectorXd& w, RowSource& rows,
                               const Eigen::VectorXi& labels, double C, bool add_bias,
                               const Eigen::VectorXd* margins = nullptr) {
  const Eigen::Index d = rows.cols();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double m = margins ? (*margins)[i] : 1.0;
    const double slack = m - labels[i] * detail::dot_row(rows.row(i), w, d, add_bias);
    if (slack > 0.0) loss += slack;
  }
  return 0.5 * w.squaredNorm() + C * loss;
}

/// Generalized DCD core: solves
///   min_w ½‖w‖² + C·Σ_i max(0, m_i − y_i·wᵀx̃_i)
/// with per-example margins m_i (all 1 for a plain SVM). Stops when the
/// largest projected-gradient violation seen in an epoch drops below tol.
inline DcdResult dcd_solve(RowSource& rows, const Eigen::VectorXi& labels,
                           const DcdOptions& opt, const Eigen::VectorXd* margins = nullptr) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (labels.size() != n) throw std::invalid_argument("dcd_solve: label count mismatch");
  if (opt.C <= 0.0) throw std::invalid_argument("dcd_solve: C must be positive");
  if (opt.tol <= 0.0) throw std::invalid_argument("dcd_solve: tol must be positive");
  if (margins && margins->size() != n)
    throw std::invalid_argument("dcd_solve: margin count mismatch");

  DcdResult res;
  res.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + (opt.add_bias ? 1 : 0));

  Eigen::VectorXd qdiag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* x = rows.row(i);
    double q = opt.add_bias ? 1.0 : 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!std::isfinite(x[j])) throw std::invalid_argument("dcd_solve: non-finite feature");
      q += x[j] * x[j];
    }
    qdiag[i] = q;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  RandomStream rng(opt.seed);

  double margin_dot_alpha = 0.0;  // Σ m_i α_i, maintained incrementally
  int epoch = 0;
  for (; epoch < opt.max_epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(static_cast<int>(i) + 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    double max_pg = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
      const Eigen::Index i = order[static_cast<std::size_t>(s)];
      const double* x = rows.row(i);
      const double yi = labels[i];
      const double mi = margins ? (*margins)[i] : 1.0;
      const double g = yi * detail::dot_row(x, w, d, opt.add_bias) - mi;

      double pg = g;
      const double a = res.alpha[i];
      if (a <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (a >= opt.C) {
        pg = std::max(g, 0.0);
      }
      max_pg = std::max(max_pg, std::abs(pg));
      if (std::abs(pg) > 1e-12) {
        double a_new;
        if (qdiag[i] > 0.0) {
          a_new = std::clamp(a - g / qdiag[i], 0.0, opt.C);
        } else {
          a_new = g < 0.0 ? opt.C : 0.0;  // zero row: step direction decides the bound
        }
        const double delta = a_new - a;
        if (delta != 0.0) {
          res.alpha[i] = a_new;
          margin_dot_alpha += mi * delta;
          detail::axpy_row(delta * yi, x, w, d, opt.add_bias);
        }
      }
    }
    res.max_violation.push_back(max_pg);
    res.dual_objective.push_back(margin_dot_alpha - 0.5 * w.squaredNorm());
    if (max_pg < opt.tol) {
      ++epoch;
      res.converged = true;
      break;
    }
  }

  res.model.w = std::move(w);
  res.model.C = opt.C;
  res.model.tol = opt.tol;
  res.model.iterations_run = epoch;
  res.model.objective =
      primal_objective(res.model.w, rows, labels, opt.C, opt.add_bias, margins);
  return res;
}

inline DcdResult dcd_train_detailed(const Dataset& data, const DcdOptions& opt) {
  data.validate();
  DenseRowSource rows(data.features);
  return dcd_solve(rows, data.labels, opt);
}

/// Plain SVM training entry point.
inline SvmModel dcd_train(const Dataset& data, double C, double tol, int max_epochs,
                          std::uint64_t seed, bool add_bias = true) {
  DcdOptions opt;
  opt.C = C;
  opt.tol = tol;
  opt.max_epochs = max_epochs;
  opt.seed = seed;
  opt.add_bias = add_bias;
  return dcd_train_detailed(data, opt).model;
}

/// Decision values w·x̃ per row. A model whose dimension exceeds the feature
/// count by one applies its trailing coordinate as the bias.
inline Eigen::VectorXd predict(const SvmModel& model, const RowMatrixXd& features) {
  if (features.cols() == model.w.size()) return features * model.w;
  if (features.cols() + 1 == model.w.size())
    return (features * model.w.head(features.cols())).array() + model.w[model.w.size() - 1];
  throw std::invalid_argument("predict: feature dimension does not match model");
}

inline double accuracy(const Eigen::VectorXd& decisions, const Eigen::VectorXi& labels) {
  if (decisions.size() != labels.size())
    throw std::invalid_argument("accuracy: size mismatch");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < decisions.size(); ++i)
    if ((decisions[i] >= 0.0 ? 1 : -1) == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(decisions.size());
}

// --- model persistence (versioned binary: magic, version, d, C, tol, w, objective)

namespace detail {
inline constexpr char kModelMagic[8] = {'Q', 'P', 'X', 'S', 'V', 'M', 0, 0};
inline constexpr std::uint32_t kModelVersion = 1;
}  // namespace detail

inline void save_model(const SvmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(detail::kModelMagic, 8);
  const std::uint32_t version = detail::kModelVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  const std::uint64_t d = static_cast<std::uint64_t>(model.w.size());
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(&model.C), sizeof model.C);
  out.write(reinterpret_cast<const char*>(&model.tol), sizeof model.tol);
  out.write(reinterpret_cast<const char*>(model.w.data()),
            static_cast<std::streamsize>(d * sizeof(double)));
  out.write(reinterpret_cast<const char*>(&model.objective), sizeof model.objective);
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

inline SvmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kModelMagic, 8) != 0)
    throw std::runtime_error("load_model: bad magic in " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != detail::kModelVersion)
    throw std::runtime_error("load_model: unsupported version in " + path);
  std::uint64_t d = 0;
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  SvmModel model;
  in.read(reinterpret_cast<char*>(&model.C), sizeof model.C);
  in.read(reinterpret_cast<char*>(&model.tol), sizeof model.tol);
  model.w.resize(static_cast<Eigen::Index>(d));
  in.read(reinterpret_cast<char*>(model.w.data()),
          static_cast<std::streamsize>(d * sizeof(double)));
  in.read(reinterpret_cast<char*>(&model.objective), sizeof model.objective);
  if (!in) throw std::runtime_error("load_model: truncated file " + path);
  return model;
}

}  // namespace quadpix
