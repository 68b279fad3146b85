// Sharded consensus SVM training: global-consensus splitting with per-shard
// DCD subproblems (proximal hinge fits) and an averaging z-update.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <future>
#include <stdexcept>
#include <vector>

#include "quadpix/common.hpp"
#include "quadpix/svm.hpp"

namespace quadpix {

struct ShardPlan {
  int shard_count = 1;
  std::vector<int> assignment;  // example index -> shard
  double rho = 1.0;
  int max_rounds = 50;

  void validate(Eigen::Index n_examples) const {
    if (shard_count < 1) throw std::invalid_argument("ShardPlan: shard_count >= 1");
    if (static_cast<Eigen::Index>(assignment.size()) != n_examples)
      throw std::invalid_argument("ShardPlan: assignment size mismatch");
    if (rho <= 0.0) throw std::invalid_argument("ShardPlan: rho must be positive");
    if (max_rounds < 1) throw std::invalid_argument("ShardPlan: max_rounds >= 1");
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(shard_count), 0);
    for (int s : assignment) {
      if (s < 0 || s >= shard_count)
        throw std::invalid_argument("ShardPlan: assignment out of range");
      ++counts[static_cast<std::size_t>(s)];
    }
    for (Eigen::Index c : counts)
      if (c == 0) throw std::invalid_argument("ShardPlan: empty shard");
  }
};

inline ShardPlan round_robin_plan(Eigen::Index n, int shards, double rho = 1.0,
                                  int max_rounds = 50) {
  ShardPlan plan;
  plan.shard_count = shards;
  plan.rho = rho;
  plan.max_rounds = max_rounds;
  plan.assignment.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    plan.assignment[static_cast<std::size_t>(i)] = static_cast<int>(i % shards);
  return plan;
}

struct ConsensusResult {
  SvmModel model;                        // w = consensus variable z
  std::vector<double> primal_residual;   // per round, ‖w_k − z‖ stacked over shards
  std::vector<double> dual_residual;     // per round, ρ·√K·‖z − z_prev‖
  std::vector<double> max_shard_residual;  // per round, max_k ‖w_k − z‖
  int rounds = 0;
  bool converged = false;
};

/// Consensus training. Each round every shard solves its proximal SVM
/// subproblem (reduced to a margin-generalized DCD solve), then the consensus
/// z and scaled duals u_k are updated; stops when both residual norms drop
/// below tol. shard_count == 1 degenerates to a direct dcd_train call.
inline ConsensusResult consensus_train_detailed(const Dataset& data, const ShardPlan& plan,
                                                double C, double tol,
                                                const DcdOptions& sub_opt = {}) {
  data.validate();
  plan.validate(data.features.rows());
  if (C <= 0.0) throw std::invalid_argument("consensus_train: C must be positive");
  if (tol <= 0.0) throw std::invalid_argument("consensus_train: tol must be positive");

  ConsensusResult res;
  if (plan.shard_count == 1) {
    DcdOptions opt = sub_opt;
    opt.C = C;
    opt.tol = tol;
    res.model = dcd_train_detailed(data, opt).model;
    res.rounds = 1;
    res.converged = true;
    return res;
  }

  const Eigen::Index n = data.features.rows();
  const Eigen::Index d = data.features.cols();
  const Eigen::Index d_aug = d + 1;  // consensus runs in the augmented (bias) space
  const int k_shards = plan.shard_count;
  const double rho = plan.rho;
  const double inv_sqrt_rho = 1.0 / std::sqrt(rho);

  // Per-shard feature matrices, pre-augmented and pre-scaled by 1/√ρ so each
  // subproblem is a unit-quadratic DCD solve with per-example margins.
  std::vector<RowMatrixXd> shard_features(static_cast<std::size_t>(k_shards));
  std::vector<Eigen::VectorXi> shard_labels(static_cast<std::size_t>(k_shards));
  std::vector<std::vector<Eigen::Index>> shard_rows(static_cast<std::size_t>(k_shards));
  for (Eigen::Index i = 0; i < n; ++i)
    shard_rows[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(i)])]
        .push_back(i);
  for (int k = 0; k < k_shards; ++k) {
    const auto& rows = shard_rows[static_cast<std::size_t>(k)];
    RowMatrixXd m(static_cast<Eigen::Index>(rows.size()), d_aug);
    Eigen::VectorXi lab(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      m.row(static_cast<Eigen::Index>(r)).head(d) =
          data.features.row(rows[r]) * inv_sqrt_rho;
      m(static_cast<Eigen::Index>(r), d) = inv_sqrt_rho;
      lab[static_cast<Eigen::Index>(r)] = data.labels[rows[r]];
    }
    shard_features[static_cast<std::size_t>(k)] = std::move(m);
    shard_labels[static_cast<std::size_t>(k)] = std::move(lab);
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(d_aug);
  std::vector<Eigen::VectorXd> w_k(static_cast<std::size_t>(k_shards),
                                   Eigen::VectorXd::Zero(d_aug));
  std::vector<Eigen::VectorXd> u_k(static_cast<std::size_t>(k_shards),
                                   Eigen::VectorXd::Zero(d_aug));

  auto solve_shard = [&](int k, int round) {
    const auto& feats = shard_features[static_cast<std::size_t>(k)];
    const Eigen::VectorXi& labels = shard_labels[static_cast<std::size_t>(k)];
    const Eigen::VectorXd v = z - u_k[static_cast<std::size_t>(k)];
    // margins m_i = 1 − y_i·vᵀx̃_i; note x̃ here is unscaled, i.e. √ρ·feats
    Eigen::VectorXd margins(feats.rows());
    for (Eigen::Index i = 0; i < feats.rows(); ++i) {
      const double vx = feats.row(i).dot(v) / inv_sqrt_rho;
      margins[i] = 1.0 - labels[i] * vx;
    }
    DcdOptions opt = sub_opt;
    opt.C = C;
    opt.add_bias = false;  // already augmented
    if (opt.tol <= 0.0) opt.tol = tol;
    opt.seed = mix_seed(sub_opt.seed, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(round));
    DenseRowSource src(feats);
    DcdResult sub = dcd_solve(src, labels, opt, &margins);
    w_k[static_cast<std::size_t>(k)] = v + inv_sqrt_rho * sub.model.w;
  };

  int round = 0;
  for (; round < plan.max_rounds; ++round) {
    std::vector<std::future<void>> jobs;
    jobs.reserve(static_cast<std::size_t>(k_shards));
    for (int k = 0; k < k_shards; ++k)
      jobs.push_back(std::async(std::launch::async, solve_shard, k, round));
    for (auto& j : jobs) j.get();

    const Eigen::VectorXd z_prev = z;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d_aug);
    for (int k = 0; k < k_shards; ++k)
      sum += w_k[static_cast<std::size_t>(k)] + u_k[static_cast<std::size_t>(k)];
    z = (rho / (1.0 + rho * k_shards)) * sum;

    double primal_sq = 0.0;
    double max_shard = 0.0;
    for (int k = 0; k < k_shards; ++k) {
      u_k[static_cast<std::size_t>(k)] += w_k[static_cast<std::size_t>(k)] - z;
      const double rk = (w_k[static_cast<std::size_t>(k)] - z).norm();
      primal_sq += rk * rk;
      max_shard = std::max(max_shard, rk);
    }
    const double primal = std::sqrt(primal_sq);
    const double dual = rho * std::sqrt(static_cast<double>(k_shards)) * (z - z_prev).norm();
    res.primal_residual.push_back(primal);
    res.dual_residual.push_back(dual);
    res.max_shard_residual.push_back(max_shard);
    if (primal < tol && dual < tol) {
      ++round;
      res.converged = true;
      break;
    }
  }

  res.rounds = round;
  res.model.w = z;
  res.model.C = C;
  res.model.tol = tol;
  res.model.iterations_run = round;
  DenseRowSource all(data.features);
  res.model.objective = primal_objective(res.model.w, all, data.labels, C, true);
  return res;
}

inline SvmModel consensus_train(const Dataset& data, const ShardPlan& plan, double C,
                                double tol) {
  return consensus_train_detailed(data, plan, C, tol).model;
}

}  // namespace quadpix
