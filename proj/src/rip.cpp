#include "sparselab/rip.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sparselab/combinatorics.hpp"

namespace sparselab {

RipReport delta_k_exhaustive(const Dictionary& phi, Index k) {
  if (k < 1 || k > phi.n())
    throw std::invalid_argument("delta_k_exhaustive: require 1 <= k <= n");
  constexpr std::uint64_t kSubsetBudget = 2'000'000;
  if (binomial(static_cast<std::uint64_t>(phi.m()),
               static_cast<std::uint64_t>(k)) > kSubsetBudget)
    throw BudgetExceededError(
        "delta_k_exhaustive: C(m, k) exceeds the enumeration budget");

  RipReport report;
  report.k = k;
  report.delta = -1.0;

  // k x k symmetric Gram eigenproblems; cheap at the admissible sizes.
  Eigen::MatrixXd sub(phi.n(), k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for_each_subset(phi.m(), k, [&](const IndexSet& support) {
    for (Index j = 0; j < k; ++j)
      sub.col(j) = phi.entries.col(support[static_cast<std::size_t>(j)]);
    eig.compute(sub.transpose() * sub, Eigen::EigenvaluesOnly);
    const double low = 1.0 - eig.eigenvalues().minCoeff();
    const double high = eig.eigenvalues().maxCoeff() - 1.0;
    const double deviation = std::max(low, high);
    if (deviation > report.delta) {
      report.delta = deviation;
      report.witness_support = support;
      report.side =
          (low >= high) ? RipReport::Side::lower : RipReport::Side::upper;
    }
  });
  return report;
}

Cor3Transform cor3_transform(const Dictionary& phi,
                             const Eigen::MatrixXd& perturbation,
                             double epsilon,
                             const Eigen::VectorXd& norm_scales) {
  if (perturbation.rows() != phi.n() || perturbation.cols() != phi.m())
    throw std::invalid_argument("cor3_transform: perturbation shape mismatch");
  if (epsilon <= 0.0)
    throw std::invalid_argument("cor3_transform: epsilon > 0");
  if (norm_scales.size() != phi.m())
    throw std::invalid_argument("cor3_transform: norm_scales length != m");

  // Full SVD of Delta_r; left singular vectors past the numerical rank span
  // null(Delta_r^T).
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(perturbation,
                                              Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double rank_tol =
      sv.size() > 0 ? sv[0] * 1e-10 * static_cast<double>(phi.n()) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rank_tol) ++rank;
  if (rank >= phi.n())
    throw RankDeficientError(
        "cor3_transform: perturbation has full row rank, null space is empty");

  Cor3Transform out;
  out.w = svd.matrixU().rightCols(phi.n() - rank).transpose();
  out.d = (epsilon * norm_scales).cwiseInverse();
  return out;
}

bool iht_condition_holds(const Dictionary& phi, Index k) {
  if (k < 1) throw std::invalid_argument("iht_condition_holds: k >= 1");
  if (3 * k > phi.n()) return false;  // singular Gram forces delta >= 1
  return delta_k_exhaustive(phi, 3 * k).delta < kIhtRipThreshold;
}

}  // namespace sparselab
