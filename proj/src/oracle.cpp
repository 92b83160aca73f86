#include "sparselab/oracle.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparselab/combinatorics.hpp"

namespace sparselab {

namespace {

Eigen::MatrixXd columns(const Dictionary& phi, const IndexSet& support) {
  Eigen::MatrixXd sub(phi.n(), static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j)
    sub.col(static_cast<Index>(j)) = phi.entries.col(support[j]);
  return sub;
}

SparseSignal expand(Index m, const IndexSet& support,
                    const Eigen::VectorXd& coeffs) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < support.size(); ++j)
    full[support[j]] = coeffs[static_cast<Index>(j)];
  return SparseSignal::from_values(full);
}

}  // namespace

SparseSignal brute_force_l0(const Observation& y, const Dictionary& phi,
                            Index k_max) {
  if (phi.m() > 24 || k_max > 4)
    throw std::invalid_argument(
        "brute_force_l0: enumeration guard requires m <= 24 and k_max <= 4");
  if (y.dimension() != phi.n())
    throw std::invalid_argument("brute_force_l0: observation length != n");

  for (Index card = 0; card <= k_max; ++card) {
    bool found = false;
    double best_residual = 0.0;
    IndexSet best_support;
    Eigen::VectorXd best_coeffs;

    for_each_subset(phi.m(), card, [&](const IndexSet& support) {
      Eigen::VectorXd coeffs;
      double residual;
      if (card == 0) {
        coeffs.resize(0);
        residual = y.values.norm();
      } else {
        // Min-norm least squares; rank-deficient submatrices are allowed
        // here, the residual test below does the rejecting.
        const Eigen::MatrixXd sub = columns(phi, support);
        coeffs = sub.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                     .solve(y.values);
        residual = (y.values - sub * coeffs).norm();
      }
      if (residual > kFeasibilityTol) return;
      // Lexicographic enumeration order makes "first strictly better wins"
      // implement the documented tie rule.
      if (!found || residual < best_residual) {
        found = true;
        best_residual = residual;
        best_support = support;
        best_coeffs = coeffs;
      }
    });

    if (found) return expand(phi.m(), best_support, best_coeffs);
  }
  throw InfeasibleError(
      "brute_force_l0: no support of size <= k_max reproduces y");
}

SparseSignal least_squares_on_support(const Observation& y,
                                      const Dictionary& phi,
                                      const IndexSet& support) {
  if (static_cast<Index>(support.size()) > phi.n())
    throw std::invalid_argument(
        "least_squares_on_support: support larger than measurement count");
  if (y.dimension() != phi.n())
    throw std::invalid_argument(
        "least_squares_on_support: observation length != n");
  if (support.empty()) return SparseSignal::zeros(phi.m());

  const Eigen::MatrixXd sub = columns(phi, support);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 0.0 || sv[0] / sv[sv.size() - 1] > 1e12)
    throw RankDeficientError(
        "least_squares_on_support: selected columns are rank deficient");

  return expand(phi.m(), support, svd.solve(y.values));
}

}  // namespace sparselab
