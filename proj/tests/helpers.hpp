#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparselab/rng.hpp"
#include "sparselab/types.hpp"

namespace sparselab::testing {

/// Equiangular simplex frame: n+1 unit vectors in R^n with pairwise inner
/// products exactly -1/n. Its delta_3 equals 2/n, which sits below the
/// 1/sqrt(32) threshold for n >= 12 -- one of the few small overcomplete
/// families the exhaustive oracle actually certifies.
inline Dictionary simplex_frame(Index n) {
  const Index m = n + 1;
  Eigen::MatrixXd centered =
      Eigen::MatrixXd::Identity(m, m) -
      Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullU);
  Eigen::MatrixXd frame =
      svd.matrixU().leftCols(n).transpose() * centered;  // n x m
  for (Index j = 0; j < m; ++j) frame.col(j) /= frame.col(j).norm();
  return Dictionary{frame, true};
}

/// k-sparse signal with magnitudes bounded away from zero.
inline SparseSignal random_sparse_signal(Index m, Index k, RandomStream& rng,
                                         double low = 0.2, double high = 1.0) {
  Eigen::VectorXd values = Eigen::VectorXd::Zero(m);
  for (Index i : rng.sample_without_replacement(m, k)) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    values[i] = sign * rng.uniform(low, high);
  }
  return SparseSignal::from_values(values);
}

}  // namespace sparselab::testing
