#pragma once

#include "sparselab/types.hpp"

namespace sparselab {

/// Weights of one generalized layer x <- H_k[psi*x + gamma*y].
struct LayerWeights {
  Eigen::MatrixXd psi;    // m x m
  Eigen::MatrixXd gamma;  // m x n

  /// IHT weights for a dictionary: psi = I - mu*Phi^T*Phi, gamma = mu*Phi^T.
  static LayerWeights iht_weights(const Dictionary& phi, double mu = 1.0);
};

struct SolverConfig {
  int max_iterations = 1000;
  double step_size = 1.0;    // mu
  double tolerance = 1e-9;   // on the iterate change norm
  Index k = 0;               // target sparsity
  bool record_iterates = false;

  void validate() const;
};

/// Keeps the k largest magnitudes, zeroes the rest. Ties at the k-th
/// magnitude keep the lowest index.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& x, Index k);

/// Hard threshold with gates: omega_on entries pass through untouched,
/// omega_off entries are forced to zero, the rest compete for k slots.
/// Throws invalid_argument when the gate sets overlap.
Eigen::VectorXd gated_hard_threshold(const Eigen::VectorXd& x, Index k,
                                     const IndexSet& omega_on,
                                     const IndexSet& omega_off);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double tau);

/// Iterative hard thresholding: x <- H_k[x + mu*Phi^T(y - Phi*x)] from
/// x = 0. Runs through the generalized-layer engine so the two entry
/// points are bitwise identical.
RecoveryResult iht(const Observation& y, const Dictionary& phi,
                   const SolverConfig& config);

/// Generalized layer iterations with caller-supplied weights. When
/// validate_fixed_point is set, a violation of psi = I - gamma*Phi beyond
/// 1e-8 is flagged in the result (the fixed-point requirement for any
/// recoverable signal).
RecoveryResult generalized_layer_solve(const Observation& y,
                                       const Dictionary& phi,
                                       const LayerWeights& weights,
                                       const SolverConfig& config,
                                       bool validate_fixed_point = true);

/// IHT on the reweighted system (W*y, W*Phi*D); iterates live in the
/// transformed coordinates and the returned estimate is mapped back
/// through D. Throws invalid_argument when D has a zero entry.
RecoveryResult weighted_iht(const Observation& y, const Dictionary& phi,
                            const Eigen::MatrixXd& w, const Eigen::VectorXd& d,
                            const SolverConfig& config);

/// ISTA for the l1-penalized objective 0.5*||y - Phi*x||^2 + lambda*||x||_1.
/// A non-positive config.step_size selects the safe default 1/||Phi||_2^2;
/// an explicit step above that bound is rejected.
RecoveryResult ista(const Observation& y, const Dictionary& phi, double lambda,
                    const SolverConfig& config);

/// Orthogonal matching pursuit: k greedy column selections with a full
/// least-squares refit each round. Ties at the correlation maximum keep the
/// lowest index; selection stops early once the residual is numerically zero.
RecoveryResult omp(const Observation& y, const Dictionary& phi, Index k);

}  // namespace sparselab
