#pragma once

#include "sparselab/types.hpp"

namespace sparselab {

/// Sufficient-condition threshold for IHT support recovery: delta_{3k} must
/// stay below 1/sqrt(32).
inline const double kIhtRipThreshold = 1.0 / std::sqrt(32.0);

struct RipReport {
  Index k = 0;
  double delta = 0.0;
  IndexSet witness_support;  // the k-subset achieving the extreme
  enum class Side { lower, upper } side = Side::lower;
};

/// Exhaustive restricted-isometry constant: max over all k-column subsets S
/// of the worst Gram eigenvalue deviation |lambda(Phi_S^T Phi_S) - 1|.
/// Guards: C(m, k) <= 2e6 and k <= n (throws BudgetExceededError /
/// invalid_argument otherwise).
RipReport delta_k_exhaustive(const Dictionary& phi, Index k);

/// Annihilating pair (W, D) for a rank-perturbed dictionary
/// Phi = [eps*A + Delta_r]*N: rows of W form an orthonormal basis of
/// null(Delta_r^T) and D = (eps*N)^{-1}, so W*Phi*D = W*A.
struct Cor3Transform {
  Eigen::MatrixXd w;  // (n - r) x n, orthonormal rows
  Eigen::VectorXd d;  // length m, diagonal of D
};

Cor3Transform cor3_transform(const Dictionary& phi,
                             const Eigen::MatrixXd& perturbation,
                             double epsilon,
                             const Eigen::VectorXd& norm_scales);

/// True iff delta_{3k}[phi] < 1/sqrt(32). When 3k exceeds n the Gram of any
/// 3k-subset is singular, so the condition is false without enumeration.
bool iht_condition_holds(const Dictionary& phi, Index k);

}  // namespace sparselab
