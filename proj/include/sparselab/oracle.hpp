#pragma once

#include "sparselab/types.hpp"

namespace sparselab {

/// Exhaustive minimum-cardinality solver. Desk-scale only: enumerates every
/// support of size 0..k_max in lexicographic order and least-squares fits
/// each one, so the size guard (m <= 24, k_max <= 4) is enforced hard.
///
/// Returns the sparsest signal reproducing y within kFeasibilityTol; among
/// feasible supports of equal cardinality the smallest residual wins, with
/// remaining ties going to the lexicographically smallest support.
/// Throws InfeasibleError when nothing of cardinality <= k_max fits.
SparseSignal brute_force_l0(const Observation& y, const Dictionary& phi,
                            Index k_max);

/// Least-squares fit restricted to `support`; zero elsewhere.
/// Throws RankDeficientError when the selected columns have condition
/// number above 1e12.
SparseSignal least_squares_on_support(const Observation& y,
                                      const Dictionary& phi,
                                      const IndexSet& support);

}  // namespace sparselab
