#pragma once

#include <cstdint>
#include <vector>

#include "sparselab/types.hpp"

namespace sparselab {

/// Parameters of the two-scale clustered dictionary family.
struct ClusteredDictSpec {
  Index c = 0;                       // cluster count
  std::vector<Index> cluster_sizes;  // m_j, sums to m
  double epsilon = 0.0;              // intra-cluster detail weight
  Index n = 0;

  Index total_columns() const;
  void validate() const;
  /// Cluster index owning column i.
  Index cluster_of(Index column) const;
  /// First column index of cluster j.
  Index cluster_begin(Index j) const;
};

/// Clustered dictionary together with the pieces it was assembled from:
/// column i of cluster j is norm_scales[i] * (v[i] * centers.col(j)
/// + epsilon * details.col(i)).
struct ClusteredDictionary {
  Dictionary dictionary;
  ClusteredDictSpec spec;
  Eigen::MatrixXd centers;      // n x c, unit columns (U)
  Eigen::MatrixXd details;      // n x m, unit columns (A)
  Eigen::VectorXd v;            // length m, concatenated v_j
  Eigen::VectorXd norm_scales;  // diagonal of N
};

/// Rank-perturbed dictionary [epsilon*A + Delta_r]*N plus everything a
/// caller needs to build the annihilating transform afterwards.
struct RankPerturbedDictionary {
  Dictionary dictionary;
  Eigen::MatrixXd details;       // pre-normalization A (iid N(0, 1/n) entries)
  Eigen::MatrixXd perturbation;  // Delta_r, unit spectral norm
  Eigen::VectorXd norm_scales;   // diagonal of N
  double epsilon = 0.0;
  Index rank = 0;
};

/// iid N(0, 1/n) entries, columns rescaled to unit norm.
Dictionary gaussian_unit_columns(Index n, Index m, std::uint64_t seed);

RankPerturbedDictionary rank_perturbed(Index n, Index m, double epsilon,
                                       Index r, std::uint64_t seed);

/// sum_{i=1..n} (1/i^2) u_i v_i^T before column normalization; the raw
/// variant exposes the un-normalized sum for spectrum inspection.
Eigen::MatrixXd decaying_spectrum_raw(Index n, Index m, std::uint64_t seed);
Dictionary decaying_spectrum(Index n, Index m, std::uint64_t seed);

ClusteredDictionary clustered(const ClusteredDictSpec& spec,
                              std::uint64_t seed);

/// Set of clusters holding at least one nonzero of x.
IndexSet cluster_support(const SparseSignal& x, const ClusteredDictSpec& spec);

}  // namespace sparselab
