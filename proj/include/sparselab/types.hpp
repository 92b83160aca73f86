#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sparselab {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;  // kept sorted ascending

// Tolerance below which a least-squares residual counts as an exact fit.
inline constexpr double kFeasibilityTol = 1e-8;

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x m sensing/representation matrix. Overcomplete (m > n) in every
/// generated instance; hand-built fixtures may violate that.
struct Dictionary {
  Eigen::MatrixXd entries;
  bool column_norms_unit = false;

  Index n() const { return entries.rows(); }
  Index m() const { return entries.cols(); }

  /// True when every column norm is within tol of one.
  bool columns_unit_to(double tol = 1e-10) const;
};

/// Length-m coefficient vector plus its exact nonzero index set.
struct SparseSignal {
  Eigen::VectorXd values;
  IndexSet support;

  static SparseSignal from_values(const Eigen::VectorXd& values);
  static SparseSignal zeros(Index m);

  Index dimension() const { return values.size(); }
  Index cardinality() const { return static_cast<Index>(support.size()); }
};

struct Observation {
  Eigen::VectorXd values;

  Index dimension() const { return values.size(); }
};

/// Binary support labels: bits[i] = 1 iff the generating signal had a
/// nonzero in coordinate i.
struct LabelVector {
  std::vector<std::uint8_t> bits;

  Index dimension() const { return static_cast<Index>(bits.size()); }
  Index popcount() const;
};

/// Outcome of one solver run.
struct RecoveryResult {
  SparseSignal estimate;
  int iterations_used = 0;
  bool converged = false;
  // 0.5*||y - Phi x||^2 at x^(0), x^(1), ..., x^(iterations_used).
  std::vector<double> objective_trace;

  // Diagnostics (not part of the recovery contract).
  std::optional<double> dictionary_spectral_norm;
  std::vector<double> penalized_objective_trace;  // ISTA only
  bool fixed_point_warning = false;
  std::vector<Eigen::VectorXd> iterates;  // filled on request only
};

LabelVector labels_from_signal(const SparseSignal& x);

/// Support of a plain vector: indices with value != 0, sorted.
IndexSet support_of(const Eigen::VectorXd& values);

bool same_support(const IndexSet& a, const IndexSet& b);

}  // namespace sparselab
