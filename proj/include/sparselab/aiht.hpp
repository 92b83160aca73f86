#pragma once

#include <functional>
#include <optional>

#include "sparselab/dictgen.hpp"
#include "sparselab/types.hpp"

namespace sparselab {

/// Gate sets produced from the previous layer's activation.
using GateRule =
    std::function<std::pair<IndexSet, IndexSet>(const Eigen::VectorXd&)>;

/// One adaptive layer z <- H_k[psi*z + gamma*y; omega_on, omega_off].
/// Layers may change dimension; psi is (out x in), gamma is (out x n).
/// `model` is the column basis the layer's output coefficients refer to
/// (n x out); it drives the objective trace and the residual exits.
/// `repeat` applies the same layer several times (weight sharing across
/// consecutive iterations); `exit_residual` skips the remaining repeats
/// once ||y - model*z|| falls below it.
struct AihtLayer {
  Eigen::MatrixXd psi;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd model;
  Index k = 0;
  IndexSet omega_on;
  IndexSet omega_off;
  GateRule gate_rule;  // overrides the static sets when present
  // Reuse the gate sets computed by the nearest preceding rule layer; the
  // detected cluster support is fixed once at the phase transition rather
  // than re-derived from every activation.
  bool inherit_gates = false;
  Index repeat = 1;
  std::optional<double> exit_residual;
};

struct AihtSchedule {
  std::vector<AihtLayer> layers;
  // Entry index of the first layer past the cluster phase (the padding
  // layer in constructed schedules).
  Index phase_boundary = 0;
  // decoder[i]: original x index of final-layer coordinate i, -1 to discard.
  std::vector<Index> decoder;
  // When present, final coefficients are least-squares refit on the decoded
  // support against this dictionary.
  std::optional<Dictionary> refit_dictionary;

  /// Provenance record: layer list with matrix references by content hash.
  std::string describe() const;
};

/// Runs the schedule from z = 0 and maps the final coordinates through the
/// decoder. Throws invalid_argument on shape mismatches and when the
/// decoder is not injective on the final support.
RecoveryResult run_aiht(const Observation& y, const AihtSchedule& schedule);

/// ||y - U z||: observable proxy for cluster-phase convergence.
double cluster_residual_monitor(const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& u,
                                const Eigen::VectorXd& z);

/// Two-phase schedule for a clustered dictionary.
///
/// Phase 1 (tau applications over the centers U at sparsity k_c, the first
/// layers ramping k up 1, 2, ..., k_c) detects the cluster support; it
/// exits on the observable residual at the epsilon scale. A zero-padding
/// layer then lifts into the (c+m)-dimensional [U, A] system. Phase 2
/// (t_detail applications over [U, A]) gates undetected clusters off
/// entirely -- centers and details -- and keeps detected centers immune, so
/// its gradient steps converge on the collapsed subsystem; its last
/// application thresholds the detail coordinates at k_x.
AihtSchedule build_cluster_schedule(const ClusteredDictionary& cd, Index k_x,
                                    Index k_c, Index tau, Index t_detail);

}  // namespace sparselab
