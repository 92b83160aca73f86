#include "sparselab/aiht.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

#include "sparselab/oracle.hpp"
#include "sparselab/solvers.hpp"
#include "sparselab/textio.hpp"

namespace sparselab {

std::string AihtSchedule::describe() const {
  std::ostringstream out;
  out << "layers = " << layers.size() << "\n";
  out << "phase_boundary = " << phase_boundary << "\n";
  if (refit_dictionary)
    out << "refit_dictionary = " << hash_matrix_hex(refit_dictionary->entries)
        << "\n";
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const AihtLayer& layer = layers[t];
    out << "layer " << t << ": k = " << layer.k << ", repeat = "
        << layer.repeat << ", psi " << layer.psi.rows() << "x"
        << layer.psi.cols() << " @" << hash_matrix_hex(layer.psi)
        << ", gamma @" << hash_matrix_hex(layer.gamma) << ", model @"
        << hash_matrix_hex(layer.model);
    if (layer.exit_residual)
      out << ", exit_residual = " << format_double(*layer.exit_residual);
    if (layer.gate_rule) {
      out << ", gates = dynamic";
    } else if (layer.inherit_gates) {
      out << ", gates = inherited";
    } else {
      out << ", on = " << layer.omega_on.size()
          << ", off = " << layer.omega_off.size();
    }
    out << "\n";
  }
  return out.str();
}

double cluster_residual_monitor(const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& u,
                                const Eigen::VectorXd& z) {
  if (u.rows() != y.size() || u.cols() != z.size())
    throw std::invalid_argument("cluster_residual_monitor: shape mismatch");
  return (y - u * z).norm();
}

namespace {

void check_shapes(const Observation& y, const AihtSchedule& schedule) {
  if (schedule.layers.empty())
    throw std::invalid_argument("run_aiht: empty schedule");
  Index dim = schedule.layers.front().psi.cols();
  for (const AihtLayer& layer : schedule.layers) {
    if (layer.psi.cols() != dim)
      throw std::invalid_argument("run_aiht: layer input dimension mismatch");
    if (layer.gamma.rows() != layer.psi.rows() ||
        layer.gamma.cols() != y.dimension())
      throw std::invalid_argument("run_aiht: gamma shape mismatch");
    if (layer.model.rows() != y.dimension() ||
        layer.model.cols() != layer.psi.rows())
      throw std::invalid_argument("run_aiht: model shape mismatch");
    if (layer.repeat < 1)
      throw std::invalid_argument("run_aiht: layer repeat must be >= 1");
    dim = layer.psi.rows();
  }
  if (schedule.phase_boundary < 0 ||
      schedule.phase_boundary > static_cast<Index>(schedule.layers.size()))
    throw std::invalid_argument("run_aiht: phase boundary out of range");
  if (!schedule.decoder.empty() &&
      static_cast<Index>(schedule.decoder.size()) != dim)
    throw std::invalid_argument("run_aiht: decoder length mismatch");
}

}  // namespace

RecoveryResult run_aiht(const Observation& y, const AihtSchedule& schedule) {
  check_shapes(y, schedule);

  RecoveryResult result;
  Eigen::VectorXd z =
      Eigen::VectorXd::Zero(schedule.layers.front().psi.cols());
  result.objective_trace.push_back(0.5 * y.values.squaredNorm());

  IndexSet cached_on, cached_off;
  bool cache_valid = false;
  for (const AihtLayer& layer : schedule.layers) {
    IndexSet on = layer.omega_on;
    IndexSet off = layer.omega_off;
    if (layer.gate_rule) {
      std::tie(on, off) = layer.gate_rule(z);
      cached_on = on;
      cached_off = off;
      cache_valid = true;
    } else if (layer.inherit_gates) {
      if (!cache_valid)
        throw std::invalid_argument(
            "run_aiht: inherit_gates with no preceding gate rule");
      on = cached_on;
      off = cached_off;
    }

    for (Index rep = 0; rep < layer.repeat; ++rep) {
      z = gated_hard_threshold(layer.psi * z + layer.gamma * y.values,
                               layer.k, on, off);
      const double objective =
          0.5 * (y.values - layer.model * z).squaredNorm();
      result.objective_trace.push_back(objective);
      ++result.iterations_used;
      if (layer.exit_residual &&
          std::sqrt(2.0 * objective) < *layer.exit_residual)
        break;
    }
  }
  result.converged = true;

  if (schedule.decoder.empty()) {
    result.estimate = SparseSignal::from_values(z);
    return result;
  }

  Index original_dim = 0;
  for (Index mapped : schedule.decoder)
    original_dim = std::max(original_dim, mapped + 1);
  if (schedule.refit_dictionary)
    original_dim = schedule.refit_dictionary->m();

  Eigen::VectorXd decoded = Eigen::VectorXd::Zero(original_dim);
  std::vector<char> hit(static_cast<std::size_t>(original_dim), 0);
  for (Index i = 0; i < z.size(); ++i) {
    if (z[i] == 0.0) continue;
    const Index mapped = schedule.decoder[static_cast<std::size_t>(i)];
    if (mapped < 0) continue;  // discarded coordinate (cluster centers)
    if (hit[static_cast<std::size_t>(mapped)])
      throw std::invalid_argument(
          "run_aiht: decoder is not injective on the final support");
    hit[static_cast<std::size_t>(mapped)] = 1;
    decoded[mapped] = z[i];
  }

  if (schedule.refit_dictionary) {
    const IndexSet support = support_of(decoded);
    result.estimate =
        least_squares_on_support(y, *schedule.refit_dictionary, support);
  } else {
    result.estimate = SparseSignal::from_values(decoded);
  }
  return result;
}

AihtSchedule build_cluster_schedule(const ClusteredDictionary& cd, Index k_x,
                                    Index k_c, Index tau, Index t_detail) {
  if (tau < 1 || t_detail < 1)
    throw std::invalid_argument(
        "build_cluster_schedule: phase lengths must be >= 1");
  if (k_c < 1 || k_c > k_x)
    throw std::invalid_argument(
        "build_cluster_schedule: require 1 <= k_c <= k_x");

  const ClusteredDictSpec& spec = cd.spec;
  const Index c = spec.c;
  const Index m = spec.total_columns();
  const Index n = spec.n;
  const Eigen::MatrixXd& centers = cd.centers;

  AihtSchedule schedule;

  // Phase 1: IHT over the centers. Ramping the sparsity level up to k_c
  // warm-starts the iteration on the dominant clusters and avoids the bad
  // basins a cold k_c start can fall into; the exit fires once the
  // observable residual reaches the epsilon scale of the cluster model.
  AihtLayer cluster_layer;
  cluster_layer.psi = Eigen::MatrixXd::Identity(c, c) -
                      centers.transpose() * centers;
  cluster_layer.gamma = centers.transpose();
  cluster_layer.model = centers;
  Index ramp_len = 0;
  for (Index k = 1; k < k_c && ramp_len < tau - 1; ++k, ++ramp_len) {
    cluster_layer.k = k;
    schedule.layers.push_back(cluster_layer);
  }
  cluster_layer.k = k_c;
  cluster_layer.repeat = tau - ramp_len;
  cluster_layer.exit_residual = 10.0 * spec.epsilon;
  schedule.layers.push_back(cluster_layer);
  schedule.phase_boundary = static_cast<Index>(schedule.layers.size());

  // Zero padding into the [U, A] coordinate system.
  Eigen::MatrixXd joint(n, c + m);
  joint.leftCols(c) = centers;
  joint.rightCols(m) = cd.details;

  AihtLayer pad_layer;
  pad_layer.psi = Eigen::MatrixXd::Zero(c + m, c);
  pad_layer.psi.topRows(c) = Eigen::MatrixXd::Identity(c, c);
  pad_layer.gamma = Eigen::MatrixXd::Zero(c + m, n);
  pad_layer.model = joint;
  pad_layer.k = 0;
  for (Index j = 0; j < c; ++j) pad_layer.omega_on.push_back(j);
  schedule.layers.push_back(pad_layer);

  // Phase 2 gates: detected centers immune; everything the detected cluster
  // support declares zero -- undetected centers and all of their detail
  // coordinates -- is forced off, so the active subsystem is the collapsed
  // dictionary [U(J_c), A(J_c)].
  const Index kc_cap = k_c;
  GateRule rule = [spec, c, kc_cap](const Eigen::VectorXd& incoming) {
    std::vector<Index> nonzero_centers;
    for (Index j = 0; j < c; ++j)
      if (incoming[j] != 0.0) nonzero_centers.push_back(j);
    std::sort(nonzero_centers.begin(), nonzero_centers.end(),
              [&](Index a, Index b) {
                const double ma = std::abs(incoming[a]);
                const double mb = std::abs(incoming[b]);
                return ma != mb ? ma > mb : a < b;
              });
    if (static_cast<Index>(nonzero_centers.size()) > kc_cap)
      nonzero_centers.resize(static_cast<std::size_t>(kc_cap));
    IndexSet on(nonzero_centers.begin(), nonzero_centers.end());
    std::sort(on.begin(), on.end());

    IndexSet off;
    for (Index j = 0; j < c; ++j) {
      if (std::binary_search(on.begin(), on.end(), j)) continue;
      off.push_back(j);
      const Index begin = spec.cluster_begin(j);
      for (Index i = 0; i < spec.cluster_sizes[static_cast<std::size_t>(j)];
           ++i)
        off.push_back(c + begin + i);
    }
    std::sort(off.begin(), off.end());
    return std::make_pair(on, off);
  };

  // [U, A] is expansive at these sizes, so the unit-step update diverges on
  // the free coordinates; a projected-gradient step below 1/||B||^2 keeps
  // the detail iterations contractive. They run at full k (the gates carry
  // the cluster-level sparsity): on the active collapsed system these are
  // plain gradient steps converging to its unique exact representation,
  // where every wrong detail coordinate is exactly zero. The final
  // application then thresholds at k_x.
  const double spectral = joint.jacobiSvd().singularValues()[0];
  const double mu_detail = 1.0 / (spectral * spectral);

  AihtLayer detail_layer;
  detail_layer.psi = Eigen::MatrixXd::Identity(c + m, c + m) -
                     mu_detail * joint.transpose() * joint;
  detail_layer.gamma = mu_detail * joint.transpose();
  detail_layer.model = joint;
  detail_layer.k = t_detail == 1 ? k_x : c + m;
  detail_layer.gate_rule = rule;
  schedule.layers.push_back(detail_layer);
  detail_layer.gate_rule = nullptr;
  detail_layer.inherit_gates = true;
  if (t_detail > 2) {
    detail_layer.repeat = t_detail - 2;
    detail_layer.exit_residual = 1e-10;
    schedule.layers.push_back(detail_layer);
  }
  if (t_detail > 1) {
    detail_layer.repeat = 1;
    detail_layer.exit_residual.reset();
    detail_layer.k = k_x;
    schedule.layers.push_back(detail_layer);
  }

  // Center coordinates are dropped; detail coordinate c+i maps back to x_i.
  schedule.decoder.assign(static_cast<std::size_t>(c + m), -1);
  for (Index i = 0; i < m; ++i)
    schedule.decoder[static_cast<std::size_t>(c + i)] = i;

  schedule.refit_dictionary = cd.dictionary;
  return schedule;
}

}  // namespace sparselab
