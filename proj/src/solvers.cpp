#include "sparselab/solvers.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparselab/oracle.hpp"

namespace sparselab {

LayerWeights LayerWeights::iht_weights(const Dictionary& phi, double mu) {
  LayerWeights w;
  w.psi = Eigen::MatrixXd::Identity(phi.m(), phi.m()) -
          mu * phi.entries.transpose() * phi.entries;
  w.gamma = mu * phi.entries.transpose();
  return w;
}

void SolverConfig::validate() const {
  if (max_iterations < 1)
    throw std::invalid_argument("SolverConfig: max_iterations >= 1");
  if (tolerance <= 0.0)
    throw std::invalid_argument("SolverConfig: tolerance > 0");
}

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& x, Index k) {
  if (k < 0 || k > x.size())
    throw std::invalid_argument("hard_threshold: require 0 <= k <= m");
  if (k == x.size()) return x;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  if (k == 0) return out;

  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  // magnitude descending, index ascending on ties
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  });
  for (Index i = 0; i < k; ++i)
    out[order[static_cast<std::size_t>(i)]] = x[order[static_cast<std::size_t>(i)]];
  return out;
}

Eigen::VectorXd gated_hard_threshold(const Eigen::VectorXd& x, Index k,
                                     const IndexSet& omega_on,
                                     const IndexSet& omega_off) {
  for (Index i : omega_on)
    if (std::binary_search(omega_off.begin(), omega_off.end(), i))
      throw std::invalid_argument(
          "gated_hard_threshold: omega_on and omega_off overlap");
  if (omega_on.empty() && omega_off.empty()) return hard_threshold(x, k);

  std::vector<char> gated(static_cast<std::size_t>(x.size()), 0);
  for (Index i : omega_on) gated[static_cast<std::size_t>(i)] = 1;
  for (Index i : omega_off) gated[static_cast<std::size_t>(i)] = 2;

  std::vector<Index> free_indices;
  free_indices.reserve(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i)
    if (!gated[static_cast<std::size_t>(i)]) free_indices.push_back(i);

  const Index keep = std::min<Index>(k, static_cast<Index>(free_indices.size()));
  std::sort(free_indices.begin(), free_indices.end(), [&](Index a, Index b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  });

  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (Index i : omega_on) out[i] = x[i];
  for (Index i = 0; i < keep; ++i)
    out[free_indices[static_cast<std::size_t>(i)]] =
        x[free_indices[static_cast<std::size_t>(i)]];
  return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double tau) {
  Eigen::VectorXd out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double shrunk = std::abs(x[i]) - tau;
    out[i] = shrunk > 0.0 ? (x[i] > 0.0 ? shrunk : -shrunk) : 0.0;
  }
  return out;
}

namespace {

double half_residual_sq(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& x) {
  return 0.5 * (y - phi * x).squaredNorm();
}

/// Shared engine behind iht / generalized_layer_solve / weighted_iht:
/// x <- H_k[psi*x + gamma*y] until the iterate change drops below tolerance.
RecoveryResult run_layer_iterations(const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& trace_phi,
                                    const Eigen::MatrixXd& psi,
                                    const Eigen::MatrixXd& gamma, Index k,
                                    const SolverConfig& config) {
  RecoveryResult result;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(psi.cols());
  result.objective_trace.push_back(half_residual_sq(trace_phi, y, x));
  if (config.record_iterates) result.iterates.push_back(x);

  for (int t = 0; t < config.max_iterations; ++t) {
    const Eigen::VectorXd next = hard_threshold(psi * x + gamma * y, k);
    result.objective_trace.push_back(half_residual_sq(trace_phi, y, next));
    if (config.record_iterates) result.iterates.push_back(next);
    ++result.iterations_used;
    const double change = (next - x).norm();
    x = next;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.estimate = SparseSignal::from_values(x);
  return result;
}

}  // namespace

RecoveryResult iht(const Observation& y, const Dictionary& phi,
                   const SolverConfig& config) {
  config.validate();
  const LayerWeights weights = LayerWeights::iht_weights(phi, config.step_size);
  RecoveryResult result = run_layer_iterations(
      y.values, phi.entries, weights.psi, weights.gamma, config.k, config);
  // mu = 1 is honored even for expansive dictionaries; record the spectral
  // norm so failures are diagnosable.
  const double spectral = phi.entries.jacobiSvd().singularValues()[0];
  if (spectral > 1.0) result.dictionary_spectral_norm = spectral;
  return result;
}

RecoveryResult generalized_layer_solve(const Observation& y,
                                       const Dictionary& phi,
                                       const LayerWeights& weights,
                                       const SolverConfig& config,
                                       bool validate_fixed_point) {
  config.validate();
  if (weights.psi.rows() != phi.m() || weights.psi.cols() != phi.m() ||
      weights.gamma.rows() != phi.m() || weights.gamma.cols() != phi.n())
    throw std::invalid_argument("generalized_layer_solve: weight shape mismatch");

  RecoveryResult result = run_layer_iterations(
      y.values, phi.entries, weights.psi, weights.gamma, config.k, config);
  if (validate_fixed_point) {
    const Eigen::MatrixXd constraint =
        Eigen::MatrixXd::Identity(phi.m(), phi.m()) -
        weights.gamma * phi.entries;
    result.fixed_point_warning = (weights.psi - constraint).norm() > 1e-8;
  }
  return result;
}

RecoveryResult weighted_iht(const Observation& y, const Dictionary& phi,
                            const Eigen::MatrixXd& w, const Eigen::VectorXd& d,
                            const SolverConfig& config) {
  config.validate();
  if (w.cols() != phi.n())
    throw std::invalid_argument("weighted_iht: W column count != n");
  if (d.size() != phi.m())
    throw std::invalid_argument("weighted_iht: D length != m");
  if (d.cwiseAbs().minCoeff() == 0.0)
    throw std::invalid_argument("weighted_iht: D must be invertible");

  const Eigen::MatrixXd phi_t = w * phi.entries * d.asDiagonal();
  const Eigen::VectorXd y_t = w * y.values;
  const Eigen::MatrixXd psi =
      Eigen::MatrixXd::Identity(phi.m(), phi.m()) -
      config.step_size * phi_t.transpose() * phi_t;
  const Eigen::MatrixXd gamma = config.step_size * phi_t.transpose();

  RecoveryResult result =
      run_layer_iterations(y_t, phi_t, psi, gamma, config.k, config);
  // Iterates approximate D^{-1} x*; report in the original coordinates.
  result.estimate =
      SparseSignal::from_values(d.asDiagonal() * result.estimate.values);
  return result;
}

RecoveryResult ista(const Observation& y, const Dictionary& phi, double lambda,
                    const SolverConfig& config) {
  config.validate();
  if (lambda < 0.0) throw std::invalid_argument("ista: lambda >= 0");
  const double spectral = phi.entries.jacobiSvd().singularValues()[0];
  const double max_step = 1.0 / (spectral * spectral);
  double mu = config.step_size;
  if (mu <= 0.0) {
    mu = max_step;
  } else if (mu > max_step * (1.0 + 1e-12)) {
    throw std::invalid_argument("ista: step size above 1/||Phi||_2^2");
  }

  RecoveryResult result;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(phi.m());
  result.objective_trace.push_back(half_residual_sq(phi.entries, y.values, x));
  result.penalized_objective_trace.push_back(result.objective_trace.back());

  for (int t = 0; t < config.max_iterations; ++t) {
    const Eigen::VectorXd grad_step =
        x + mu * phi.entries.transpose() * (y.values - phi.entries * x);
    const Eigen::VectorXd next = soft_threshold(grad_step, mu * lambda);
    const double fidelity = half_residual_sq(phi.entries, y.values, next);
    result.objective_trace.push_back(fidelity);
    result.penalized_objective_trace.push_back(
        fidelity + lambda * next.lpNorm<1>());
    ++result.iterations_used;
    const double change = (next - x).norm();
    x = next;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.estimate = SparseSignal::from_values(x);
  return result;
}

RecoveryResult omp(const Observation& y, const Dictionary& phi, Index k) {
  if (k < 0 || k > phi.n())
    throw std::invalid_argument("omp: require 0 <= k <= n");

  RecoveryResult result;
  Eigen::VectorXd residual = y.values;
  result.objective_trace.push_back(0.5 * residual.squaredNorm());
  IndexSet support;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(phi.m());

  for (Index step = 0; step < k; ++step) {
    if (residual.norm() <= 1e-12 * std::max(1.0, y.values.norm())) {
      result.converged = true;
      break;
    }
    const Eigen::VectorXd correlation = phi.entries.transpose() * residual;
    Index pick = -1;
    double best = -1.0;
    for (Index i = 0; i < phi.m(); ++i) {
      if (std::binary_search(support.begin(), support.end(), i)) continue;
      const double mag = std::abs(correlation[i]);
      if (mag > best) {
        best = mag;
        pick = i;
      }
    }
    if (pick < 0) break;  // every column already selected
    support.insert(std::upper_bound(support.begin(), support.end(), pick),
                   pick);

    SparseSignal fit;
    try {
      fit = least_squares_on_support(y, phi, support);
    } catch (const RankDeficientError&) {
      throw RankDeficientError("omp: accumulated support is rank deficient");
    }
    x = fit.values;
    residual = y.values - phi.entries * x;
    result.objective_trace.push_back(0.5 * residual.squaredNorm());
    ++result.iterations_used;
  }
  result.converged = true;  // greedy selection always terminates
  result.estimate = SparseSignal::from_values(x);
  return result;
}

}  // namespace sparselab
