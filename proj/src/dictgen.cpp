#include "sparselab/dictgen.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparselab/rng.hpp"

namespace sparselab {

Index ClusteredDictSpec::total_columns() const {
  return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), Index{0});
}

void ClusteredDictSpec::validate() const {
  if (c < 1 || static_cast<Index>(cluster_sizes.size()) != c)
    throw std::invalid_argument("ClusteredDictSpec: cluster_sizes must have c entries");
  if (epsilon <= 0.0)
    throw std::invalid_argument("ClusteredDictSpec: epsilon must be positive");
  for (Index mj : cluster_sizes)
    if (mj < 1) throw std::invalid_argument("ClusteredDictSpec: every m_j >= 1");
  if (n < 1) throw std::invalid_argument("ClusteredDictSpec: n >= 1");
}

Index ClusteredDictSpec::cluster_of(Index column) const {
  Index start = 0;
  for (Index j = 0; j < c; ++j) {
    start += cluster_sizes[static_cast<std::size_t>(j)];
    if (column < start) return j;
  }
  throw std::out_of_range("ClusteredDictSpec: column index out of range");
}

Index ClusteredDictSpec::cluster_begin(Index j) const {
  Index start = 0;
  for (Index i = 0; i < j; ++i)
    start += cluster_sizes[static_cast<std::size_t>(i)];
  return start;
}

namespace {

void normalize_columns(Eigen::MatrixXd& matrix) {
  for (Index j = 0; j < matrix.cols(); ++j)
    matrix.col(j) /= matrix.col(j).norm();
}

}  // namespace

Dictionary gaussian_unit_columns(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("gaussian_unit_columns: n, m >= 1");
  RandomStream rng(seed);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd entries = sigma * rng.gaussian_matrix(n, m);
  normalize_columns(entries);
  return Dictionary{std::move(entries), true};
}

RankPerturbedDictionary rank_perturbed(Index n, Index m, double epsilon,
                                       Index r, std::uint64_t seed) {
  if (r < 1 || r >= n)
    throw std::invalid_argument("rank_perturbed: require 1 <= r < n");
  if (epsilon <= 0.0)
    throw std::invalid_argument("rank_perturbed: epsilon > 0");
  RandomStream rng(seed);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd details = sigma * rng.gaussian_matrix(n, m);

  Eigen::MatrixXd left = rng.gaussian_matrix(n, r);
  Eigen::MatrixXd right = rng.gaussian_matrix(r, m);
  Eigen::MatrixXd perturbation = left * right;
  const double spectral =
      perturbation.jacobiSvd().singularValues()[0];
  perturbation /= spectral;

  Eigen::MatrixXd pre = epsilon * details + perturbation;
  Eigen::VectorXd norm_scales(m);
  for (Index j = 0; j < m; ++j) norm_scales[j] = 1.0 / pre.col(j).norm();
  Eigen::MatrixXd entries = pre * norm_scales.asDiagonal();

  RankPerturbedDictionary out;
  out.dictionary = Dictionary{std::move(entries), true};
  out.details = std::move(details);
  out.perturbation = std::move(perturbation);
  out.norm_scales = std::move(norm_scales);
  out.epsilon = epsilon;
  out.rank = r;
  return out;
}

Eigen::MatrixXd decaying_spectrum_raw(Index n, Index m, std::uint64_t seed) {
  if (n < 1 || m <= n)
    throw std::invalid_argument("decaying_spectrum: require m > n >= 1");
  RandomStream rng(seed);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, m);
  for (Index i = 1; i <= n; ++i) {
    const Eigen::VectorXd u = rng.gaussian_vector(n);
    const Eigen::VectorXd v = rng.gaussian_vector(m);
    sum.noalias() += (1.0 / static_cast<double>(i * i)) * u * v.transpose();
  }
  return sum;
}

Dictionary decaying_spectrum(Index n, Index m, std::uint64_t seed) {
  Eigen::MatrixXd entries = decaying_spectrum_raw(n, m, seed);
  normalize_columns(entries);
  return Dictionary{std::move(entries), true};
}

ClusteredDictionary clustered(const ClusteredDictSpec& spec,
                              std::uint64_t seed) {
  spec.validate();
  RandomStream rng(seed);
  const Index m = spec.total_columns();

  // U, A and v are drawn before epsilon enters, so a fixed seed yields the
  // same cluster geometry across an epsilon sweep.
  Eigen::MatrixXd centers(spec.n, spec.c);
  for (Index j = 0; j < spec.c; ++j) centers.col(j) = rng.unit_vector(spec.n);
  Eigen::MatrixXd details(spec.n, m);
  for (Index i = 0; i < m; ++i) details.col(i) = rng.unit_vector(spec.n);
  // Bounded away from zero so no column decouples from its center; the
  // spread exercises the unequal-column-norm effect.
  Eigen::VectorXd v(m);
  for (Index i = 0; i < m; ++i) v[i] = rng.uniform(0.5, 1.5);

  Eigen::MatrixXd pre(spec.n, m);
  for (Index i = 0; i < m; ++i) {
    const Index j = spec.cluster_of(i);
    pre.col(i) = v[i] * centers.col(j) + spec.epsilon * details.col(i);
  }
  Eigen::VectorXd norm_scales(m);
  for (Index i = 0; i < m; ++i) norm_scales[i] = 1.0 / pre.col(i).norm();

  ClusteredDictionary out;
  out.dictionary = Dictionary{pre * norm_scales.asDiagonal(), true};
  out.spec = spec;
  out.centers = std::move(centers);
  out.details = std::move(details);
  out.v = std::move(v);
  out.norm_scales = std::move(norm_scales);
  return out;
}

IndexSet cluster_support(const SparseSignal& x,
                         const ClusteredDictSpec& spec) {
  if (x.dimension() != spec.total_columns())
    throw std::invalid_argument("cluster_support: signal length != sum m_j");
  std::vector<bool> touched(static_cast<std::size_t>(spec.c), false);
  for (Index i : x.support)
    touched[static_cast<std::size_t>(spec.cluster_of(i))] = true;
  IndexSet clusters;
  for (Index j = 0; j < spec.c; ++j)
    if (touched[static_cast<std::size_t>(j)]) clusters.push_back(j);
  return clusters;
}

}  // namespace sparselab
