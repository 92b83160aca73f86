#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <sstream>

#include "sparselab/dictgen.hpp"
#include "sparselab/textio.hpp"

using namespace sparselab;

TEST_CASE("gaussian_unit_columns normalization and determinism") {
  const Dictionary a = gaussian_unit_columns(4, 6, 0);
  CHECK(a.columns_unit_to(1e-12));
  const Dictionary b = gaussian_unit_columns(4, 6, 0);
  CHECK(a.entries == b.entries);  // bit identical
  const Dictionary c = gaussian_unit_columns(4, 6, 1);
  CHECK(a.entries != c.entries);
}

TEST_CASE("gaussian_unit_columns coherence statistic stays modest") {
  double total = 0.0;
  Index pairs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dictionary phi = gaussian_unit_columns(20, 100, seed);
    const Eigen::MatrixXd gram = phi.entries.transpose() * phi.entries;
    for (Index i = 0; i < gram.rows(); ++i)
      for (Index j = i + 1; j < gram.cols(); ++j) {
        total += std::abs(gram(i, j));
        ++pairs;
      }
  }
  CHECK(total / static_cast<double>(pairs) < 0.5);
}

TEST_CASE("rank_perturbed postconditions") {
  const RankPerturbedDictionary rp = rank_perturbed(10, 30, 0.01, 1, 3);
  CHECK(rp.dictionary.columns_unit_to(1e-12));
  CHECK(rp.perturbation.jacobiSvd().singularValues()[0] ==
        doctest::Approx(1.0).epsilon(1e-10));
  // numerical rank r
  const auto sv = rp.perturbation.jacobiSvd().singularValues();
  CHECK(sv[1] < 1e-12);

  // reconstruction: Phi = [eps A + Delta] N
  const Eigen::MatrixXd rebuilt =
      (rp.epsilon * rp.details + rp.perturbation) * rp.norm_scales.asDiagonal();
  CHECK((rebuilt - rp.dictionary.entries).norm() < 1e-12);
}

TEST_CASE("rank_perturbed large epsilon approaches the gaussian part") {
  const RankPerturbedDictionary rp = rank_perturbed(10, 30, 1e6, 1, 5);
  for (Index j = 0; j < 30; ++j) {
    const Eigen::VectorXd a = rp.details.col(j) / rp.details.col(j).norm();
    const double cosine =
        std::abs(a.dot(rp.dictionary.entries.col(j)));
    CHECK(std::acos(std::min(1.0, cosine)) < 1e-3);
  }
}

TEST_CASE("decaying_spectrum singular value profile") {
  const Eigen::MatrixXd raw = decaying_spectrum_raw(20, 100, 17);
  const Eigen::VectorXd sv = raw.jacobiSvd().singularValues();
  CHECK(sv[0] / sv[4] > 10.0);
  for (Index i = 1; i < sv.size(); ++i) CHECK(sv[i] < sv[i - 1]);

  const Dictionary dict = decaying_spectrum(20, 100, 17);
  CHECK(dict.columns_unit_to(1e-12));
}

TEST_CASE("decaying_spectrum has full rank across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::VectorXd sv =
        decaying_spectrum_raw(20, 100, seed).jacobiSvd().singularValues();
    CHECK(sv[19] > 1e-8);
  }
}

namespace {

ClusteredDictSpec toy_spec(double epsilon) {
  ClusteredDictSpec spec;
  spec.n = 24;
  spec.c = 8;
  spec.cluster_sizes.assign(8, 6);
  spec.epsilon = epsilon;
  return spec;
}

}  // namespace

TEST_CASE("clustered dictionary invariants") {
  const ClusteredDictionary cd = clustered(toy_spec(0.01), 4);
  const Index m = cd.spec.total_columns();
  CHECK(m == 48);
  CHECK(cd.dictionary.columns_unit_to(1e-12));

  // column reconstruction identity
  for (Index i = 0; i < m; ++i) {
    const Index j = cd.spec.cluster_of(i);
    const Eigen::VectorXd rebuilt =
        cd.norm_scales[i] *
        (cd.v[i] * cd.centers.col(j) + cd.spec.epsilon * cd.details.col(i));
    CHECK((rebuilt - cd.dictionary.entries.col(i)).norm() < 1e-10);
  }

  // unit centers and details
  for (Index j = 0; j < cd.spec.c; ++j)
    CHECK(cd.centers.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (Index i = 0; i < m; ++i)
    CHECK(cd.details.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("clustered within-cluster coherence is near one") {
  const ClusteredDictionary cd = clustered(toy_spec(0.01), 9);
  double min_inner = 1.0;
  for (Index j = 0; j < cd.spec.c; ++j) {
    const Index begin = cd.spec.cluster_begin(j);
    const Index size = cd.spec.cluster_sizes[static_cast<std::size_t>(j)];
    for (Index a = 0; a < size; ++a)
      for (Index b = a + 1; b < size; ++b)
        min_inner = std::min(
            min_inner, std::abs(cd.dictionary.entries.col(begin + a)
                                    .dot(cd.dictionary.entries.col(begin + b))));
  }
  CHECK(min_inner > 0.99);
}

TEST_CASE("clustered columns tighten to the centers as epsilon shrinks") {
  double previous_worst = 1e9;
  for (double epsilon : {0.3, 0.1, 0.03, 0.01}) {
    const ClusteredDictionary cd = clustered(toy_spec(epsilon), 21);
    double worst = 0.0;
    for (Index i = 0; i < cd.spec.total_columns(); ++i) {
      const Index j = cd.spec.cluster_of(i);
      const double cosine = std::min(
          1.0, std::abs(cd.dictionary.entries.col(i).dot(cd.centers.col(j))));
      worst = std::max(worst, std::acos(cosine));
    }
    CHECK(worst < previous_worst);
    previous_worst = worst;
  }
}

TEST_CASE("cluster_support") {
  const ClusteredDictSpec spec = toy_spec(0.1);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(48);
  values[13] = 1.0;  // cluster 2
  values[32] = -2.0; // cluster 5
  CHECK(cluster_support(SparseSignal::from_values(values), spec) ==
        IndexSet{2, 5});
  CHECK(cluster_support(SparseSignal::zeros(48), spec).empty());

  Eigen::VectorXd full = Eigen::VectorXd::Ones(48);
  CHECK(cluster_support(SparseSignal::from_values(full), spec) ==
        IndexSet{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("dictionary text round trip") {
  const Dictionary dict = gaussian_unit_columns(5, 9, 33);
  std::stringstream buffer;
  write_matrix(buffer, dict.entries);
  const Eigen::MatrixXd back = read_matrix(buffer);
  CHECK(back == dict.entries);  // 17 significant digits round-trip exactly
}
