#include "sparselab/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparselab/rng.hpp"
#include "sparselab/textio.hpp"

namespace sparselab {

void LightingRig::validate() const {
  if (directions.cols() != 3 || q() < 4)
    throw std::invalid_argument("LightingRig: need a q x 3 matrix, q >= 4");
  for (Index i = 0; i < q(); ++i)
    if (std::abs(directions.row(i).norm() - 1.0) > 1e-10)
      throw std::invalid_argument("LightingRig: rows must be unit length");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(directions);
  if (svd.singularValues()[2] < 1e-10)
    throw RankDeficientError("LightingRig: directions do not span R^3");
}

LightingRig make_rig(Index q, std::uint64_t seed) {
  if (q < 4) throw std::invalid_argument("make_rig: q >= 4");
  RandomStream rng(seed);
  LightingRig rig;
  rig.directions.resize(q, 3);
  for (Index i = 0; i < q; ++i) {
    Eigen::VectorXd dir = rng.unit_vector(3);
    if (dir[2] < 0.0) dir = -dir;  // upper hemisphere
    rig.directions.row(i) = dir.transpose();
  }
  rig.validate();
  return rig;
}

NullspaceSystem nullspace_dictionary(const LightingRig& rig) {
  rig.validate();
  const Index q = rig.q();
  // Left singular vectors beyond the rank-3 range of L span null(L^T).
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rig.directions,
                                              Eigen::ComputeFullU);
  NullspaceSystem system;
  system.projector = svd.matrixU().rightCols(q - 3).transpose();
  system.phi.entries = system.projector;
  // Column norms are fixed by the lighting geometry; they are deliberately
  // not rescaled.
  system.phi.column_norms_unit = false;
  return system;
}

Scene synthesize_scene(Index point_count, const LightingRig& rig,
                       const OutlierLaw& law, std::uint64_t seed) {
  rig.validate();
  if (law.count_min < 0 || law.count_max < law.count_min)
    throw std::invalid_argument("synthesize_scene: bad outlier count range");
  if (law.count_max > rig.q() - 4)
    throw std::invalid_argument(
        "synthesize_scene: outliers must leave at least 4 clean rows");

  RandomStream rng(seed);
  Scene scene;
  scene.points.reserve(static_cast<std::size_t>(point_count));
  scene.observations.reserve(static_cast<std::size_t>(point_count));

  for (Index p = 0; p < point_count; ++p) {
    SurfacePoint point;
    Eigen::VectorXd normal = rng.unit_vector(3);
    if (normal[2] < 0.0) normal = -normal;
    point.normal = normal;
    point.albedo = rng.uniform(0.5, 1.5);

    PixelObservation obs;
    obs.intensities = point.albedo * rig.directions * point.normal;
    const Index outliers =
        law.count_min + static_cast<Index>(rng.next_index(
                            static_cast<std::uint64_t>(law.count_max -
                                                       law.count_min) +
                            1));
    obs.true_outliers = rng.sample_without_replacement(rig.q(), outliers);
    for (Index i : obs.true_outliers) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      obs.intensities[i] +=
          sign * rng.uniform(law.magnitude_low, law.magnitude_high);
    }

    scene.points.push_back(point);
    scene.observations.push_back(std::move(obs));
  }
  return scene;
}

double angular_error_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double cosine = std::clamp(a.dot(b), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

namespace {

Eigen::Vector3d fit_normal(const LightingRig& rig,
                           const Eigen::VectorXd& intensities,
                           const IndexSet& rows) {
  Eigen::MatrixXd l(static_cast<Index>(rows.size()), 3);
  Eigen::VectorXd o(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    l.row(static_cast<Index>(r)) = rig.directions.row(rows[r]);
    o[static_cast<Index>(r)] = intensities[rows[r]];
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      l, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()[2] < 1e-10 * svd.singularValues()[0])
    throw RankDeficientError(
        "estimate_normals: selected lighting rows are rank deficient");
  Eigen::Vector3d scaled = svd.solve(o);
  const double norm = scaled.norm();
  if (norm < 1e-14)
    throw RankDeficientError("estimate_normals: degenerate zero fit");
  return scaled / norm;
}

StereoResult evaluate(const Scene& scene, const LightingRig& rig,
                      const std::function<IndexSet(Index)>& inlier_rows) {
  StereoResult result;
  result.estimates.reserve(static_cast<std::size_t>(scene.count()));
  double error_sum = 0.0;
  for (Index p = 0; p < scene.count(); ++p) {
    PointEstimate estimate;
    estimate.normal = fit_normal(
        rig, scene.observations[static_cast<std::size_t>(p)].intensities,
        inlier_rows(p));
    estimate.angular_error_deg = angular_error_deg(
        estimate.normal, scene.points[static_cast<std::size_t>(p)].normal);
    error_sum += estimate.angular_error_deg;
    result.estimates.push_back(estimate);
  }
  result.mean_angular_error_deg =
      error_sum / static_cast<double>(scene.count());
  return result;
}

}  // namespace

StereoResult estimate_normals(const Scene& scene, const LightingRig& rig,
                              const SupportEngine& engine, Index inlier_count) {
  rig.validate();
  if (inlier_count < 3 || inlier_count > rig.q())
    throw std::invalid_argument("estimate_normals: bad inlier count");
  const NullspaceSystem system = nullspace_dictionary(rig);

  return evaluate(scene, rig, [&](Index p) {
    const Eigen::VectorXd y =
        system.projector *
        scene.observations[static_cast<std::size_t>(p)].intensities;
    const Eigen::VectorXd scores = engine(p, y);
    if (scores.size() != rig.q())
      throw std::invalid_argument("estimate_normals: engine score length");
    // smallest outlier scores -> putative inliers; ties to the lowest index
    std::vector<Index> order(static_cast<std::size_t>(rig.q()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return scores[a] != scores[b] ? scores[a] < scores[b] : a < b;
    });
    IndexSet rows(order.begin(), order.begin() + inlier_count);
    std::sort(rows.begin(), rows.end());
    return rows;
  });
}

StereoResult naive_least_squares(const Scene& scene, const LightingRig& rig) {
  rig.validate();
  IndexSet all(static_cast<std::size_t>(rig.q()));
  std::iota(all.begin(), all.end(), Index{0});
  return evaluate(scene, rig, [&](Index) { return all; });
}

StereoResult random4_baseline(const Scene& scene, const LightingRig& rig,
                              std::uint64_t seed) {
  rig.validate();
  RandomStream rng(seed);
  return evaluate(scene, rig, [&](Index) {
    return rng.sample_without_replacement(rig.q(), 4);
  });
}

SupportEngine oracle_engine(const Scene& scene) {
  return [&scene](Index point, const Eigen::VectorXd& y) {
    const PixelObservation& obs =
        scene.observations[static_cast<std::size_t>(point)];
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(obs.intensities.size());
    for (Index i : obs.true_outliers) scores[i] = 1.0;
    (void)y;
    return scores;
  };
}

SupportEngine solver_magnitude_engine(
    const NullspaceSystem& system,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve) {
  (void)system;
  return [solve](Index, const Eigen::VectorXd& y) {
    return solve(y).cwiseAbs().eval();
  };
}

void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scene: cannot open " + path);
  const Index q =
      scene.count() > 0 ? scene.observations.front().intensities.size() : 0;
  out << "sparselab-scene 1\n";
  out << "points " << scene.count() << " q " << q << '\n';
  for (Index p = 0; p < scene.count(); ++p) {
    const SurfacePoint& point = scene.points[static_cast<std::size_t>(p)];
    const PixelObservation& obs =
        scene.observations[static_cast<std::size_t>(p)];
    out << "n";
    for (int i = 0; i < 3; ++i) out << ' ' << format_double(point.normal[i]);
    out << ' ' << format_double(point.albedo) << '\n';
    out << "o";
    for (Index i = 0; i < obs.intensities.size(); ++i)
      out << ' ' << format_double(obs.intensities[i]);
    out << '\n';
    out << "e " << obs.true_outliers.size();
    for (Index i : obs.true_outliers) out << ' ' << i;
    out << '\n';
  }
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scene: cannot open " + path);
  std::string magic, token;
  int version = 0;
  in >> magic >> version;
  if (magic != "sparselab-scene" || version != 1)
    throw std::runtime_error("load_scene: not a scene file");
  Index count = 0, q = 0;
  in >> token >> count >> token >> q;

  Scene scene;
  for (Index p = 0; p < count; ++p) {
    SurfacePoint point;
    in >> token;
    for (int i = 0; i < 3; ++i) in >> point.normal[i];
    in >> point.albedo;
    PixelObservation obs;
    obs.intensities.resize(q);
    in >> token;
    for (Index i = 0; i < q; ++i) in >> obs.intensities[i];
    std::size_t outliers = 0;
    in >> token >> outliers;
    obs.true_outliers.resize(outliers);
    for (Index& i : obs.true_outliers) in >> i;
    if (!in) throw std::runtime_error("load_scene: truncated scene file");
    scene.points.push_back(point);
    scene.observations.push_back(std::move(obs));
  }
  return scene;
}

}  // namespace sparselab
