#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparselab/types.hpp"

namespace sparselab {

/// q unit lighting directions stacked as rows; rank 3 required.
struct LightingRig {
  Eigen::MatrixXd directions;  // q x 3

  Index q() const { return directions.rows(); }
  void validate() const;
};

/// Random rig with directions uniform on the upper hemisphere.
LightingRig make_rig(Index q, std::uint64_t seed);

struct SurfacePoint {
  Eigen::Vector3d normal;  // unit
  double albedo = 1.0;
};

struct PixelObservation {
  Eigen::VectorXd intensities;  // length q
  IndexSet true_outliers;       // synthetic ground truth
};

struct Scene {
  std::vector<SurfacePoint> points;
  std::vector<PixelObservation> observations;

  Index count() const { return static_cast<Index>(points.size()); }
};

/// Orthonormal basis of null(L^T) as rows: projector * o annihilates the
/// Lambertian component, collapsing outlier estimation to y = Phi e with
/// Phi = projector. Columns keep their physical (non-unit) norms.
struct NullspaceSystem {
  Dictionary phi;              // (q-3) x q
  Eigen::MatrixXd projector;   // same matrix, the basis itself
};

NullspaceSystem nullspace_dictionary(const LightingRig& rig);

struct OutlierLaw {
  Index count_min = 0;
  Index count_max = 0;
  double magnitude_low = 0.2;
  double magnitude_high = 1.0;
};

/// Normals uniform on the upper hemisphere, albedo uniform [0.5, 1.5],
/// o = rho*L*n + e with outlier support uniform and magnitudes uniform on
/// +/-[magnitude_low, magnitude_high]. Intensities are not clamped.
Scene synthesize_scene(Index point_count, const LightingRig& rig,
                       const OutlierLaw& law, std::uint64_t seed);

/// Per-index outlier scores for one projected observation y; higher means
/// more likely outlier. Real engines are functions of y alone and ignore
/// the point index, which exists so test oracles can look up ground truth.
/// Engines must be pure (usable concurrently).
using SupportEngine =
    std::function<Eigen::VectorXd(Index point, const Eigen::VectorXd& y)>;

struct PointEstimate {
  Eigen::Vector3d normal;
  double angular_error_deg = 0.0;
};

struct StereoResult {
  std::vector<PointEstimate> estimates;
  double mean_angular_error_deg = 0.0;
};

double angular_error_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Scores every point with the engine, takes the `inlier_count` least
/// suspicious rows, least-squares fits rho*n from them, and reports the
/// angular error against the synthetic truth. Throws RankDeficientError
/// when the selected rows are geometrically degenerate.
StereoResult estimate_normals(const Scene& scene, const LightingRig& rig,
                              const SupportEngine& engine,
                              Index inlier_count = 4);

/// Plain least squares over all q rows (no outlier handling).
StereoResult naive_least_squares(const Scene& scene, const LightingRig& rig);

/// 4 uniformly random rows per point.
StereoResult random4_baseline(const Scene& scene, const LightingRig& rig,
                              std::uint64_t seed);

/// Engine wrappers.
SupportEngine oracle_engine(const Scene& scene);  // true outlier indicator
SupportEngine solver_magnitude_engine(
    const NullspaceSystem& system,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve);

void save_scene(const std::string& path, const Scene& scene);
Scene load_scene(const std::string& path);

}  // namespace sparselab
