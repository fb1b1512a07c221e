#pragma once

#include <map>
#include <memory>
#include <string>

#include "qdlab/conformal/sc_map.hpp"
#include "qdlab/domain.hpp"
#include "qdlab/expr.hpp"

namespace qdlab {

/// Named conformal maps used by pullback expressions.
///
/// Names: "identity"; "fN" = map from the unit square onto Q_N =
/// [0,1]^2 u [0,1/N]x[1,N] fixing (0,0),(1,0),(1,1); "fsN" = the variant
/// with spur top sqrt(N). Solved maps are memoized, and optionally persisted
/// as versioned JSON parameter files under `cache_dir` so experiment reruns
/// skip the parameter solves.
class MapRegistry {
 public:
  explicit MapRegistry(std::string cache_dir = "");

  std::shared_ptr<const ConformalMapBase> resolve(const std::string& name);
  MapResolver resolver();

  std::shared_ptr<const conformal::HalfPlaneMap> square_map();
  std::shared_ptr<const conformal::HalfPlaneMap> spur_half_plane(double n, double top);
  std::shared_ptr<const conformal::ComposedScMap> spur_map(double n, double top);

  /// General rectilinear target: SC map from the unit square onto `target`
  /// fixing the three normalization points, which must be vertices of the
  /// target (and of the square boundary). The target polygon is re-rooted so
  /// these become vertices 0,1,2.
  std::shared_ptr<const conformal::ComposedScMap> sc_map(const PlanarDomain& target,
                                                         Complex p0, Complex p1, Complex p2);

 private:
  std::shared_ptr<const conformal::HalfPlaneMap> solve_cached(
      const conformal::ScPolygon& poly, std::vector<double> init, const std::string& key);

  std::string cache_dir_;
  std::map<std::string, std::shared_ptr<const conformal::HalfPlaneMap>> half_planes_;
  std::map<std::string, std::shared_ptr<const ConformalMapBase>> named_;
};

}  // namespace qdlab
