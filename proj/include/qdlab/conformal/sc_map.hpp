#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdlab/conformal_base.hpp"
#include "qdlab/errors.hpp"
#include "qdlab/numeric.hpp"

namespace qdlab::conformal {

/// Polygon data for the half-plane parameter problem. Vertices ccw;
/// vertices 0, 1, 2 are the normalization points, with prevertices pinned at
/// 0, 1 and infinity respectively. Vertex 2 must be a pi/2 corner (true for
/// every rectilinear polygon this artifact maps). All remaining prevertices
/// then lie ordered on the negative real axis, so the parameter problem can
/// run on log-gap variables without wrap-around.
struct ScPolygon {
  std::vector<Complex> vertices;
  std::vector<double> angle_fracs;  // interior angle / pi

  double beta(std::size_t k) const { return angle_fracs[k] - 1.0; }
  std::size_t size() const { return vertices.size(); }
};

struct ScSolveReport {
  double residual_norm = 0;
  double closure_error = 0;
  int iterations = 0;
  bool converged = false;
  bool crowded = false;         // some prevertex gap below 1e-8 of scale
  bool cluster_active = false;  // crowded pair handled in log space
  double min_gap = 0;
};

/// Schwarz-Christoffel map from the upper half-plane onto a polygon.
///
/// A pair of adjacent pi/2 vertices whose prevertices collide (the deep end
/// of a thin spur) is represented as a *cluster*: the product of its two
/// integrand factors is kept in the exact form ((t-c)^2 - lambda^2)^{-1/2}
/// with lambda stored as log(lambda). That keeps the parameter problem and
/// all evaluations in ordinary doubles even when lambda underflows (the
/// Example Q_n domains reach lambda ~ e^{-pi n(n-1)}).
class HalfPlaneMap : public ConformalMapBase {
 public:
  /// Solves the parameter problem. `init_gaps` seeds the log-gap variables
  /// (leftmost last); empty means unit gaps.
  static std::shared_ptr<HalfPlaneMap> solve(const ScPolygon& poly,
                                             std::vector<double> init_gaps = {},
                                             std::string name = "sc");

  /// Rebuild from solved parameters (the map cache path).
  static std::shared_ptr<HalfPlaneMap> from_parameters(const ScPolygon& poly,
                                                       std::vector<double> gaps,
                                                       std::string name);

  Complex map(Complex zeta) const override;
  Complex derivative(Complex zeta) const override;
  bool converged() const override { return report_.converged; }
  std::string name() const override { return name_; }

  /// Newton inverse constrained to the open half-plane.
  Complex inverse(Complex w, std::optional<Complex> guess = {}) const;

  const ScPolygon& polygon() const { return poly_; }
  const ScSolveReport& report() const { return report_; }
  const std::vector<double>& gaps() const { return gaps_; }
  Complex scale() const { return C_; }

  bool cluster_active() const { return cluster_; }
  int cluster_left() const { return cluster_left_; }
  double cluster_center() const { return cl_center_; }
  double cluster_log_lambda() const { return cl_loglam_; }
  /// |C| * prod_{k not in cluster} |c - x_k|^{beta_k}; the logarithmic
  /// channel residue (spur width / pi for the Q_n family).
  double cluster_strength() const;

  /// Finite prevertices (skips the vertex at infinity). For the cluster pair
  /// the entries are both the cluster center.
  std::vector<double> finite_prevertices() const;
  /// Points where |f'| is singular, for quadrature refinement, as (position,
  /// radius) pairs on the real axis.
  struct SingularPoint {
    double x;
    double radius;
  };
  std::vector<SingularPoint> singular_points() const;

  std::string to_json() const;
  static std::shared_ptr<HalfPlaneMap> from_json(const std::string& text);

 private:
  HalfPlaneMap() = default;

  void rebuild(bool full_solve);
  void refresh_geometry();  // prevertices and cluster state from gaps_
  std::vector<double> residuals() const;

  // --- integrand ---
  Complex log_integrand(Complex t) const;
  Complex log_integrand_excl(Complex t, int skip_a, int skip_b) const;
  Complex cluster_log(Complex u) const;  // log((u)^2 - lambda^2), u = t - c
  Complex integrand(Complex t) const { return std::exp(log_integrand(t)); }

  // --- side integrals (complex; phase constant on each side) ---
  Complex side_integral(std::size_t k) const;
  Complex one_sided(double a, double b, double beta_a, int k_excl) const;
  Complex regular_segment(Complex a, Complex b, int depth) const;
  Complex infinite_side(bool right) const;  // sides adjacent to the inf vertex
  Complex wall_near_cluster(bool left_of_cluster, double eps) const;
  Complex cluster_top_side() const;
  double clearance(Complex a, Complex b, int skip_a = -1, int skip_b = -1) const;
  double wall_eps() const;

  void build_anchors();

  ScPolygon poly_;
  std::string name_;
  std::vector<double> gaps_;  // log-gaps leftward from 0; size N-3
  std::vector<double> x_;     // prevertices by vertex index; x_[2] = +inf
  bool cluster_ = false;
  int cluster_left_ = -1;  // vertex index of the left cluster member
  double cl_center_ = 0;
  double cl_loglam_ = 0;
  Complex C_{1, 0};
  ScSolveReport report_;
  std::vector<std::pair<Complex, Complex>> anchors_;  // (zeta, f(zeta))
  double span_ = 1;  // |leftmost prevertex| + 1
};

/// Composition f = S2 o S1^{-1} between two half-plane maps sharing the
/// normalization triple; fixes the three common boundary points.
class ComposedScMap : public ConformalMapBase {
 public:
  ComposedScMap(std::shared_ptr<const HalfPlaneMap> source_map,
                std::shared_ptr<const HalfPlaneMap> target_map, std::string name)
      : s1_(std::move(source_map)), s2_(std::move(target_map)), name_(std::move(name)) {}

  Complex map(Complex z) const override;
  Complex derivative(Complex z) const override;
  bool converged() const override { return s1_->converged() && s2_->converged(); }
  std::string name() const override { return name_; }

  const HalfPlaneMap& source() const { return *s1_; }
  const HalfPlaneMap& target() const { return *s2_; }
  std::shared_ptr<const HalfPlaneMap> source_ptr() const { return s1_; }
  std::shared_ptr<const HalfPlaneMap> target_ptr() const { return s2_; }

 private:
  std::shared_ptr<const HalfPlaneMap> s1_, s2_;
  std::string name_;
  mutable Complex warm_zeta_{0.5, 1.0};  // Newton warm start (single-threaded)
};

}  // namespace qdlab::conformal
