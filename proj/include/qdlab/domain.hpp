#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdlab/errors.hpp"
#include "qdlab/numeric.hpp"

namespace qdlab {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(Complex z, double pad = 0.0) const {
    return z.real() >= x0 - pad && z.real() <= x1 + pad && z.imag() >= y0 - pad &&
           z.imag() <= y1 + pad;
  }
};

/// A named closed boundary arc, [from_vertex, to_vertex) in cyclic vertex
/// order for polygons, or an angle range for the disk.
struct BoundaryArc {
  std::string name;
  int from = 0;
  int to = 0;
};

/// Planar domain hosting quadratic differentials: a simple rectilinear
/// polygon (axis-parallel edges, ccw) or the unit disk, with optional
/// interior punctures and named boundary arcs.
class PlanarDomain {
 public:
  enum class Kind { kRectilinear, kUnitDisk };

  static PlanarDomain rectilinear(std::vector<Complex> vertices,
                                  std::vector<Complex> punctures = {});
  static PlanarDomain unit_disk(std::vector<Complex> punctures = {});
  static PlanarDomain unit_square();
  /// Axis-aligned rectangle with edges named bottom/right/top/left.
  static PlanarDomain rectangle(double x0, double y0, double x1, double y1);
  /// [0,1]^2 with the spur [0,1/n] x [1,h] attached on top (Example Q_n
  /// geometry: h = n, or h = sqrt(n) for the integrable variant).
  static PlanarDomain square_with_spur(double width, double top);

  Kind kind() const { return kind_; }
  const std::vector<Complex>& vertices() const { return vertices_; }
  const std::vector<Complex>& punctures() const { return punctures_; }
  const std::vector<BoundaryArc>& boundary_arcs() const { return arcs_; }
  void set_boundary_arcs(std::vector<BoundaryArc> arcs);

  /// Decomposition of a rectilinear polygon into disjoint rectangles
  /// (horizontal slab sweep); the disk has none.
  const std::vector<Rect>& rectangles() const { return rectangles_; }

  Rect bounding_box() const { return bbox_; }
  double area() const;

  bool contains(Complex z) const;          // open-domain membership
  bool strictly_inside(Complex z, double margin) const;
  bool is_puncture(Complex z, double tol = 1e-12) const;
  double distance_to_boundary(Complex z) const;

  /// Total boundary length (perimeter, or 2*pi for the disk).
  double boundary_length() const;
  /// Normalized cyclic boundary coordinate in [0,1): arc length from vertex 0
  /// (polygon) or angle/2pi (disk). `z` must lie within `tol` of the boundary.
  double boundary_coordinate(Complex z, double tol = 1e-9) const;
  Complex boundary_point(double coord) const;  // inverse of the above

  const BoundaryArc* find_arc(const std::string& name) const;
  /// True if the boundary coordinate lies on the named arc.
  bool on_arc(double coord, const BoundaryArc& arc) const;

  std::string to_json() const;
  static PlanarDomain from_json(const std::string& json_text);

  bool same_as(const PlanarDomain& other) const;

 private:
  Kind kind_ = Kind::kRectilinear;
  std::vector<Complex> vertices_;
  std::vector<Complex> punctures_;
  std::vector<BoundaryArc> arcs_;
  std::vector<Rect> rectangles_;
  std::vector<double> vertex_coord_;  // cumulative boundary length at vertices
  Rect bbox_;

  void finish_construction();
};

/// Nested closed sub-regions exhausting the open domain, parameterized by a
/// decreasing inset margin sequence. Region k is {z : dist(z, boundary) >=
/// margin_k, z in domain}; membership is all the downstream code needs.
class CompactExhaustion {
 public:
  CompactExhaustion(const PlanarDomain& domain, std::vector<double> margins);

  std::size_t size() const { return margins_.size(); }
  double margin(std::size_t k) const { return margins_[k]; }
  bool region_contains(std::size_t k, Complex z) const;
  /// Sample grid of points in region k (for sup-norm estimates).
  std::vector<Complex> sample_region(std::size_t k, int per_axis) const;

  const PlanarDomain& domain() const { return domain_; }

 private:
  PlanarDomain domain_;
  std::vector<double> margins_;
};

}  // namespace qdlab
