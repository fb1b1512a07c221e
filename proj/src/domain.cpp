#include "qdlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace qdlab {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPointOutsideDomain: return "point-outside-domain";
    case ErrorCode::kEvaluationAtPuncture: return "evaluation-at-puncture";
    case ErrorCode::kMapNotConverged: return "map-not-converged";
    case ErrorCode::kQuadratureNotConverged: return "quadrature-not-converged";
    case ErrorCode::kDomainMismatch: return "domain-mismatch";
    case ErrorCode::kZeroOnChartBoundary: return "zero-on-chart-boundary";
    case ErrorCode::kBranchContinuationFailure: return "branch-continuation-failure";
    case ErrorCode::kArcExitsDomain: return "arc-exits-domain";
    case ErrorCode::kClassSpecInvalid: return "class-spec-invalid";
    case ErrorCode::kGridTooCoarse: return "grid-too-coarse";
    case ErrorCode::kStartAtZero: return "start-at-zero";
    case ErrorCode::kStepCollapse: return "step-collapse";
    case ErrorCode::kZeroOnBoundary: return "zero-on-boundary";
    case ErrorCode::kNotACrosscut: return "not-a-crosscut";
    case ErrorCode::kInterleavingWithinLamination: return "interleaving-within-one-lamination";
    case ErrorCode::kAmbientMismatch: return "ambient-mismatch";
    case ErrorCode::kExcessiveUnassignedMass: return "excessive-unassigned-mass";
    case ErrorCode::kParameterSolverDivergence: return "parameter-solver-divergence";
    case ErrorCode::kGridDegenerate: return "grid-degenerate";
    case ErrorCode::kRegionsOverlap: return "regions-overlap";
    case ErrorCode::kFamilyNotRepresentable: return "family-not-representable-on-grid";
    case ErrorCode::kConfigurationInvalid: return "configuration-invalid";
    case ErrorCode::kBadInput: return "bad-input";
  }
  return "unknown-error";
}

namespace {

double point_segment_distance(Complex p, Complex a, Complex b) {
  Complex ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace

PlanarDomain PlanarDomain::rectilinear(std::vector<Complex> vertices,
                                       std::vector<Complex> punctures) {
  if (vertices.size() < 4) fail(ErrorCode::kBadInput, "polygon needs >= 4 vertices");
  PlanarDomain d;
  d.kind_ = Kind::kRectilinear;
  d.vertices_ = std::move(vertices);
  d.punctures_ = std::move(punctures);
  d.finish_construction();
  return d;
}

PlanarDomain PlanarDomain::unit_disk(std::vector<Complex> punctures) {
  PlanarDomain d;
  d.kind_ = Kind::kUnitDisk;
  d.punctures_ = std::move(punctures);
  d.bbox_ = {-1, -1, 1, 1};
  for (const Complex& p : d.punctures_)
    if (std::abs(p) >= 1.0) fail(ErrorCode::kBadInput, "puncture outside the disk");
  return d;
}

PlanarDomain PlanarDomain::unit_square() { return rectangle(0, 0, 1, 1); }

PlanarDomain PlanarDomain::rectangle(double x0, double y0, double x1, double y1) {
  PlanarDomain d = rectilinear({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  d.set_boundary_arcs({{"bottom", 0, 1}, {"right", 1, 2}, {"top", 2, 3}, {"left", 3, 0}});
  return d;
}

PlanarDomain PlanarDomain::square_with_spur(double width, double top) {
  if (width <= 0 || width >= 1 || top <= 1)
    fail(ErrorCode::kBadInput, "spur wants 0<width<1 and top>1");
  return rectilinear(
      {{0, 0}, {1, 0}, {1, 1}, {width, 1}, {width, top}, {0, top}});
}

void PlanarDomain::set_boundary_arcs(std::vector<BoundaryArc> arcs) {
  arcs_ = std::move(arcs);
}

void PlanarDomain::finish_construction() {
  const std::size_t n = vertices_.size();
  // Axis-parallel edge check and bounding box.
  bbox_ = {vertices_[0].real(), vertices_[0].imag(), vertices_[0].real(), vertices_[0].imag()};
  for (std::size_t i = 0; i < n; ++i) {
    Complex a = vertices_[i], b = vertices_[(i + 1) % n];
    if (a.real() != b.real() && a.imag() != b.imag())
      fail(ErrorCode::kBadInput, "edges must be axis-parallel");
    if (a == b) fail(ErrorCode::kBadInput, "repeated vertex");
    bbox_.x0 = std::min(bbox_.x0, a.real());
    bbox_.x1 = std::max(bbox_.x1, a.real());
    bbox_.y0 = std::min(bbox_.y0, a.imag());
    bbox_.y1 = std::max(bbox_.y1, a.imag());
  }

  // Cumulative boundary length at each vertex.
  vertex_coord_.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    vertex_coord_[i + 1] = vertex_coord_[i] + std::abs(vertices_[(i + 1) % n] - vertices_[i]);

  // Slab decomposition into disjoint rectangles.
  std::set<double> ys;
  for (const Complex& v : vertices_) ys.insert(v.imag());
  std::vector<double> yv(ys.begin(), ys.end());
  for (std::size_t s = 0; s + 1 < yv.size(); ++s) {
    double ymid = 0.5 * (yv[s] + yv[s + 1]);
    // Vertical edges crossing this slab, sorted by x; interior alternates.
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) {
      Complex a = vertices_[i], b = vertices_[(i + 1) % n];
      if (a.real() == b.real()) {
        double lo = std::min(a.imag(), b.imag()), hi = std::max(a.imag(), b.imag());
        if (lo <= ymid && ymid <= hi) xs.push_back(a.real());
      }
    }
    std::sort(xs.begin(), xs.end());
    if (xs.size() % 2 != 0) fail(ErrorCode::kBadInput, "polygon is not simple");
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
      rectangles_.push_back({xs[k], yv[s], xs[k + 1], yv[s + 1]});
  }

  // Merge vertically adjacent rectangles with identical x-span (cosmetic but
  // keeps cell counts low for quadrature).
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < rectangles_.size() && !merged; ++i)
      for (std::size_t j = 0; j < rectangles_.size() && !merged; ++j) {
        if (i == j) continue;
        Rect &a = rectangles_[i], &b = rectangles_[j];
        if (a.x0 == b.x0 && a.x1 == b.x1 && a.y1 == b.y0) {
          a.y1 = b.y1;
          rectangles_.erase(rectangles_.begin() + j);
          merged = true;
        }
      }
  }

  for (const Complex& p : punctures_)
    if (!contains(p)) fail(ErrorCode::kBadInput, "puncture outside the domain");
}

double PlanarDomain::area() const {
  if (kind_ == Kind::kUnitDisk) return kPi;
  double a = 0;
  for (const Rect& r : rectangles_) a += r.area();
  return a;
}

bool PlanarDomain::contains(Complex z) const {
  if (kind_ == Kind::kUnitDisk) return std::abs(z) < 1.0 - 1e-12;
  for (const Rect& r : rectangles_)
    if (z.real() > r.x0 && z.real() < r.x1 && z.imag() > r.y0 && z.imag() < r.y1) return true;
  // Points on internal rectangle seams are interior; retest with open slabs.
  for (const Rect& r : rectangles_)
    if (z.real() >= r.x0 && z.real() <= r.x1 && z.imag() >= r.y0 && z.imag() <= r.y1)
      return distance_to_boundary(z) > 0.0;
  return false;
}

bool PlanarDomain::strictly_inside(Complex z, double margin) const {
  return contains(z) && distance_to_boundary(z) >= margin;
}

bool PlanarDomain::is_puncture(Complex z, double tol) const {
  for (const Complex& p : punctures_)
    if (std::abs(z - p) <= tol) return true;
  return false;
}

double PlanarDomain::distance_to_boundary(Complex z) const {
  if (kind_ == Kind::kUnitDisk) return 1.0 - std::abs(z);
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(z, vertices_[i], vertices_[(i + 1) % n]));
  return d;
}

double PlanarDomain::boundary_length() const {
  if (kind_ == Kind::kUnitDisk) return 2 * kPi;
  return vertex_coord_.back();
}

double PlanarDomain::boundary_coordinate(Complex z, double tol) const {
  if (kind_ == Kind::kUnitDisk) {
    double r = std::abs(z);
    if (std::abs(r - 1.0) > tol + 1e-6) fail(ErrorCode::kBadInput, "not a boundary point");
    double a = std::arg(z) / (2 * kPi);
    return a < 0 ? a + 1 : a;
  }
  const std::size_t n = vertices_.size();
  double best = std::numeric_limits<double>::infinity();
  double coord = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Complex a = vertices_[i], b = vertices_[(i + 1) % n];
    Complex ab = b - a;
    double len = std::abs(ab);
    double t = std::clamp(((z - a).real() * ab.real() + (z - a).imag() * ab.imag()) / (len * len),
                          0.0, 1.0);
    double d = std::abs(z - (a + t * ab));
    if (d < best) {
      best = d;
      coord = (vertex_coord_[i] + t * len) / vertex_coord_.back();
    }
  }
  if (best > tol + 1e-6) fail(ErrorCode::kBadInput, "not a boundary point");
  return coord >= 1.0 ? coord - 1.0 : coord;
}

Complex PlanarDomain::boundary_point(double coord) const {
  coord -= std::floor(coord);
  if (kind_ == Kind::kUnitDisk) return std::polar(1.0, 2 * kPi * coord);
  double s = coord * vertex_coord_.back();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (s <= vertex_coord_[i + 1] || i + 1 == n) {
      double t = (s - vertex_coord_[i]) / (vertex_coord_[i + 1] - vertex_coord_[i]);
      return vertices_[i] + t * (vertices_[(i + 1) % n] - vertices_[i]);
    }
  }
  return vertices_[0];
}

const BoundaryArc* PlanarDomain::find_arc(const std::string& name) const {
  for (const BoundaryArc& a : arcs_)
    if (a.name == name) return &a;
  return nullptr;
}

bool PlanarDomain::on_arc(double coord, const BoundaryArc& arc) const {
  double lo, hi;
  if (kind_ == Kind::kUnitDisk) {
    lo = arc.from / 360.0;  // disk arcs are stored in degrees
    hi = arc.to / 360.0;
  } else {
    lo = vertex_coord_[arc.from] / vertex_coord_.back();
    hi = vertex_coord_[arc.to == 0 ? vertices_.size() : std::size_t(arc.to)] /
         vertex_coord_.back();
  }
  coord -= std::floor(coord);
  const double eps = 1e-9;
  if (lo <= hi) return coord >= lo - eps && coord <= hi + eps;
  return coord >= lo - eps || coord <= hi + eps;  // wraps through 0
}

std::string PlanarDomain::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_ == Kind::kRectilinear ? "rectilinear" : "disk";
  if (kind_ == Kind::kRectilinear) {
    auto& v = j["vertices"] = nlohmann::json::array();
    for (const Complex& p : vertices_) v.push_back({p.real(), p.imag()});
  }
  auto& q = j["punctures"] = nlohmann::json::array();
  for (const Complex& p : punctures_) q.push_back({p.real(), p.imag()});
  return j.dump();
}

PlanarDomain PlanarDomain::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::vector<Complex> punctures;
  if (j.contains("punctures"))
    for (const auto& p : j["punctures"]) punctures.push_back({p[0], p[1]});
  std::string kind = j.value("kind", "rectilinear");
  if (kind == "disk" || kind == "unit-disk") return unit_disk(punctures);
  std::vector<Complex> vertices;
  for (const auto& p : j["vertices"]) vertices.push_back({p[0], p[1]});
  return rectilinear(std::move(vertices), std::move(punctures));
}

bool PlanarDomain::same_as(const PlanarDomain& other) const {
  return kind_ == other.kind_ && vertices_ == other.vertices_ &&
         punctures_ == other.punctures_;
}

CompactExhaustion::CompactExhaustion(const PlanarDomain& domain, std::vector<double> margins)
    : domain_(domain), margins_(std::move(margins)) {
  for (std::size_t k = 0; k + 1 < margins_.size(); ++k)
    if (margins_[k] <= margins_[k + 1])
      fail(ErrorCode::kBadInput, "exhaustion margins must strictly decrease");
  if (!margins_.empty() && margins_.back() <= 0)
    fail(ErrorCode::kBadInput, "exhaustion margins must be positive");
}

bool CompactExhaustion::region_contains(std::size_t k, Complex z) const {
  return domain_.strictly_inside(z, margins_[k]);
}

std::vector<Complex> CompactExhaustion::sample_region(std::size_t k, int per_axis) const {
  std::vector<Complex> pts;
  Rect bb = domain_.bounding_box();
  for (int i = 0; i <= per_axis; ++i)
    for (int j = 0; j <= per_axis; ++j) {
      Complex z{bb.x0 + (bb.x1 - bb.x0) * i / per_axis,
                bb.y0 + (bb.y1 - bb.y0) * j / per_axis};
      if (region_contains(k, z) && !domain_.is_puncture(z, margins_[k] * 0.5))
        pts.push_back(z);
    }
  return pts;
}

}  // namespace qdlab
