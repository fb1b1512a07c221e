#include "qdlab/map_registry.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qdlab {

using conformal::ComposedScMap;
using conformal::HalfPlaneMap;
using conformal::ScPolygon;

MapRegistry::MapRegistry(std::string cache_dir) : cache_dir_(std::move(cache_dir)) {}

namespace {

ScPolygon square_polygon() {
  return {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0.5, 0.5, 0.5, 0.5}};
}

ScPolygon spur_polygon(double n, double top) {
  double w = 1.0 / n;
  return {{{0, 0}, {1, 0}, {1, 1}, {w, 1}, {w, top}, {0, top}},
          {0.5, 0.5, 0.5, 1.5, 0.5, 0.5}};
}

}  // namespace

std::shared_ptr<const HalfPlaneMap> MapRegistry::solve_cached(const ScPolygon& poly,
                                                              std::vector<double> init,
                                                              const std::string& key) {
  auto it = half_planes_.find(key);
  if (it != half_planes_.end()) return it->second;

  std::filesystem::path cache_file;
  if (!cache_dir_.empty()) {
    cache_file = std::filesystem::path(cache_dir_) / (key + ".json");
    if (std::filesystem::exists(cache_file)) {
      std::ifstream in(cache_file);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        auto mp = HalfPlaneMap::from_json(buf.str());
        if (mp->converged() && mp->polygon().vertices == poly.vertices) {
          half_planes_[key] = mp;
          return mp;
        }
      } catch (const std::exception&) {
        // stale cache entry: fall through to a fresh solve
      }
    }
  }

  auto mp = HalfPlaneMap::solve(poly, std::move(init), key);
  half_planes_[key] = mp;
  if (!cache_file.empty()) {
    std::filesystem::create_directories(cache_file.parent_path());
    std::ofstream out(cache_file);
    out << mp->to_json();
  }
  return mp;
}

std::shared_ptr<const HalfPlaneMap> MapRegistry::square_map() {
  return solve_cached(square_polygon(), {0.0}, "unit_square");
}

std::shared_ptr<const HalfPlaneMap> MapRegistry::spur_half_plane(double n, double top) {
  double modulus = n * (top - 1.0);
  std::ostringstream key;
  key << "spur_n" << n << "_top" << top;
  return solve_cached(spur_polygon(n, top), {0.0, -kPi * modulus, 0.0}, key.str());
}

std::shared_ptr<const ComposedScMap> MapRegistry::spur_map(double n, double top) {
  std::ostringstream name;
  name << "spur" << n << "x" << top;
  return std::make_shared<ComposedScMap>(square_map(), spur_half_plane(n, top),
                                         name.str());
}

std::shared_ptr<const ConformalMapBase> MapRegistry::resolve(const std::string& name) {
  auto it = named_.find(name);
  if (it != named_.end()) return it->second;

  std::shared_ptr<const ConformalMapBase> map;
  if (name == "identity") {
    map = std::make_shared<IdentityMap>();
  } else if (name.size() > 1 && name[0] == 'f') {
    bool sqrt_variant = name.size() > 2 && name[1] == 's';
    std::string digits = name.substr(sqrt_variant ? 2 : 1);
    double n = 0;
    try {
      n = std::stod(digits);
    } catch (...) {
      fail(ErrorCode::kBadInput, "unknown map '" + name + "'");
    }
    if (n < 2) fail(ErrorCode::kBadInput, "spur map needs n >= 2");
    // f_n targets carry a spur of area exactly 1 (top n+1), so the pullback
    // norm is 2 for every n; the sqrt-variant spur ends at sqrt(n).
    map = spur_map(n, sqrt_variant ? std::sqrt(n) : n + 1.0);
  } else {
    fail(ErrorCode::kBadInput, "unknown map '" + name + "'");
  }
  named_[name] = map;
  return map;
}

MapResolver MapRegistry::resolver() {
  return [this](const std::string& name) { return resolve(name); };
}

std::shared_ptr<const ComposedScMap> MapRegistry::sc_map(const PlanarDomain& target,
                                                         Complex p0, Complex p1, Complex p2) {
  if (target.kind() != PlanarDomain::Kind::kRectilinear)
    fail(ErrorCode::kBadInput, "sc_map wants a rectilinear target");
  const auto& vs = target.vertices();
  const std::size_t n = vs.size();
  auto find_vertex = [&](Complex p) -> std::size_t {
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(vs[i] - p) < 1e-12) return i;
    fail(ErrorCode::kBadInput, "normalization point is not a target vertex");
  };
  std::size_t i0 = find_vertex(p0), i1 = find_vertex(p1), i2 = find_vertex(p2);
  if ((i1 + n - i0) % n > (i2 + n - i0) % n)
    fail(ErrorCode::kBadInput, "normalization points out of cyclic order");

  // Re-root so the normalization points are vertices 0, 1, 2. Vertices
  // strictly between them keep general prevertices only if they sit between
  // pins; this artifact's targets have the three points cyclically adjacent.
  if ((i1 + n - i0) % n != 1 || (i2 + n - i1) % n != 1)
    fail(ErrorCode::kBadInput, "normalization points must be consecutive vertices");

  ScPolygon poly;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = (i0 + k) % n;
    Complex prev = vs[(i + n - 1) % n], cur = vs[i], next = vs[(i + 1) % n];
    Complex a = cur - prev, b = next - cur;
    double cross = a.real() * b.imag() - a.imag() * b.real();
    poly.vertices.push_back(cur);
    poly.angle_fracs.push_back(cross > 0 ? 0.5 : 1.5);
  }
  std::ostringstream key;
  key << "sc";
  for (const Complex& v : poly.vertices) key << "_" << v.real() << "," << v.imag();
  auto hp = solve_cached(poly, {}, key.str());
  return std::make_shared<ComposedScMap>(square_map(), hp, "sc_custom");
}

}  // namespace qdlab
