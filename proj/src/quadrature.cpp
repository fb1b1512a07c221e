#include "qdlab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace qdlab {

namespace {

// Gauss-Legendre nodes by Newton iteration on P_n; cached per order.
void compute_gl(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

struct GlTable {
  std::vector<double> x, w;
};

const GlTable& gl_table(int n) {
  static std::map<int, GlTable> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    GlTable t;
    compute_gl(n, t.x, t.w);
    it = cache.emplace(n, std::move(t)).first;
  }
  return it->second;
}

double gl_cell(const Rect& r, const Density& f, int order) {
  const GlTable& t = gl_table(order);
  const double cx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
  const double cy = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
  double sum = 0;
  for (int i = 0; i < order; ++i) {
    double xi = cx + hx * t.x[i];
    double row = 0;
    for (int j = 0; j < order; ++j) {
      double v = f(Complex(xi, cy + hy * t.x[j]));
      if (std::isfinite(v)) row += t.w[j] * v;
    }
    sum += t.w[i] * row;
  }
  return sum * hx * hy;
}

struct CellContext {
  const Density& f;
  const QuadratureOptions& opt;
  double tol_per_area;  // tol / total area
  double rel_accept;    // per-cell relative acceptance (scales with tol)
};

bool cell_excised(const Rect& r, const QuadratureOptions& opt, bool& straddles) {
  straddles = false;
  for (const auto& e : opt.excisions) {
    double dx = std::max({r.x0 - e.center.real(), e.center.real() - r.x1, 0.0});
    double dy = std::max({r.y0 - e.center.imag(), e.center.imag() - r.y1, 0.0});
    double dist = std::hypot(dx, dy);
    if (dist >= e.radius) continue;
    // Cell meets the excised disk. Fully inside iff all corners are.
    bool all_in = true;
    for (int c = 0; c < 4; ++c) {
      Complex corner{c & 1 ? r.x1 : r.x0, c & 2 ? r.y1 : r.y0};
      if (std::abs(corner - e.center) > e.radius) all_in = false;
    }
    if (all_in) return true;
    straddles = true;
  }
  return false;
}

bool point_excised(Complex z, const QuadratureOptions& opt) {
  for (const auto& e : opt.excisions)
    if (std::abs(z - e.center) < e.radius) return true;
  return false;
}

// Midpoint-sample fallback for cells that still straddle an excision disk at
// the depth cap: only the part outside the disk counts.
QuadratureResult sampled_cell(const Rect& r, const CellContext& ctx) {
  QuadratureResult out;
  double sum = 0;
  int used = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Complex z{r.x0 + (i + 0.5) / 4 * r.width(), r.y0 + (j + 0.5) / 4 * r.height()};
      if (point_excised(z, ctx.opt)) continue;
      double v = ctx.f(z);
      if (std::isfinite(v)) sum += v;
      ++used;
    }
  out.value = sum / 16.0 * r.area();
  out.error_estimate = out.value * 0.5;
  out.cells = 1;
  return out;
}

QuadratureResult adapt_cell(const Rect& r, const CellContext& ctx, double coarse, int depth) {
  QuadratureResult out;
  bool straddles = false;
  if (cell_excised(r, ctx.opt, straddles)) return out;  // fully excised: zero

  for (const Complex& p : ctx.opt.avoid) {
    if (r.contains(p, ctx.opt.excise_radius) && r.width() <= 4 * ctx.opt.excise_radius &&
        r.height() <= 4 * ctx.opt.excise_radius) {
      // Vanishing-measure neighborhood of a puncture / expression zero:
      // integrable there, contribution below tolerance by construction.
      return out;
    }
  }

  if (straddles) {
    // Excision-boundary cells: refine a bounded number of levels past the
    // disk scale, then sample. The abandoned ring area is O(radius * cell).
    double rad = ctx.opt.excisions.empty() ? 1.0 : ctx.opt.excisions[0].radius;
    if (r.width() < 0.02 * rad || depth >= ctx.opt.max_depth) return sampled_cell(r, ctx);
    Rect kids[4];
    const double mx = 0.5 * (r.x0 + r.x1), my = 0.5 * (r.y0 + r.y1);
    kids[0] = {r.x0, r.y0, mx, my};
    kids[1] = {mx, r.y0, r.x1, my};
    kids[2] = {r.x0, my, mx, r.y1};
    kids[3] = {mx, my, r.x1, r.y1};
    for (const Rect& kid : kids) {
      bool kid_straddles = false;
      if (cell_excised(kid, ctx.opt, kid_straddles)) continue;
      out += adapt_cell(kid, ctx, gl_cell(kid, ctx.f, ctx.opt.gl_order), depth + 1);
    }
    return out;
  }

  Rect kids[4];
  const double mx = 0.5 * (r.x0 + r.x1), my = 0.5 * (r.y0 + r.y1);
  kids[0] = {r.x0, r.y0, mx, my};
  kids[1] = {mx, r.y0, r.x1, my};
  kids[2] = {r.x0, my, mx, r.y1};
  kids[3] = {mx, my, r.x1, r.y1};
  double fine = 0;
  double kid_vals[4];
  for (int k = 0; k < 4; ++k) {
    kid_vals[k] = gl_cell(kids[k], ctx.f, ctx.opt.gl_order);
    fine += kid_vals[k];
  }

  double budget = std::max(ctx.tol_per_area * r.area(), 1e-300);
  double diff = std::abs(fine - coarse);
  bool accept = diff <= budget || diff <= ctx.rel_accept * std::abs(fine);
  if (accept || depth >= ctx.opt.max_depth) {
    out.value = fine;
    out.error_estimate = diff;
    out.cells = 1;
    out.converged = accept || depth < ctx.opt.max_depth;
    return out;
  }
  for (int k = 0; k < 4; ++k) out += adapt_cell(kids[k], ctx, kid_vals[k], depth + 1);
  return out;
}

}  // namespace

const std::vector<double>& gl_nodes(int n) { return gl_table(n).x; }
const std::vector<double>& gl_weights(int n) { return gl_table(n).w; }

QuadratureResult integrate_rect(const Rect& rect, const Density& f, double tol,
                                const QuadratureOptions& opt) {
  CellContext ctx{f, opt, tol / std::max(rect.area(), 1e-300), std::min(1e-4, tol)};
  double coarse = gl_cell(rect, f, opt.gl_order);
  return adapt_cell(rect, ctx, coarse, 0);
}

namespace {

// Disk integration: quadtree over the bounding square; cells fully inside
// integrate normally, straddling cells subdivide, and at max depth the area
// fraction inside is estimated from a 4x4 subsample.
QuadratureResult disk_cell(const Rect& r, const CellContext& ctx, int depth) {
  QuadratureResult out;
  double far2 = 0;  // squared distance of farthest corner
  for (int c = 0; c < 4; ++c) {
    Complex corner{c & 1 ? r.x1 : r.x0, c & 2 ? r.y1 : r.y0};
    far2 = std::max(far2, std::norm(corner));
  }
  double dx = std::max({r.x0, -r.x1, 0.0});
  double dy = std::max({r.y0, -r.y1, 0.0});
  if (dx * dx + dy * dy >= 1.0) return out;  // cell outside the disk
  if (far2 <= 1.0) {
    double coarse = gl_cell(r, ctx.f, ctx.opt.gl_order);
    return adapt_cell(r, ctx, coarse, depth);
  }
  if (depth >= ctx.opt.boundary_depth) {
    int in = 0;
    double sum = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Complex z{r.x0 + (i + 0.5) / 4 * r.width(), r.y0 + (j + 0.5) / 4 * r.height()};
        if (std::abs(z) < 1.0 && !point_excised(z, ctx.opt)) {
          ++in;
          double v = ctx.f(z);
          if (std::isfinite(v)) sum += v;
        }
      }
    out.value = in ? sum / 16.0 * r.area() : 0.0;
    out.error_estimate = out.value * 0.25 + r.area() * 1e-12;
    out.cells = 1;
    return out;
  }
  const double mx = 0.5 * (r.x0 + r.x1), my = 0.5 * (r.y0 + r.y1);
  Rect kids[4] = {{r.x0, r.y0, mx, my}, {mx, r.y0, r.x1, my}, {r.x0, my, mx, r.y1},
                  {mx, my, r.x1, r.y1}};
  for (const Rect& kid : kids) out += disk_cell(kid, ctx, depth + 1);
  return out;
}

}  // namespace

QuadratureResult integrate_domain(const PlanarDomain& domain, const Density& f, double tol,
                                  const QuadratureOptions& opt) {
  QuadratureOptions local = opt;
  for (const Complex& p : domain.punctures()) local.avoid.push_back(p);
  QuadratureResult out;
  if (domain.kind() == PlanarDomain::Kind::kUnitDisk) {
    // Boundary cells cap at depth ~14 so their fallback error stays small.
    CellContext ctx{f, local, tol / kPi, std::min(1e-4, tol)};
    out = disk_cell({-1, -1, 1, 1}, ctx, 0);
  } else {
    double total = domain.area();
    for (const Rect& r : domain.rectangles())
      out += integrate_rect(r, f, tol * r.area() / total, local);
  }
  return out;
}

double integrate_segment(Complex a, Complex b, const std::function<double(Complex)>& f,
                         int panels, int order) {
  const GlTable& t = gl_table(order);
  double len = std::abs(b - a);
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    Complex pa = a + (b - a) * (double(p) / panels);
    Complex pb = a + (b - a) * (double(p + 1) / panels);
    Complex mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
    double s = 0;
    for (int i = 0; i < order; ++i) s += t.w[i] * f(mid + half * t.x[i]);
    total += s * 0.5 * (len / panels);
  }
  return total;
}

}  // namespace qdlab
