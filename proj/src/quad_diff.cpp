#include "qdlab/quad_diff.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qdlab/conformal/sc_map.hpp"

namespace qdlab {

namespace {

// kappa0 = lim_{S->inf} [ int_{H, |s|<S} |s^2-1|^{-1} dA - pi log S ]:
// the scale-invariant constant of the cluster-zone mass formula.
constexpr double kKappa0 = 2.1775860903036021;

using conformal::ComposedScMap;
using conformal::HalfPlaneMap;

void collect_sc_pullbacks(const Expr& e, std::vector<const ComposedScMap*>& out) {
  if (e.op == Expr::Op::kPullback) {
    if (auto* m = dynamic_cast<const ComposedScMap*>(e.map.get())) out.push_back(m);
  }
  if (e.a) collect_sc_pullbacks(*e.a, out);
  if (e.b) collect_sc_pullbacks(*e.b, out);
}

// Evaluation of the expression transplanted to the parameter half-plane:
// z := S1(zeta) (computed lazily), pullbacks through the shared S1 collapse
// to psi(S2(zeta)) (S2'(zeta)/S1'(zeta))^2 with closed-form derivatives.
struct TransplantCtx {
  const HalfPlaneMap* s1;
  Complex zeta;
  mutable bool have_z = false;
  mutable Complex z;

  Complex z_point() const {
    if (!have_z) {
      z = s1->map(zeta);
      have_z = true;
    }
    return z;
  }
};

Complex eval_transplanted(const Expr& e, const TransplantCtx& ctx) {
  switch (e.op) {
    case Expr::Op::kConst:
      return e.value;
    case Expr::Op::kZ:
      return ctx.z_point();
    case Expr::Op::kAdd:
      return eval_transplanted(*e.a, ctx) + eval_transplanted(*e.b, ctx);
    case Expr::Op::kSub:
      return eval_transplanted(*e.a, ctx) - eval_transplanted(*e.b, ctx);
    case Expr::Op::kMul:
      return eval_transplanted(*e.a, ctx) * eval_transplanted(*e.b, ctx);
    case Expr::Op::kDiv:
      return eval_transplanted(*e.a, ctx) / eval_transplanted(*e.b, ctx);
    case Expr::Op::kPow:
      return std::pow(eval_transplanted(*e.a, ctx),
                      Complex(double(e.pow_num) / double(e.pow_den), 0));
    case Expr::Op::kExp:
      return std::exp(eval_transplanted(*e.a, ctx));
    case Expr::Op::kPullback: {
      auto* m = dynamic_cast<const ComposedScMap*>(e.map.get());
      if (m && &m->source() == ctx.s1) {
        Complex d2 = m->target().derivative(ctx.zeta);
        Complex d1 = ctx.s1->derivative(ctx.zeta);
        Complex fp = d2 / d1;
        Complex psi = e.a->depends_on_z ? eval_expr(*e.a, m->target().map(ctx.zeta))
                                        : eval_expr(*e.a, Complex(0, 0));
        return fp * fp * psi;
      }
      return eval_expr(e, ctx.z_point());
    }
  }
  fail(ErrorCode::kBadInput, "corrupt expression node");
}

Complex cayley_to_halfplane(Complex w) { return Complex(0, 1) * (1.0 + w) / (1.0 - w); }

// Exact Moebius image of the circle |zeta - c| = eps under the inverse
// Cayley transform w = (zeta - i)/(zeta + i), as a disk in the w-plane.
QuadratureOptions::Excision cluster_excision_disk(double c, double eps) {
  auto cay = [](Complex zeta) { return (zeta - Complex(0, 1)) / (zeta + Complex(0, 1)); };
  Complex p1 = cay(Complex(c - eps, 0));
  Complex p2 = cay(Complex(c + eps, 0));
  Complex p3 = cay(Complex(c, eps));
  // Circumcenter of the three image points.
  double ax = p1.real(), ay = p1.imag(), bx = p2.real(), by = p2.imag(),
         cx = p3.real(), cy = p3.imag();
  double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) +
               (cx * cx + cy * cy) * (ay - by)) /
              d;
  double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) +
               (cx * cx + cy * cy) * (bx - ax)) /
              d;
  Complex center(ux, uy);
  return {center, std::abs(p1 - center)};
}

struct ClusterPatch {
  double mass;
  QuadratureOptions::Excision excision;
};

// Closed-form mass of |psi| |S2'|^2 over the half-disk |zeta - c| < eps:
// strength^2 |psi_deep| (pi log(eps/lambda) + kappa0), all in log space.
ClusterPatch make_cluster_patch(const Expr& e, const ComposedScMap& m) {
  const HalfPlaneMap& s2 = m.target();
  double c = s2.cluster_center();
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& sp : s2.singular_points())
    if (std::abs(sp.x - c) > 0) dmin = std::min(dmin, std::abs(sp.x - c));
  for (double x : m.source().finite_prevertices())
    dmin = std::min(dmin, std::abs(x - c));
  double eps = 0.05 * dmin;
  double strength = s2.cluster_strength();
  // psi sampled at the far end of the spur (constant psi in all registered
  // experiments; a varying psi would need a spur-resolved weighting).
  double psi_abs = 1.0;
  if (e.op == Expr::Op::kPullback && e.a)
    psi_abs = std::abs(eval_expr(*e.a, s2.polygon().vertices[s2.cluster_left()]));
  double mass = strength * strength * psi_abs *
                (kPi * (std::log(eps) - s2.cluster_log_lambda()) + kKappa0);
  return {mass, cluster_excision_disk(c, eps)};
}

// Finds the pullback node owning a given composed map (for psi weighting).
const Expr* find_pullback_node(const Expr& e, const ComposedScMap* m) {
  if (e.op == Expr::Op::kPullback && e.map.get() == m) return &e;
  if (e.a)
    if (const Expr* r = find_pullback_node(*e.a, m)) return r;
  if (e.b)
    if (const Expr* r = find_pullback_node(*e.b, m)) return r;
  return nullptr;
}

NormResult integrate_abs(const ExprPtr& expr, const PlanarDomain& domain, double tol) {
  std::vector<const ComposedScMap*> maps;
  collect_sc_pullbacks(*expr, maps);

  if (maps.empty()) {
    Density f = [&](Complex z) { return std::abs(eval_expr(*expr, z)); };
    QuadratureResult r = integrate_domain(domain, f, tol);
    return {r.value, r.error_estimate, r.converged, r.cells};
  }

  // All SC pullbacks must share the source half-plane map.
  const HalfPlaneMap* s1 = &maps[0]->source();
  for (const auto* m : maps)
    if (&m->source() != s1)
      fail(ErrorCode::kBadInput, "pullbacks with different source maps in one integral");

  QuadratureOptions opt;
  opt.gl_order = 6;
  opt.max_depth = 34;
  opt.boundary_depth = 14;

  double patch_total = 0;
  for (const auto* m : maps) {
    if (!m->target().cluster_active()) continue;
    const Expr* node = find_pullback_node(*expr, m);
    ClusterPatch patch = make_cluster_patch(*node, *m);
    patch_total += patch.mass;
    opt.excisions.push_back(patch.excision);
  }

  Density f = [&](Complex w) {
    Complex zeta = cayley_to_halfplane(w);
    if (zeta.imag() <= 0) return 0.0;
    TransplantCtx ctx{s1, zeta};
    Complex val = eval_transplanted(*expr, ctx);
    Complex d1 = s1->derivative(zeta);
    Complex jac = 2.0 / ((1.0 - w) * (1.0 - w));  // dzeta/dw, |.|^2 below
    double density = std::abs(val) * std::norm(d1) * std::norm(jac);
    return std::isfinite(density) ? density : 0.0;
  };
  PlanarDomain disk = PlanarDomain::unit_disk();
  QuadratureResult r = integrate_domain(disk, f, tol, opt);
  // The patch Taylor error is O(eps) relative to the patch mass.
  return {r.value + patch_total, r.error_estimate + 5e-3 * patch_total, r.converged,
          r.cells};
}

}  // namespace

QuadDiff QuadDiff::parse(const std::string& sexpr, std::shared_ptr<const PlanarDomain> domain,
                         const MapResolver& resolver) {
  return QuadDiff(parse_sexpr(sexpr, resolver), std::move(domain));
}

Complex QuadDiff::evaluate(Complex z) const {
  if (domain_->is_puncture(z)) fail(ErrorCode::kEvaluationAtPuncture, "puncture");
  if (!domain_->contains(z)) fail(ErrorCode::kPointOutsideDomain, "outside the domain");
  return eval_expr(*expr_, z);
}

NormResult l1_norm(const QuadDiff& qd, double tol) {
  NormResult r = integrate_abs(qd.expr(), qd.domain(), tol);
  if (!r.converged)
    fail(ErrorCode::kQuadratureNotConverged,
         "l1_norm error estimate " + std::to_string(r.error));
  return r;
}

NormResult l1_distance(const QuadDiff& a, const QuadDiff& b, double tol) {
  if (!a.domain().same_as(b.domain()))
    fail(ErrorCode::kDomainMismatch, "differentials on different domains");
  NormResult r = integrate_abs(Expr::sub(a.expr(), b.expr()), a.domain(), tol);
  if (!r.converged)
    fail(ErrorCode::kQuadratureNotConverged,
         "l1_distance error estimate " + std::to_string(r.error));
  return r;
}

namespace {

// Winding number of phi along the rectangle boundary, sampled adaptively.
int boundary_winding(const QuadDiff& qd, const Rect& r) {
  std::vector<Complex> pts;
  const int per_edge = 24;
  auto push_edge = [&](Complex a, Complex b) {
    for (int i = 0; i < per_edge; ++i) pts.push_back(a + (b - a) * (double(i) / per_edge));
  };
  Complex c00(r.x0, r.y0), c10(r.x1, r.y0), c11(r.x1, r.y1), c01(r.x0, r.y1);
  push_edge(c00, c10);
  push_edge(c10, c11);
  push_edge(c11, c01);
  push_edge(c01, c00);
  double total = 0;
  Complex prev = qd.evaluate_unchecked(pts[0]);
  for (std::size_t i = 1; i <= pts.size(); ++i) {
    Complex cur = qd.evaluate_unchecked(pts[i % pts.size()]);
    double d = std::arg(cur / prev);
    if (std::abs(d) > 2.5) return -999;  // too coarse; caller subdivides
    total += d;
    prev = cur;
  }
  return int(std::lround(total / (2 * kPi)));
}

void find_zeros_rec(const QuadDiff& qd, Rect r, int depth, std::vector<Zero>& out) {
  // Skip cells clearly outside the domain.
  bool any_inside = false;
  for (int i = 0; i < 4 && !any_inside; ++i)
    for (int j = 0; j < 4; ++j) {
      Complex z{r.x0 + (i + 0.5) * r.width() / 4, r.y0 + (j + 0.5) * r.height() / 4};
      if (qd.domain().contains(z)) {
        any_inside = true;
        break;
      }
    }
  if (!any_inside) return;
  int w = boundary_winding(qd, r);
  if (w == 0) return;
  if (w != -999 && r.width() < 1e-9) {
    Complex loc{0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)};
    if (qd.domain().contains(loc)) out.push_back({loc, w});
    return;
  }
  if (depth > 48) return;
  double mx = 0.5 * (r.x0 + r.x1), my = 0.5 * (r.y0 + r.y1);
  find_zeros_rec(qd, {r.x0, r.y0, mx, my}, depth + 1, out);
  find_zeros_rec(qd, {mx, r.y0, r.x1, my}, depth + 1, out);
  find_zeros_rec(qd, {r.x0, my, mx, r.y1}, depth + 1, out);
  find_zeros_rec(qd, {mx, my, r.x1, r.y1}, depth + 1, out);
}

}  // namespace

bool expr_may_vanish(const Expr& e) {
  switch (e.op) {
    case Expr::Op::kConst:
      return e.value == Complex(0, 0);
    case Expr::Op::kZ:
      return true;
    case Expr::Op::kExp:
      return false;
    case Expr::Op::kMul:
      return expr_may_vanish(*e.a) || expr_may_vanish(*e.b);
    case Expr::Op::kDiv:
      return expr_may_vanish(*e.a);
    case Expr::Op::kPow:
      return expr_may_vanish(*e.a);
    case Expr::Op::kPullback:
      return expr_may_vanish(*e.a);
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
      return e.a->depends_on_z || e.b->depends_on_z ||
             expr_may_vanish(*e.a) != expr_may_vanish(*e.b);
  }
  return true;
}

std::vector<Zero> find_zeros(const QuadDiff& qd, int resolution) {
  Rect bb = qd.domain().bounding_box();
  // Pad the sweep box by irrational fractions so cell seams avoid the
  // rational coordinates where zeros typically sit.
  double w = 1 + bb.width(), h = 1 + bb.height();
  Rect start{bb.x0 - 0.0137231 * w, bb.y0 - 0.0241421 * h, bb.x1 + 0.0318309 * w,
             bb.y1 + 0.0169314 * h};
  std::vector<Zero> out;
  int cells = std::max(1, resolution / 16);
  double dx = start.width() / cells, dy = start.height() / cells;
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) {
      Rect r{start.x0 + i * dx, start.y0 + j * dy, start.x0 + (i + 1) * dx,
             start.y0 + (j + 1) * dy};
      find_zeros_rec(qd, r, 0, out);
    }
  std::sort(out.begin(), out.end(), [](const Zero& a, const Zero& b) {
    return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                  : a.location.imag() < b.location.imag();
  });
  return out;
}

namespace {

bool decreasing_trend(const std::vector<double>& xs, double tol) {
  if (xs.size() < 2) return xs.empty() || xs[0] <= tol;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[i - 1] * 1.10 + tol) return false;
  return xs.back() <= tol || xs.back() <= 0.75 * xs.front() + tol;
}

}  // namespace

ConvergenceReport classify_convergence(const std::vector<QuadDiff>& seq,
                                       const QuadDiff& limit,
                                       const CompactExhaustion& exhaustion,
                                       double tol) {
  ConvergenceReport rep;
  rep.limit_norm = l1_norm(limit, tol).value;

  rep.sup_errors.resize(exhaustion.size());
  for (std::size_t r = 0; r < exhaustion.size(); ++r) {
    std::vector<Complex> pts = exhaustion.sample_region(r, 24);
    for (const QuadDiff& qd : seq) {
      double sup = 0;
      for (Complex z : pts)
        sup = std::max(sup, std::abs(qd.evaluate_unchecked(z) -
                                     limit.evaluate_unchecked(z)));
      rep.sup_errors[r].push_back(sup);
    }
  }
  for (const QuadDiff& qd : seq) {
    rep.norms.push_back(l1_norm(qd, tol).value);
    rep.distances.push_back(l1_distance(qd, limit, tol).value);
  }

  rep.locally_uniform = true;
  for (auto& row : rep.sup_errors)
    rep.locally_uniform = rep.locally_uniform && decreasing_trend(row, tol);

  std::vector<double> excess;
  for (double n : rep.norms) excess.push_back(std::max(0.0, n - rep.limit_norm));
  rep.norm_limsup_ok = decreasing_trend(excess, 4 * tol);
  rep.l1_convergent = decreasing_trend(rep.distances, 4 * tol) && rep.norm_limsup_ok;
  return rep;
}

}  // namespace qdlab
