#include "qdlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qdlab {

const char* leaf_class_name(LeafClass c) {
  switch (c) {
    case LeafClass::kClosed: return "closed";
    case LeafClass::kCrossCut: return "cross-cut";
    case LeafClass::kTransient: return "transient";
    case LeafClass::kSingularHit: return "singular-hit";
  }
  return "?";
}

std::vector<SingularityInfo> singularities(const QuadDiff& qd, int resolution) {
  std::vector<SingularityInfo> out;
  for (const Zero& z : find_zeros(qd, resolution)) {
    SingularityInfo info;
    info.location = z.location;
    info.order = z.order;
    info.prong_count = z.order + 2;
    // Horizontal prongs: phi ~ a (z - z0)^k locally; prongs where
    // arg(a) + (k + 2) theta = 0 mod 2 pi.
    double r = 1e-4;
    Complex a_est = 0;
    for (int j = 0; j < 8; ++j) {
      Complex dz = std::polar(r, 2 * kPi * j / 8.0);
      a_est += qd.evaluate_unchecked(z.location + dz) / std::pow(dz, z.order);
    }
    a_est /= 8.0;
    double base = -std::arg(a_est) / (z.order + 2);
    for (int p = 0; p < info.prong_count; ++p)
      info.prong_directions.push_back(base + 2 * kPi * p / info.prong_count);
    out.push_back(std::move(info));
  }
  return out;
}

namespace {

// sqrt(phi) continued by nearest-value matching against a reference.
Complex sqrt_continued(Complex phi, Complex ref) {
  Complex s = std::sqrt(phi);
  return std::norm(s - ref) <= std::norm(-s - ref) ? s : -s;
}

struct Stepper {
  const QuadDiff& qd;
  Complex branch_ref;  // current sqrt(phi) value along the leaf

  Complex velocity(Complex z) const {
    Complex s = sqrt_continued(qd.evaluate_unchecked(z), branch_ref);
    return 1.0 / s;
  }

  Complex rk4(Complex z, double h) const {
    Complex k1 = velocity(z);
    Complex k2 = velocity(z + 0.5 * h * k1);
    Complex k3 = velocity(z + 0.5 * h * k2);
    Complex k4 = velocity(z + h * k3);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

struct HalfTrace {
  std::vector<Trajectory::Sample> samples;  // includes the start point
  enum class End { kBoundary, kSingular, kBudget, kClosed, kCollapse } end = End::kBudget;
  Complex landing;        // boundary point or singular location
  double used = 0;        // |phi|^{1/2} length
  double max_residual = 0;
};

// Bisect the final step against the domain boundary.
Complex land_on_boundary(const PlanarDomain& dom, Complex inside, Complex outside,
                         double tol) {
  for (int i = 0; i < 80 && std::abs(outside - inside) > tol; ++i) {
    Complex mid = 0.5 * (inside + outside);
    (dom.contains(mid) ? inside : outside) = mid;
  }
  return 0.5 * (inside + outside);
}

HalfTrace trace_half(const QuadDiff& qd, Complex z0, Complex branch0,
                     const TraceOptions& opt, const std::vector<Zero>& zeros,
                     bool check_closure) {
  HalfTrace out;
  const PlanarDomain& dom = qd.domain();
  Stepper st{qd, branch0};
  double h = opt.max_step / 4;
  double t = 0;
  Complex z = z0;
  out.samples.push_back({0.0, z0, 1});

  // Poincare section through z0 orthogonal to the leaf (used by the closed
  // classification: first return within 10 * step_tol with matching branch).
  Complex dir0 = 1.0 / branch0;
  dir0 /= std::abs(dir0);
  auto section_offset = [&](Complex p) {
    return (p - z0).real() * dir0.real() + (p - z0).imag() * dir0.imag();
  };

  auto singular_radius = [&](const Zero& zr) {
    return std::pow(opt.step_tol, 2.0 / (zr.order + 2));
  };

  while (true) {
    if (t >= opt.budget) break;  // End::kBudget
    bool hit = false;
    for (const Zero& zr : zeros) {
      if (std::abs(z - zr.location) < singular_radius(zr)) {
        out.end = HalfTrace::End::kSingular;
        out.landing = zr.location;
        hit = true;
        break;
      }
    }
    if (hit) break;
    Complex phi = qd.evaluate_unchecked(z);
    if (std::abs(phi) < opt.step_tol * opt.step_tol) {
      out.end = HalfTrace::End::kSingular;  // landed on an unlisted zero
      out.landing = z;
      break;
    }
    st.branch_ref = sqrt_continued(phi, st.branch_ref);

    // Step doubling for the local error estimate.
    Complex z_full = st.rk4(z, h);
    Complex z_half = st.rk4(st.rk4(z, h / 2), h / 2);
    double err = std::abs(z_full - z_half);
    double scale = std::abs(1.0 / st.branch_ref);  // |dz/dt|
    if (err > opt.step_tol * std::max(scale * h, 1e-30)) {
      if (h <= opt.min_step * 1.5) {
        out.end = HalfTrace::End::kCollapse;
        break;
      }
      h = std::max(opt.min_step, 0.5 * h);
      continue;
    }
    Complex z_new = z_half;

    if (!dom.contains(z_new) || dom.is_puncture(z_new, opt.boundary_tol)) {
      out.landing = land_on_boundary(dom, z, z_new, opt.boundary_tol);
      out.end = HalfTrace::End::kBoundary;
      t += std::abs(out.landing - z) / std::max(scale, 1e-300);
      out.samples.push_back({t, out.landing, st.branch_ref.real() >= 0 ? 1 : -1});
      break;
    }

    Complex dz = z_new - z;
    if (std::abs(dz) > 0) {
      double res = std::abs((st.branch_ref * dz).imag()) / std::abs(dz);
      out.max_residual = std::max(out.max_residual, res);
    }

    t += h;
    z = z_new;
    out.samples.push_back({t, z, st.branch_ref.real() >= 0 ? 1 : -1});
    if (err < 0.05 * opt.step_tol * scale * h) h = std::min(opt.max_step, 1.6 * h);

    if (check_closure && t > 20 * opt.max_step) {
      double off = section_offset(z);
      double prev_off = section_offset(out.samples[out.samples.size() - 2].z);
      if (std::abs(z - z0) < 10 * opt.step_tol && prev_off * off <= 0 && off != prev_off) {
        out.end = HalfTrace::End::kClosed;
        break;
      }
    }
  }
  out.used = t;
  return out;
}

}  // namespace

Trajectory trace_horizontal(const QuadDiff& qd, Complex z0, const TraceOptions& opt,
                            const std::vector<Zero>& zeros) {
  const PlanarDomain& dom = qd.domain();
  if (!dom.contains(z0)) fail(ErrorCode::kPointOutsideDomain, "trace start");
  Complex phi0 = qd.evaluate_unchecked(z0);
  if (std::abs(phi0) < 1e-14) fail(ErrorCode::kStartAtZero, "phi vanishes at start");
  Complex s0 = std::sqrt(phi0);

  HalfTrace fwd = trace_half(qd, z0, s0, opt, zeros, true);
  Trajectory traj;
  if (fwd.end == HalfTrace::End::kClosed) {
    traj.classification = LeafClass::kClosed;
    traj.points = std::move(fwd.samples);
    traj.length = traj.budget_used = fwd.used;
    traj.max_leaf_residual = fwd.max_residual;
    return traj;
  }
  HalfTrace bwd = trace_half(qd, z0, -s0, opt, zeros, false);

  traj.points.reserve(bwd.samples.size() + fwd.samples.size());
  for (std::size_t i = bwd.samples.size(); i-- > 1;)
    traj.points.push_back({-bwd.samples[i].t, bwd.samples[i].z, bwd.samples[i].branch});
  for (const auto& s : fwd.samples) traj.points.push_back(s);
  traj.length = traj.budget_used = fwd.used + bwd.used;
  traj.max_leaf_residual = std::max(fwd.max_residual, bwd.max_residual);

  const bool fwd_b = fwd.end == HalfTrace::End::kBoundary;
  const bool bwd_b = bwd.end == HalfTrace::End::kBoundary;
  const bool fwd_s = fwd.end == HalfTrace::End::kSingular;
  const bool bwd_s = bwd.end == HalfTrace::End::kSingular;
  if (fwd_s || bwd_s) {
    traj.classification = LeafClass::kSingularHit;
    traj.singular_hit = fwd_s ? fwd.landing : bwd.landing;
    if (fwd_b) traj.endpoint_b = fwd.landing;
    if (bwd_b) traj.endpoint_a = bwd.landing;
  } else if (fwd_b && bwd_b) {
    traj.classification = LeafClass::kCrossCut;
    traj.endpoint_a = bwd.landing;
    traj.endpoint_b = fwd.landing;
  } else {
    traj.classification = LeafClass::kTransient;
  }
  return traj;
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  out << "t,x,y,branch\n";
  out.precision(12);
  for (const Sample& s : points)
    out << s.t << "," << s.z.real() << "," << s.z.imag() << "," << s.branch << "\n";
  return out.str();
}

double arc_transverse_mass(const QuadDiff& qd, const TransverseArc& arc) {
  double total = 0;
  for (std::size_t i = 0; i + 1 < arc.points.size(); ++i) {
    Complex a = arc.points[i], b = arc.points[i + 1];
    Complex tangent = (b - a) / std::abs(b - a);
    total += integrate_segment(a, b, [&](Complex z) {
      if (!qd.domain().contains(z)) return 0.0;
      Complex s = std::sqrt(qd.evaluate_unchecked(z));
      return std::abs((s * tangent).imag());
    });
  }
  return total;
}

std::vector<std::pair<Trajectory, double>> sample_leaves(const QuadDiff& qd,
                                                         const TransverseArc& transversal,
                                                         int count, const TraceOptions& opt) {
  if (count <= 0) return {};
  struct Knot {
    double cum;
    Complex z;
  };
  std::vector<Knot> knots;
  double cum = 0;
  const int kFine = 512;
  for (std::size_t i = 0; i + 1 < transversal.points.size(); ++i) {
    Complex a = transversal.points[i], b = transversal.points[i + 1];
    Complex tangent = (b - a) / std::abs(b - a);
    double seg = std::abs(b - a);
    Complex prev = a;
    for (int j = 1; j <= kFine; ++j) {
      Complex z = a + (b - a) * (double(j) / kFine);
      Complex mid = 0.5 * (prev + z);
      double dens = 0;
      if (qd.domain().contains(mid)) {
        Complex s = std::sqrt(qd.evaluate_unchecked(mid));
        dens = std::abs((s * tangent).imag());
      }
      cum += dens * (seg / kFine);
      knots.push_back({cum, z});
      prev = z;
    }
  }
  double total = cum;
  std::vector<std::pair<Trajectory, double>> out;
  if (total <= 0) return out;

  std::vector<Zero> zeros =
      expr_may_vanish(*qd.expr()) ? find_zeros(qd, 32) : std::vector<Zero>{};
  double w = total / count;
  std::size_t k = 0;
  for (int i = 0; i < count; ++i) {
    double target = total * (i + 0.5) / count;
    while (k + 1 < knots.size() && knots[k].cum < target) ++k;
    Complex z0 = knots[k].z;
    if (!qd.domain().contains(z0) || qd.domain().is_puncture(z0, 1e-9)) continue;
    out.emplace_back(trace_horizontal(qd, z0, opt, zeros), w);
  }
  return out;
}

}  // namespace qdlab
