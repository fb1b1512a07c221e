#include "qdlab/conformal/sc_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "json.hpp"
#include "qdlab/quadrature.hpp"

namespace qdlab::conformal {

namespace {

constexpr int kGlOrder = 16;
constexpr int kMaxSplitDepth = 52;
// Relative prevertex gap below which a pair is carried as an exact cluster
// (center, log-gap). Wide enough that quadrature over any non-cluster map
// resolves its gaps directly.
constexpr double kClusterGapThreshold = 3e-5;

double segment_point_distance(Complex a, Complex b, Complex p) {
  Complex ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0) return std::abs(p - a);
  double t = std::clamp(((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace

// --------------------------------------------------------------------------
// geometry / construction

void HalfPlaneMap::refresh_geometry() {
  const std::size_t n = poly_.size();
  x_.assign(n, 0.0);
  x_[1] = 1.0;
  x_[2] = std::numeric_limits<double>::infinity();
  cluster_ = false;
  cluster_left_ = -1;

  // Build the negative-axis prevertices right-to-left from the log-gaps.
  // gaps_[j] is the log of the gap between x_[n-1-j] and its right neighbor.
  double pos = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  int tiny_index = -1;
  for (std::size_t j = 0; j < gaps_.size(); ++j) {
    std::size_t k = n - 1 - j;
    double gap = std::exp(gaps_[j]);
    double scale = std::max(1.0, std::abs(pos));
    if (gap < kClusterGapThreshold * scale) {
      // Gap collapses below double resolution at this position: both pair
      // members sit at the midpoint; the log-gap carries the true value.
      if (tiny_index >= 0)
        fail(ErrorCode::kParameterSolverDivergence,
             "more than one collapsed prevertex pair");
      if (j == 0)
        fail(ErrorCode::kParameterSolverDivergence,
             "prevertex collapsed onto a normalization pin");
      tiny_index = int(k);  // pair (k, k+1) in vertex order
      x_[k] = pos;
      cl_center_ = pos;
      cl_loglam_ = gaps_[j] - std::log(2.0);
    } else {
      x_[k] = pos - gap;
      pos = x_[k];
      min_gap = std::min(min_gap, gap);
    }
  }
  if (tiny_index >= 0) {
    cluster_ = true;
    cluster_left_ = tiny_index;
    if (std::abs(poly_.beta(cluster_left_) + 0.5) > 1e-12 ||
        std::abs(poly_.beta(cluster_left_ + 1) + 0.5) > 1e-12)
      fail(ErrorCode::kParameterSolverDivergence,
           "collapsed prevertex pair with unsupported angles");
  }
  span_ = 1.0 + std::abs(x_[3]);
  report_.min_gap = min_gap;
  report_.crowded = cluster_ || min_gap < 1e-8 * span_;
  report_.cluster_active = cluster_;
}

// --------------------------------------------------------------------------
// integrand

Complex HalfPlaneMap::cluster_log(Complex u) const {
  double au = std::abs(u);
  if (au == 0.0) return Complex(2 * cl_loglam_, kPi);  // limit from above
  double log_ratio2 = 2.0 * (cl_loglam_ - std::log(au));
  if (log_ratio2 < -36.0) return 2.0 * std::log(u);
  double lam = std::exp(cl_loglam_);
  if (au > 4 * lam) {
    Complex r = lam / u;
    return 2.0 * std::log(u) + std::log(1.0 - r * r);
  }
  return std::log(u - lam) + std::log(u + lam);
}

Complex HalfPlaneMap::log_integrand_excl(Complex t, int skip_a, int skip_b) const {
  Complex acc = 0;
  const std::size_t n = poly_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 2 || int(k) == skip_a || int(k) == skip_b) continue;
    if (cluster_ && (int(k) == cluster_left_ || int(k) == cluster_left_ + 1)) continue;
    acc += poly_.beta(k) * std::log(t - x_[k]);
  }
  if (cluster_ && skip_a != cluster_left_ && skip_b != cluster_left_)
    acc += -0.5 * cluster_log(t - cl_center_);
  return acc;
}

Complex HalfPlaneMap::log_integrand(Complex t) const { return log_integrand_excl(t, -1, -1); }

double HalfPlaneMap::clearance(Complex a, Complex b, int skip_a, int skip_b) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly_.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 2 || int(k) == skip_a || int(k) == skip_b) continue;
    if (cluster_ && (int(k) == cluster_left_ || int(k) == cluster_left_ + 1)) continue;
    best = std::min(best, segment_point_distance(a, b, Complex(x_[k], 0)));
  }
  if (cluster_ && skip_a != cluster_left_ && skip_b != cluster_left_)
    best = std::min(best, segment_point_distance(a, b, Complex(cl_center_, 0)));
  return best;
}

// --------------------------------------------------------------------------
// side integrals

Complex HalfPlaneMap::one_sided(double a, double b, double beta_a, int k_excl) const {
  // Integral from a to b of the SC integrand, with the (t-a)^{beta_a} factor
  // absorbed by t = a + (b-a) sigma^2. Splits sigma-panels while another
  // singularity sits within 3/4 of the image interval length.
  const auto& xs = gl_nodes(kGlOrder);
  const auto& ws = gl_weights(kGlOrder);
  Complex total = 0;
  std::function<void(double, double, int)> rec = [&](double s0, double s1, int depth) {
    double t0 = a + (b - a) * s0 * s0, t1 = a + (b - a) * s1 * s1;
    double len = std::abs(t1 - t0);
    double clr = clearance(Complex(t0, 0), Complex(t1, 0), k_excl);
    if (depth < kMaxSplitDepth && clr < 0.75 * len) {
      double sm = 0.5 * (s0 + s1);
      rec(s0, sm, depth + 1);
      rec(sm, s1, depth + 1);
      return;
    }
    Complex acc = 0;
    for (int i = 0; i < kGlOrder; ++i) {
      double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * xs[i];
      Complex t(a + (b - a) * s * s, 0.0);
      Complex v = std::exp(log_integrand_excl(t, k_excl, -1)) * std::pow(s, 2 * beta_a + 1);
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) acc += ws[i] * v;
    }
    total += acc * 0.5 * (s1 - s0);
  };
  rec(0.0, 1.0, 0);
  return total * 2.0 * std::pow(Complex(b - a, 0.0), beta_a + 1.0);
}

Complex HalfPlaneMap::regular_segment(Complex a, Complex b, int depth) const {
  double len = std::abs(b - a);
  double clr = clearance(a, b);
  if (depth < kMaxSplitDepth && clr < 0.7 * len) {
    Complex m = 0.5 * (a + b);
    return regular_segment(a, m, depth + 1) + regular_segment(m, b, depth + 1);
  }
  const auto& xs = gl_nodes(kGlOrder);
  const auto& ws = gl_weights(kGlOrder);
  Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
  Complex acc = 0;
  for (int i = 0; i < kGlOrder; ++i) {
    Complex v = std::exp(log_integrand(mid + half * xs[i]));
    if (std::isfinite(v.real()) && std::isfinite(v.imag())) acc += ws[i] * v;
  }
  return acc * half;
}

Complex HalfPlaneMap::infinite_side(bool right) const {
  // right: side 1, t in [1, +inf); left: side 2, t in (-inf, x_3]. The
  // vertex at infinity has angle pi/2, so t = +-1/s^2 regularizes the far
  // end exactly.
  const auto& xs = gl_nodes(kGlOrder);
  const auto& ws = gl_weights(kGlOrder);
  Complex total = 0;
  const int panels = 12;
  if (right) {
    const double beta1 = poly_.beta(1);
    // integral_0^1 F(s) (1-s)^{beta1} ds, F smooth; substitute s = 1-sig^2.
    auto F = [&](double s) -> Complex {
      double t = 1.0 / (s * s);
      Complex rest = std::exp(log_integrand_excl(Complex(t, 0), 1, -1));
      return rest * std::pow((1.0 + s) / (s * s), beta1) * (2.0 / (s * s * s));
    };
    for (int p = 0; p < panels; ++p) {
      double g0 = double(p) / panels, g1 = double(p + 1) / panels;
      Complex acc = 0;
      for (int i = 0; i < kGlOrder; ++i) {
        double sig = 0.5 * (g0 + g1) + 0.5 * (g1 - g0) * xs[i];
        double s = 1.0 - sig * sig;
        if (s <= 0) continue;
        Complex v = F(s) * std::pow(sig, 2 * beta1 + 1);
        if (std::isfinite(v.real()) && std::isfinite(v.imag())) acc += ws[i] * v;
      }
      total += acc * 0.5 * (g1 - g0);
    }
    return total * 2.0;
  }
  const double x3 = x_[3];
  const double beta3 = poly_.beta(3);
  const double s3 = 1.0 / std::sqrt(-x3);
  // integral_0^{s3} G(s) (s3-s)^{beta3} ds with t = -1/s^2; phase e^{i pi b3}
  // from (t - x3) < 0 approached from the upper half-plane. Substituting
  // s = s3 (1 - sig^2) absorbs the endpoint singularity.
  auto G = [&](double s) -> Complex {
    double t = -1.0 / (s * s);
    Complex rest = std::exp(log_integrand_excl(Complex(t, 0), 3, -1));
    double mag = (s3 + s) / (s * s * s3 * s3);
    return rest * std::pow(mag, beta3) * (2.0 / (s * s * s));
  };
  Complex phase = std::exp(Complex(0, kPi * beta3));
  for (int p = 0; p < panels; ++p) {
    double g0 = double(p) / panels, g1 = double(p + 1) / panels;
    Complex acc = 0;
    for (int i = 0; i < kGlOrder; ++i) {
      double sig = 0.5 * (g0 + g1) + 0.5 * (g1 - g0) * xs[i];
      double s = s3 * (1.0 - sig * sig);
      if (s <= 0) continue;
      Complex v = G(s) * std::pow(sig, 2 * beta3 + 1);
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) acc += ws[i] * v;
    }
    total += acc * 0.5 * (g1 - g0);
  }
  return total * phase * 2.0 * std::pow(s3, beta3 + 1.0);
}

double HalfPlaneMap::wall_eps() const {
  // Window around the cluster inside which the wall integrals switch to the
  // analytic log form: well inside the gap to the nearest other singularity.
  double d_left = std::abs(cl_center_ - x_[cluster_left_ - 1]);
  double d_right = std::abs((cluster_left_ + 2 <= int(poly_.size()) - 1
                                 ? x_[cluster_left_ + 2]
                                 : 0.0) -
                            cl_center_);
  return 0.05 * std::min(d_left, d_right);
}

Complex HalfPlaneMap::wall_near_cluster(bool left_of_cluster, double eps) const {
  // left: integral over [c-eps, c-lam]; right: over [c+lam, c+eps].
  // |integrand| = |H(c -+ u)| (u^2-lam^2)^{-1/2}, H excluding the cluster.
  const auto& xs = gl_nodes(kGlOrder);
  const auto& ws = gl_weights(kGlOrder);
  const double sgn = left_of_cluster ? -1.0 : 1.0;
  auto logH = [&](double u) {
    return log_integrand_excl(Complex(cl_center_ + sgn * u, 0), cluster_left_, -1);
  };
  double u1 = 1e-4 * eps;
  if (cl_loglam_ > std::log(u1) - std::log(32.0))
    u1 = std::min(std::exp(cl_loglam_ + std::log(32.0)), 0.5 * eps);
  if (u1 <= 0 || u1 >= eps)
    fail(ErrorCode::kParameterSolverDivergence, "cluster window collapsed");

  // [lam, u1]: H frozen at c; arccosh(u1/lam) in log space.
  double log_ratio = std::log(u1) - cl_loglam_;
  double arc = log_ratio > 19.0
                   ? std::log(2.0) + log_ratio
                   : std::acosh(std::exp(log_ratio));
  double abs_total = std::exp(logH(0.0).real()) * arc;
  // [u1, eps]: Gauss-Legendre in w = log u.
  double w0 = std::log(u1), w1 = std::log(eps);
  const int panels = 8;
  for (int p = 0; p < panels; ++p) {
    double a = w0 + (w1 - w0) * p / panels, b = w0 + (w1 - w0) * (p + 1) / panels;
    double acc = 0;
    for (int i = 0; i < kGlOrder; ++i) {
      double w = 0.5 * (a + b) + 0.5 * (b - a) * xs[i];
      double u = std::exp(w);
      double corr = 1.0;
      double e = 2.0 * (cl_loglam_ - w);
      if (e > -36.0) corr = 1.0 / std::sqrt(1.0 - std::exp(e));
      double v = std::exp(logH(u).real()) * corr;
      if (std::isfinite(v)) acc += ws[i] * v;
    }
    abs_total += acc * 0.5 * (b - a);
  }
  // Constant phase along the wall segment, sampled at the outer end.
  Complex lg = log_integrand(Complex(cl_center_ + sgn * eps, 0));
  Complex phase = std::exp(Complex(0.0, lg.imag()));
  return phase * abs_total;
}

Complex HalfPlaneMap::cluster_top_side() const {
  // integral across the gap [c-lam, c+lam]: substituting t = c + lam sin(th)
  // gives -i * integral of H(c + lam sin th) dth; H is constant across the
  // sub-resolution gap.
  Complex h = std::exp(log_integrand_excl(Complex(cl_center_, 0), cluster_left_, -1));
  return Complex(0, -1) * kPi * h;
}

Complex HalfPlaneMap::side_integral(std::size_t k) const {
  const std::size_t n = poly_.size();
  if (k == 0) {
    return one_sided(0.0, 0.5, poly_.beta(0), 0) - one_sided(1.0, 0.5, poly_.beta(1), 1);
  }
  if (k == 1) return infinite_side(true);
  if (k == 2) return infinite_side(false);
  if (cluster_ && int(k) == cluster_left_) return cluster_top_side();
  if (cluster_ && int(k) + 1 == cluster_left_) {
    double eps = wall_eps();
    return one_sided(x_[k], cl_center_ - eps, poly_.beta(k), int(k)) +
           wall_near_cluster(true, eps);
  }
  bool starts_at_cluster_right = cluster_ && int(k) == cluster_left_ + 1;
  double right_end = (k == n - 1) ? 0.0 : x_[k + 1];
  double right_beta = (k == n - 1) ? poly_.beta(0) : poly_.beta(k + 1);
  int right_idx = (k == n - 1) ? 0 : int(k + 1);
  if (starts_at_cluster_right) {
    double eps = wall_eps();
    return wall_near_cluster(false, eps) -
           one_sided(right_end, cl_center_ + eps, right_beta, right_idx);
  }
  double mid = 0.5 * (x_[k] + right_end);
  return one_sided(x_[k], mid, poly_.beta(k), int(k)) -
         one_sided(right_end, mid, right_beta, right_idx);
}

// --------------------------------------------------------------------------
// parameter problem

std::vector<double> HalfPlaneMap::residuals() const {
  const std::size_t n = poly_.size();
  const std::size_t m = n - 3;
  double i0 = std::abs(side_integral(0));
  double l0 = std::abs(poly_.vertices[1] - poly_.vertices[0]);
  std::vector<double> r(m);
  for (std::size_t j = 0; j < m; ++j) {
    double lk = std::abs(poly_.vertices[(j + 2) % n] - poly_.vertices[j + 1]);
    r[j] = std::abs(side_integral(j + 1)) / i0 - lk / l0;
  }
  return r;
}

std::shared_ptr<HalfPlaneMap> HalfPlaneMap::solve(const ScPolygon& poly,
                                                  std::vector<double> init_gaps,
                                                  std::string name) {
  if (poly.size() < 4) fail(ErrorCode::kBadInput, "polygon needs >= 4 vertices");
  if (std::abs(poly.angle_fracs[2] - 0.5) > 1e-12)
    fail(ErrorCode::kBadInput, "normalization vertex 2 must be a right angle");
  auto mp = std::shared_ptr<HalfPlaneMap>(new HalfPlaneMap());
  mp->poly_ = poly;
  mp->name_ = std::move(name);
  mp->gaps_ = init_gaps.empty() ? std::vector<double>(poly.size() - 3, 0.0)
                                : std::move(init_gaps);
  if (mp->gaps_.size() != poly.size() - 3)
    fail(ErrorCode::kBadInput, "wrong number of initial gaps");
  mp->rebuild(true);
  return mp;
}

std::shared_ptr<HalfPlaneMap> HalfPlaneMap::from_parameters(const ScPolygon& poly,
                                                            std::vector<double> gaps,
                                                            std::string name) {
  auto mp = std::shared_ptr<HalfPlaneMap>(new HalfPlaneMap());
  mp->poly_ = poly;
  mp->name_ = std::move(name);
  mp->gaps_ = std::move(gaps);
  mp->rebuild(false);
  return mp;
}

void HalfPlaneMap::rebuild(bool full_solve) {
  refresh_geometry();
  const std::size_t m = poly_.size() - 3;

  if (full_solve) {
    std::vector<double> r = residuals();
    auto norm_inf = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s = std::max(s, std::abs(x));
      return s;
    };
    const double h = 1e-7;
    int it = 0;
    for (; it < 80 && norm_inf(r) > 1e-12; ++it) {
      // Numerical Jacobian in the log-gap variables.
      std::vector<std::vector<double>> jac(m, std::vector<double>(m));
      for (std::size_t j = 0; j < m; ++j) {
        double keep = gaps_[j];
        gaps_[j] += h;
        refresh_geometry();
        std::vector<double> rp = residuals();
        gaps_[j] = keep;
        for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rp[i] - r[i]) / h;
      }
      refresh_geometry();
      // Solve J step = r by Gaussian elimination with partial pivoting.
      std::vector<std::vector<double>> a = jac;
      std::vector<double> rhs = r;
      std::vector<double> step(m, 0.0);
      for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < m; ++i)
          if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        std::swap(a[col], a[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (std::abs(a[col][col]) < 1e-300)
          fail(ErrorCode::kParameterSolverDivergence, "singular jacobian");
        for (std::size_t i = col + 1; i < m; ++i) {
          double f = a[i][col] / a[col][col];
          for (std::size_t j2 = col; j2 < m; ++j2) a[i][j2] -= f * a[col][j2];
          rhs[i] -= f * rhs[col];
        }
      }
      for (std::size_t i = m; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t j2 = i + 1; j2 < m; ++j2) s -= a[i][j2] * step[j2];
        step[i] = s / a[i][i];
      }
      // Damped update.
      double base = norm_inf(r);
      double scale = 1.0;
      bool accepted = false;
      std::vector<double> keep = gaps_;
      for (int ls = 0; ls < 40; ++ls) {
        for (std::size_t j = 0; j < m; ++j) gaps_[j] = keep[j] - scale * step[j];
        refresh_geometry();
        std::vector<double> rn = residuals();
        if (norm_inf(rn) < base) {
          r = std::move(rn);
          accepted = true;
          break;
        }
        scale *= 0.5;
      }
      if (!accepted) {
        gaps_ = keep;
        refresh_geometry();
        break;
      }
    }
    report_.iterations = it;
    report_.residual_norm = norm_inf(r);
    report_.converged = report_.residual_norm < 1e-9;
    if (!report_.converged)
      fail(ErrorCode::kParameterSolverDivergence,
           "side-length residual " + std::to_string(report_.residual_norm));
  } else {
    std::vector<double> r = residuals();
    double s = 0;
    for (double v : r) s = std::max(s, std::abs(v));
    report_.residual_norm = s;
    report_.converged = s < 1e-8;
  }

  C_ = (poly_.vertices[1] - poly_.vertices[0]) / side_integral(0);

  // Closure check on the first side not used as a condition.
  const std::size_t n = poly_.size();
  std::size_t k_check = n - 2;
  double lk = std::abs(poly_.vertices[(k_check + 1) % n] - poly_.vertices[k_check]);
  report_.closure_error =
      std::abs(std::abs(side_integral(k_check)) * std::abs(C_) - lk);

  build_anchors();
}

// --------------------------------------------------------------------------
// evaluation

void HalfPlaneMap::build_anchors() {
  anchors_.clear();
  const std::size_t n = poly_.size();
  auto add_boundary = [&](double t, Complex f) { anchors_.push_back({Complex(t, 0), f}); };

  add_boundary(0.5, poly_.vertices[0] + C_ * one_sided(0.0, 0.5, poly_.beta(0), 0));
  double t_right = 1.0 + 2.0 * span_;
  add_boundary(t_right, poly_.vertices[1] + C_ * one_sided(1.0, t_right, poly_.beta(1), 1));
  double t_left = x_[3] - 2.0 * span_;
  add_boundary(t_left, poly_.vertices[3] + C_ * one_sided(x_[3], t_left, poly_.beta(3), 3));
  for (std::size_t k = 3; k < n; ++k) {
    double right_end = (k == n - 1) ? 0.0 : x_[k + 1];
    if (cluster_ && (int(k) == cluster_left_)) continue;  // sub-resolution side
    double mid = cluster_ && int(k) + 1 == cluster_left_
                     ? 0.5 * (x_[k] + (cl_center_ - wall_eps()))
                     : (cluster_ && int(k) == cluster_left_ + 1
                            ? 0.5 * (cl_center_ + wall_eps() + right_end)
                            : 0.5 * (x_[k] + right_end));
    Complex f;
    if (cluster_ && int(k) == cluster_left_ + 1) {
      // Anchor from the right neighbor vertex instead of the cluster edge.
      f = poly_.vertices[(k + 1) % n] +
          C_ * one_sided(right_end, mid, (k == n - 1) ? poly_.beta(0) : poly_.beta(k + 1),
                         (k == n - 1) ? 0 : int(k + 1));
    } else {
      f = poly_.vertices[k] + C_ * one_sided(x_[k], mid, poly_.beta(k), int(k));
    }
    add_boundary(mid, f);
  }
  // A few interior anchors above each boundary anchor for warm starts.
  std::size_t base = anchors_.size();
  for (std::size_t i = 0; i < base; ++i) {
    for (double hscale : {0.4, 1.5}) {
      Complex zeta = anchors_[i].first + Complex(0, hscale * std::max(1.0, span_ / 2));
      Complex f = anchors_[i].second + C_ * regular_segment(anchors_[i].first, zeta, 0);
      anchors_.push_back({zeta, f});
    }
  }
}

Complex HalfPlaneMap::map(Complex zeta) const {
  if (zeta.imag() < -1e-12) fail(ErrorCode::kPointOutsideDomain, "zeta below the real axis");
  if (std::abs(zeta) > 4.0 * span_) {
    // Route from the vertex at infinity: t = zeta / sigma^2.
    const auto& xs = gl_nodes(kGlOrder);
    const auto& ws = gl_weights(kGlOrder);
    Complex total = 0;
    const int panels = 10;
    for (int p = 0; p < panels; ++p) {
      double g0 = double(p) / panels, g1 = double(p + 1) / panels;
      Complex acc = 0;
      for (int i = 0; i < kGlOrder; ++i) {
        double sig = 0.5 * (g0 + g1) + 0.5 * (g1 - g0) * xs[i];
        if (sig <= 0) continue;
        Complex t = zeta / (sig * sig);
        Complex v = std::exp(log_integrand(t)) * (-2.0 * zeta / (sig * sig * sig));
        if (std::isfinite(v.real()) && std::isfinite(v.imag())) acc += ws[i] * v;
      }
      total += acc * 0.5 * (g1 - g0);
    }
    return poly_.vertices[2] + C_ * total;
  }
  // Nearest anchor with a clearance-friendly straight path.
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    double d = std::abs(zeta - anchors_[i].first);
    if (d < best_score) {
      best_score = d;
      best = i;
    }
  }
  return anchors_[best].second + C_ * regular_segment(anchors_[best].first, zeta, 0);
}

Complex HalfPlaneMap::derivative(Complex zeta) const { return C_ * std::exp(log_integrand(zeta)); }

Complex HalfPlaneMap::inverse(Complex w, std::optional<Complex> guess) const {
  std::vector<Complex> starts;
  if (guess) starts.push_back(*guess);
  // Anchors sorted by image distance.
  std::vector<std::size_t> order(anchors_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(anchors_[a].second - w) < std::abs(anchors_[b].second - w);
  });
  for (std::size_t i = 0; i < std::min<std::size_t>(4, order.size()); ++i)
    starts.push_back(anchors_[order[i]].first + Complex(0, 1e-3 * span_));

  const double tol = 1e-13 * (1.0 + std::abs(w));
  for (Complex z0 : starts) {
    Complex z = z0;
    if (z.imag() <= 0) z = Complex(z.real(), 1e-6 * span_);
    Complex fz = map(z) - w;
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
      if (std::abs(fz) < tol) {
        ok = true;
        break;
      }
      Complex dz = fz / derivative(z);
      double scale = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 32; ++ls) {
        Complex zn = z - scale * dz;
        if (zn.imag() > 0) {
          Complex fn = map(zn) - w;
          if (std::abs(fn) < std::abs(fz)) {
            z = zn;
            fz = fn;
            moved = true;
            break;
          }
        }
        scale *= 0.5;
      }
      if (!moved) break;
    }
    if (ok) return z;
  }
  fail(ErrorCode::kMapNotConverged, "sc inverse did not converge");
}

double HalfPlaneMap::cluster_strength() const {
  if (!cluster_) fail(ErrorCode::kBadInput, "no cluster");
  return std::abs(C_) *
         std::exp(log_integrand_excl(Complex(cl_center_, 0), cluster_left_, -1).real());
}

std::vector<double> HalfPlaneMap::finite_prevertices() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < poly_.size(); ++k)
    if (k != 2) out.push_back(x_[k]);
  return out;
}

std::vector<HalfPlaneMap::SingularPoint> HalfPlaneMap::singular_points() const {
  std::vector<SingularPoint> out;
  for (std::size_t k = 0; k < poly_.size(); ++k) {
    if (k == 2) continue;
    if (cluster_ && (int(k) == cluster_left_ || int(k) == cluster_left_ + 1)) continue;
    out.push_back({x_[k], 0.0});
  }
  if (cluster_) out.push_back({cl_center_, 0.0});
  return out;
}

// --------------------------------------------------------------------------
// serialization

std::string HalfPlaneMap::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["name"] = name_;
  auto& v = j["vertices"] = nlohmann::json::array();
  for (const Complex& w : poly_.vertices) v.push_back({w.real(), w.imag()});
  j["angles"] = poly_.angle_fracs;
  j["gaps"] = gaps_;
  j["residual"] = report_.residual_norm;
  j["closure"] = report_.closure_error;
  return j.dump();
}

std::shared_ptr<HalfPlaneMap> HalfPlaneMap::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("version", 0) != 1) fail(ErrorCode::kBadInput, "unknown map cache version");
  ScPolygon poly;
  for (const auto& w : j["vertices"]) poly.vertices.push_back({w[0], w[1]});
  poly.angle_fracs = j["angles"].get<std::vector<double>>();
  return from_parameters(poly, j["gaps"].get<std::vector<double>>(), j.value("name", "sc"));
}

// --------------------------------------------------------------------------
// composition

Complex ComposedScMap::map(Complex z) const {
  Complex zeta = s1_->inverse(z, warm_zeta_);
  warm_zeta_ = zeta;
  return s2_->map(zeta);
}

Complex ComposedScMap::derivative(Complex z) const {
  Complex zeta = s1_->inverse(z, warm_zeta_);
  warm_zeta_ = zeta;
  return s2_->derivative(zeta) / s1_->derivative(zeta);
}

}  // namespace qdlab::conformal
