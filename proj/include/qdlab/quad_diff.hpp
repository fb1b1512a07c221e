#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qdlab/domain.hpp"
#include "qdlab/expr.hpp"
#include "qdlab/quadrature.hpp"

namespace qdlab {

/// A holomorphic quadratic differential phi(z) dz^2 on a planar domain,
/// given by an expression tree (possibly with pullback nodes).
class QuadDiff {
 public:
  QuadDiff(ExprPtr expr, std::shared_ptr<const PlanarDomain> domain)
      : expr_(std::move(expr)), domain_(std::move(domain)) {}

  static QuadDiff parse(const std::string& sexpr,
                        std::shared_ptr<const PlanarDomain> domain,
                        const MapResolver& resolver = {});

  /// Value of phi at an interior non-puncture point.
  Complex evaluate(Complex z) const;
  /// Raw expression value without the domain checks (quadrature fast path).
  Complex evaluate_unchecked(Complex z) const { return eval_expr(*expr_, z); }

  const PlanarDomain& domain() const { return *domain_; }
  std::shared_ptr<const PlanarDomain> domain_ptr() const { return domain_; }
  const ExprPtr& expr() const { return expr_; }
  std::string to_sexpr() const { return print_sexpr(expr_); }

  QuadDiff scaled(Complex c) const {
    return QuadDiff(Expr::mul(Expr::constant(c), expr_), domain_);
  }

 private:
  ExprPtr expr_;
  std::shared_ptr<const PlanarDomain> domain_;
};

struct NormResult {
  double value = 0;
  double error = 0;       // quadrature error estimate
  bool converged = true;
  long cells = 0;
};

/// L1 norm of the differential over its domain, by adaptive quadrature. For
/// expressions holding Schwarz-Christoffel pullbacks the integral is
/// transplanted to the parameter half-plane, where the spur mass of the
/// crowded Example-4.2 maps is integrable in double precision (the crowded
/// cluster zone enters through a closed-form logarithmic patch).
NormResult l1_norm(const QuadDiff& qd, double tol = 1e-6);

/// L1 distance integral |a - b| over the common domain.
NormResult l1_distance(const QuadDiff& a, const QuadDiff& b, double tol = 1e-6);

/// Finds zeros of the coefficient inside the domain (argument-principle cell
/// sweep with local refinement).
struct Zero {
  Complex location;
  int order = 1;
};
std::vector<Zero> find_zeros(const QuadDiff& qd, int resolution = 64);

/// Conservative syntactic test: can the coefficient vanish inside the
/// domain? (Pullbacks of non-vanishing expressions cannot: f' != 0.)
bool expr_may_vanish(const Expr& e);

struct ConvergenceReport {
  // sup_errors[r][n]: sup over sampled region r of |phi_n - phi|.
  std::vector<std::vector<double>> sup_errors;
  std::vector<double> norms;
  std::vector<double> distances;
  double limit_norm = 0;
  bool locally_uniform = false;
  bool norm_limsup_ok = false;
  bool l1_convergent = false;
};

/// Evaluates the two conditions of the L1-convergence criterion on the given
/// finite prefix (decreasing-trend heuristics; verdicts are about the prefix
/// and are never extrapolated).
ConvergenceReport classify_convergence(const std::vector<QuadDiff>& seq,
                                       const QuadDiff& limit,
                                       const CompactExhaustion& exhaustion,
                                       double tol = 1e-4);

}  // namespace qdlab
