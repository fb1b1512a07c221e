#pragma once

#include <functional>
#include <memory>
#include <string>

#include "qdlab/conformal_base.hpp"
#include "qdlab/errors.hpp"
#include "qdlab/numeric.hpp"

namespace qdlab {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression tree for quadratic differential coefficients. `dz2` is the
/// constant-one differential; `pullback f psi` evaluates (f'(z))^2 psi(f(z)).
struct Expr {
  enum class Op { kConst, kZ, kAdd, kSub, kMul, kDiv, kPow, kExp, kPullback };

  Op op = Op::kConst;
  Complex value;        // kConst
  long pow_num = 1;     // kPow: rational exponent pow_num/pow_den
  long pow_den = 1;
  ExprPtr a, b;         // operands (kPullback keeps psi in a)
  std::string map_name;
  std::shared_ptr<const ConformalMapBase> map;  // resolved kPullback target

  bool depends_on_z = false;

  static ExprPtr constant(Complex c);
  static ExprPtr dz2() { return constant(1.0); }
  static ExprPtr z();
  static ExprPtr add(ExprPtr a, ExprPtr b);
  static ExprPtr sub(ExprPtr a, ExprPtr b);
  static ExprPtr mul(ExprPtr a, ExprPtr b);
  static ExprPtr div(ExprPtr a, ExprPtr b);
  static ExprPtr pow(ExprPtr a, long num, long den);
  static ExprPtr exp(ExprPtr a);
  static ExprPtr pullback(std::shared_ptr<const ConformalMapBase> map, std::string name,
                          ExprPtr psi);
};

Complex eval_expr(const Expr& e, Complex z);

/// Resolves a map name in a pullback node to a solved conformal map.
using MapResolver =
    std::function<std::shared_ptr<const ConformalMapBase>(const std::string&)>;

/// Parses the s-expression syntax, e.g. "(mul (const 0 -1) (dz2))" or
/// "(pullback f4 (dz2))". Pullback names are resolved through `resolver`.
ExprPtr parse_sexpr(const std::string& text, const MapResolver& resolver = {});
std::string print_sexpr(const ExprPtr& e);

}  // namespace qdlab
