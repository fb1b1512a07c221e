#pragma once

#include <string>

#include "qdlab/numeric.hpp"

namespace qdlab {

/// Minimal interface the expression tree needs from a conformal map: forward
/// evaluation and the complex derivative, plus a convergence flag so pullback
/// evaluation can refuse to use an unconverged map.
class ConformalMapBase {
 public:
  virtual ~ConformalMapBase() = default;
  virtual Complex map(Complex z) const = 0;
  virtual Complex derivative(Complex z) const = 0;
  virtual bool converged() const = 0;
  virtual std::string name() const = 0;
};

class IdentityMap final : public ConformalMapBase {
 public:
  Complex map(Complex z) const override { return z; }
  Complex derivative(Complex) const override { return 1.0; }
  bool converged() const override { return true; }
  std::string name() const override { return "identity"; }
};

}  // namespace qdlab
