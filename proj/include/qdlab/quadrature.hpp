#pragma once

#include <functional>
#include <vector>

#include "qdlab/domain.hpp"
#include "qdlab/numeric.hpp"

namespace qdlab {

/// Pointwise nonnegative density to be integrated (already |.|-ed).
using Density = std::function<double(Complex)>;

struct QuadratureOptions {
  int gl_order = 6;        // tensor Gauss-Legendre order per cell
  int max_depth = 32;      // quadtree depth cap
  int boundary_depth = 12; // depth cap for curved-boundary (disk) cells
  double excise_radius = 1e-8;  // neighborhood dropped around avoid points
  std::vector<Complex> avoid;   // punctures / expression zeros
  /// Cells whose closure meets one of these disks are skipped entirely; the
  /// caller adds their mass analytically.
  struct Excision {
    Complex center;
    double radius;
  };
  std::vector<Excision> excisions;
};

struct QuadratureResult {
  double value = 0;
  double error_estimate = 0;
  long cells = 0;
  bool converged = true;

  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    error_estimate += o.error_estimate;
    cells += o.cells;
    converged = converged && o.converged;
    return *this;
  }
};

/// Nodes/weights for n-point Gauss-Legendre on [-1,1].
const std::vector<double>& gl_nodes(int n);
const std::vector<double>& gl_weights(int n);

/// Adaptive tensor-product Gauss-Legendre on a quadtree over the rectangle.
/// Cells are subdivided while the two-level estimates differ by more than the
/// per-cell share of `tol`; traversal order is fixed, so the reduction is
/// deterministic.
QuadratureResult integrate_rect(const Rect& rect, const Density& f, double tol,
                                const QuadratureOptions& opt = {});

/// Integral over the domain: rectangle decomposition for rectilinear
/// polygons, masked quadtree with boundary-cell fallback for the disk.
QuadratureResult integrate_domain(const PlanarDomain& domain, const Density& f,
                                  double tol, const QuadratureOptions& opt = {});

/// Composite Gauss-Legendre along the segment [a,b] (complex line integral of
/// a scalar density against arc length).
double integrate_segment(Complex a, Complex b, const std::function<double(Complex)>& f,
                         int panels = 8, int order = 8);

}  // namespace qdlab
