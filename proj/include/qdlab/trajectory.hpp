#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdlab/quad_diff.hpp"

namespace qdlab {

/// Local structure of a zero of order k: k+2 prongs, equally spaced after
/// the local normalization.
struct SingularityInfo {
  Complex location;
  int order = 1;
  int prong_count = 3;
  std::vector<double> prong_directions;  // angles of the horizontal prongs
};

std::vector<SingularityInfo> singularities(const QuadDiff& qd, int resolution = 64);

enum class LeafClass { kClosed, kCrossCut, kTransient, kSingularHit };

const char* leaf_class_name(LeafClass c);

/// A traced horizontal leaf: chart-free polyline with natural-parameter
/// stamps (arc length in the |phi|^{1/2} metric, negative on the backward
/// half) and the continued branch sign of sqrt(phi).
struct Trajectory {
  struct Sample {
    double t;
    Complex z;
    int branch;  // sign of the continued sqrt relative to the seed branch
  };
  std::vector<Sample> points;
  LeafClass classification = LeafClass::kTransient;
  Complex endpoint_a, endpoint_b;    // boundary landings for cross-cuts
  std::optional<Complex> singular_hit;
  double length = 0;                 // total |phi|^{1/2} length
  double budget_used = 0;
  double max_leaf_residual = 0;      // max |Im(sqrt(phi) dz)|/|dz| over steps

  std::string to_csv() const;
};

struct TraceOptions {
  double budget = 20.0;
  double step_tol = 1e-6;
  double max_step = 0.02;   // in the |phi|^{1/2} metric
  double min_step = 1e-13;
  double boundary_tol = 1e-9;
};

/// Traces the horizontal leaf through z0 in both directions (adaptive RK4 on
/// dz/dt = 1/sqrt(phi), branch continued by nearest-value matching).
Trajectory trace_horizontal(const QuadDiff& qd, Complex z0, const TraceOptions& opt = {},
                            const std::vector<Zero>& zeros = {});

/// Polyline arc with finitely many chart crossings; carrier for transverse
/// measures.
struct TransverseArc {
  std::vector<Complex> points;

  static TransverseArc segment(Complex a, Complex b) { return {{a, b}}; }
};

/// Total mass |Im(sqrt(phi) dz)| the foliation of `qd` deposits along `arc`.
double arc_transverse_mass(const QuadDiff& qd, const TransverseArc& arc);

/// Leaves through `count` points of the transversal equidistributed in
/// transverse measure; weight = represented mass (summing to the arc mass).
std::vector<std::pair<Trajectory, double>> sample_leaves(const QuadDiff& qd,
                                                         const TransverseArc& transversal,
                                                         int count,
                                                         const TraceOptions& opt = {});

}  // namespace qdlab
