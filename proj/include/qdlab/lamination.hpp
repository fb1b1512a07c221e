#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdlab/trajectory.hpp"

namespace qdlab {

/// Leaf endpoints in normalized cyclic boundary coordinates [0,1).
struct EndpointPair {
  double a = 0;
  double b = 0;
};

/// Strict cyclic interleaving of two endpoint pairs. Shared endpoints
/// (within tol) count as non-crossing; `degenerate` reports that case.
bool crosses(const EndpointPair& p, const EndpointPair& q, bool* degenerate = nullptr,
             double tol = 0.0);

/// Straightens a cross-cut trajectory to its boundary endpoint pair.
EndpointPair straighten(const Trajectory& traj, const PlanarDomain& ambient);

struct Leaf {
  EndpointPair ends;
  double weight = 0;
  std::optional<Trajectory> witness;
};

/// Finite weighted family of pairwise non-crossing boundary-to-boundary
/// leaves.
class DiscreteLamination {
 public:
  DiscreteLamination() = default;
  /// Validates disjointness of the support: strictly interleaving pairs with
  /// endpoint distance above merge_tol are an error; within merge_tol the
  /// leaves are merged.
  DiscreteLamination(std::vector<Leaf> leaves, std::shared_ptr<const PlanarDomain> ambient,
                     double merge_tol = 1e-9);

  const std::vector<Leaf>& leaves() const { return leaves_; }
  const PlanarDomain& ambient() const { return *ambient_; }
  std::shared_ptr<const PlanarDomain> ambient_ptr() const { return ambient_; }
  double total_weight() const;
  DiscreteLamination scaled(double c) const;

  std::string to_json() const;
  static DiscreteLamination from_json(const std::string& text,
                                      std::shared_ptr<const PlanarDomain> ambient);

 private:
  std::vector<Leaf> leaves_;
  std::shared_ptr<const PlanarDomain> ambient_;
};

/// Builds a lamination from traced leaves; non-cross-cut samples are
/// rejected here (callers track their mass separately).
DiscreteLamination from_samples(const std::vector<std::pair<Trajectory, double>>& samples,
                                std::shared_ptr<const PlanarDomain> ambient,
                                double merge_tol = 1e-7);

/// Total transverse crossing mass: sum of weight products over strictly
/// interleaving leaf pairs. Exact summation, symmetric to the bit.
double intersection_number(const DiscreteLamination& mu, const DiscreteLamination& nu);

/// Disjoint quadrilateral cover of the crossing set: maximal contiguous
/// index rectangles of the crossing matrix. `evaluate` reproduces
/// intersection_number bit-exactly (same product multiset, exact sum).
struct QuadCover {
  struct Quad {
    int mu_begin, mu_end;  // [begin, end) in canonical mu leaf order
    int nu_begin, nu_end;
    double mass;
  };
  std::vector<Quad> quads;
  double total = 0;
};
QuadCover build_quad_cover(const DiscreteLamination& mu, const DiscreteLamination& nu);

/// Anything whose horizontal leaf family can be sampled with weights; source
/// side of the sampled intersection pipeline.
class LeafFamilySource {
 public:
  virtual ~LeafFamilySource() = default;
  virtual std::vector<std::pair<Trajectory, double>> sample(int count,
                                                            const TraceOptions& opt) const = 0;
  virtual std::shared_ptr<const PlanarDomain> domain() const = 0;
  /// L1 norm (or its Dirichlet-integral stand-in for foliation models).
  virtual double mass_norm(double tol) const = 0;
  virtual std::string describe() const = 0;
};

/// Horizontal foliation of a quadratic differential. Constant coefficients
/// take the exact parallel-leaf sampler; general coefficients sample along
/// rectangle-midline transversals with first-crossing deduplication.
class QuadDiffSource final : public LeafFamilySource {
 public:
  explicit QuadDiffSource(QuadDiff qd) : qd_(std::move(qd)) {}
  std::vector<std::pair<Trajectory, double>> sample(int count,
                                                    const TraceOptions& opt) const override;
  std::shared_ptr<const PlanarDomain> domain() const override { return qd_.domain_ptr(); }
  double mass_norm(double tol) const override { return l1_norm(qd_, tol).value; }
  std::string describe() const override { return qd_.to_sexpr(); }
  const QuadDiff& qd() const { return qd_; }

 private:
  QuadDiff qd_;
};

/// The horizontal-strip foliation model: horizontal leaves filling
/// [x-extent of the domain] x [y0, y1] with Euclidean transverse measure.
/// Its Dirichlet integral (strip area) stands in for the norm.
class StripModelSource final : public LeafFamilySource {
 public:
  StripModelSource(std::shared_ptr<const PlanarDomain> domain, double y0, double y1)
      : domain_(std::move(domain)), y0_(y0), y1_(y1) {}
  std::vector<std::pair<Trajectory, double>> sample(int count,
                                                    const TraceOptions& opt) const override;
  std::shared_ptr<const PlanarDomain> domain() const override { return domain_; }
  double mass_norm(double) const override;  // strip Dirichlet integral
  std::string describe() const override;
  double y0() const { return y0_; }
  double y1() const { return y1_; }

 private:
  std::shared_ptr<const PlanarDomain> domain_;
  double y0_, y1_;
};

struct IntersectionEstimate {
  double value = 0;
  double error = 0;
  double unassigned_mass_mu = 0;  // weights of non-cross-cut leaves
  double unassigned_mass_nu = 0;
  DiscreteLamination mu, nu;
};

/// Sampled intersection number between the horizontal foliations of two
/// sources, with a resolution + unassigned-mass error estimate.
IntersectionEstimate intersection_from_qds(const LeafFamilySource& phi,
                                           const LeafFamilySource& psi, int samples,
                                           const TraceOptions& opt = {},
                                           double max_unassigned_fraction = 0.25);

struct MinskyReport {
  double i = 0;
  double i_error = 0;
  double norm_phi = 0;
  double norm_psi = 0;
  double bound = 0;   // norm_phi * norm_psi
  double slack = 0;   // bound + combined error - i^2
  bool holds = false;
};

/// Checks i(mu_phi, mu_psi)^2 <= ||phi|| ||psi|| within the combined error
/// budget.
MinskyReport minsky_verify(const LeafFamilySource& phi, const LeafFamilySource& psi,
                           int samples, double tol);

struct ContinuityRow {
  int n = 0;
  double distance = 0;  // L1 distance to the limit
  double i_n = 0;
  double deviation = 0;  // |i_n - i_limit|
};

/// Intersection numbers of a sequence against a fixed differential, with L1
/// distances to the limit (the sequence must live on one domain).
std::vector<ContinuityRow> continuity_experiment(const std::vector<QuadDiff>& seq,
                                                 const QuadDiff& limit,
                                                 const QuadDiff& fixed_psi, int samples,
                                                 const TraceOptions& opt = {});

}  // namespace qdlab
