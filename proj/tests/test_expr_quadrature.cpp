#include "doctest.h"

#include <cmath>

#include "qdlab/quad_diff.hpp"

using namespace qdlab;

namespace {

std::shared_ptr<const PlanarDomain> unit_square_ptr() {
  return std::make_shared<PlanarDomain>(PlanarDomain::unit_square());
}

}  // namespace

TEST_CASE("s-expression parse / print / eval") {
  auto dom = unit_square_ptr();
  QuadDiff minus_dz2 = QuadDiff::parse("(mul (const 0 -1) (dz2))", dom);
  CHECK(minus_dz2.evaluate({0.5, 0.5}) == Complex(0, -1));

  QuadDiff zdz2 = QuadDiff::parse("(z)", dom);
  CHECK(zdz2.evaluate({0.25, 0.5}) == Complex(0.25, 0.5));
  CHECK(zdz2.to_sexpr() == "(z)");

  QuadDiff p = QuadDiff::parse("(pow (z) 3 2)", dom);
  Complex v = p.evaluate({0.3, 0.7});
  Complex expect = std::pow(Complex(0.3, 0.7), 1.5);
  CHECK(std::abs(v - expect) < 1e-15);

  QuadDiff pb = QuadDiff::parse("(pullback identity (z))", dom);
  CHECK(pb.evaluate({0.3, 0.2}) == Complex(0.3, 0.2));

  CHECK_THROWS_AS(QuadDiff::parse("(nope)", dom), Error);
  CHECK_THROWS_AS(QuadDiff::parse("(pullback f2 (dz2))", dom), Error);  // no resolver
}

TEST_CASE("evaluate guards domain and punctures") {
  auto dom = std::make_shared<PlanarDomain>(
      PlanarDomain::rectilinear({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0.5, 0.5}}));
  QuadDiff qd(Expr::dz2(), dom);
  CHECK_THROWS_AS(qd.evaluate({0.5, 0.5}), Error);
  CHECK_THROWS_AS(qd.evaluate({2.0, 0.5}), Error);
  CHECK(qd.evaluate({0.25, 0.25}) == Complex(1, 0));
}

TEST_CASE("l1 norms of explicit differentials") {
  auto dom = unit_square_ptr();
  // |dz^2| over the unit square: area 1.
  CHECK(l1_norm(QuadDiff(Expr::dz2(), dom)).value == doctest::Approx(1.0).epsilon(1e-9));

  // dz^2 over Q_4 (unit-area spur, top n+1): the norm value 2.
  auto q4 = std::make_shared<PlanarDomain>(PlanarDomain::square_with_spur(0.25, 5.0));
  CHECK(l1_norm(QuadDiff(Expr::dz2(), q4)).value == doctest::Approx(2.0).epsilon(1e-9));

  // dz^2 over [0,1]^2 u [0,1/4]x[1,2]: plain area 1.25.
  auto s4 = std::make_shared<PlanarDomain>(PlanarDomain::square_with_spur(0.25, 2.0));
  CHECK(l1_norm(QuadDiff(Expr::dz2(), s4)).value == doctest::Approx(1.25).epsilon(1e-9));

  // |z| dz^2 over the unit square: integral of sqrt(x^2+y^2), a classical
  // closed form: (2 sqrt 2 + 2 asinh 1) / 6... frozen via direct evaluation:
  // int_0^1 int_0^1 sqrt(x^2+y^2) dx dy = (sqrt(2) + asinh(1)) / 3.
  double expect = (std::sqrt(2.0) + std::asinh(1.0)) / 3.0;
  CHECK(l1_norm(QuadDiff(Expr::z(), dom), 1e-8).value ==
        doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("l1 scaling and distance identities") {
  auto dom = unit_square_ptr();
  QuadDiff one(Expr::dz2(), dom);
  QuadDiff scaled = one.scaled({1.1, 0});
  CHECK(l1_distance(one, scaled).value == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(l1_distance(one, one).value == doctest::Approx(0.0));

  // |c^2 phi| = |c|^2 |phi| for complex c (here applied as one factor).
  Complex c{0.6, 0.8};
  QuadDiff c2phi = one.scaled(c * c);
  CHECK(l1_norm(c2phi).value == doctest::Approx(std::norm(c)).epsilon(1e-9));

  auto other = std::make_shared<PlanarDomain>(PlanarDomain::rectangle(0, 0, 2, 1));
  CHECK_THROWS_AS(l1_distance(one, QuadDiff(Expr::dz2(), other)), Error);
}

TEST_CASE("reverse triangle inequality on random pairs") {
  auto dom = unit_square_ptr();
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    Complex ca{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Complex cb{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    QuadDiff a = QuadDiff(Expr::z(), dom).scaled(ca);
    QuadDiff b(Expr::constant(cb), dom);
    double na = l1_norm(a).value, nb = l1_norm(b).value;
    double d = l1_distance(a, b).value;
    CHECK(d >= std::abs(na - nb) - 1e-7);
  }
}

TEST_CASE("find_zeros locates expression zeros") {
  auto dom = std::make_shared<PlanarDomain>(PlanarDomain::rectangle(-1, -1, 1, 1));
  // z dz^2: single order-1 zero at the origin.
  auto zeros = find_zeros(QuadDiff(Expr::z(), dom));
  REQUIRE(zeros.size() == 1);
  CHECK(std::abs(zeros[0].location) < 1e-7);
  CHECK(zeros[0].order == 1);

  // (z^2 - 1/4) dz^2: zeros at +-1/2.
  QuadDiff q = QuadDiff::parse("(sub (mul (z) (z)) (const 0.25 0))", dom);
  auto zs = find_zeros(q);
  REQUIRE(zs.size() == 2);
  CHECK(std::abs(zs[0].location - Complex(-0.5, 0)) < 1e-7);
  CHECK(std::abs(zs[1].location - Complex(0.5, 0)) < 1e-7);

  CHECK(find_zeros(QuadDiff(Expr::dz2(), dom)).empty());
}

TEST_CASE("classify_convergence on the scalar sequence") {
  auto dom = unit_square_ptr();
  QuadDiff limit(Expr::dz2(), dom);
  std::vector<QuadDiff> seq;
  for (int n = 1; n <= 20; ++n) seq.push_back(limit.scaled({1.0 + 1.0 / n, 0}));
  CompactExhaustion ex(PlanarDomain::unit_square(), {0.2, 0.1, 0.05});
  ConvergenceReport rep = classify_convergence(seq, limit, ex);
  CHECK(rep.locally_uniform);
  CHECK(rep.norm_limsup_ok);
  CHECK(rep.l1_convergent);
  CHECK(rep.norms[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.distances.back() == doctest::Approx(1.0 / 20).epsilon(1e-6));
}
