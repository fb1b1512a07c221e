#include "doctest.h"

#include <cmath>

#include "qdlab/map_registry.hpp"
#include "qdlab/quad_diff.hpp"

using namespace qdlab;
using conformal::HalfPlaneMap;

// Reference values from tests/oracle/sc_oracle.py (mpmath, 40-140 digits).
namespace oracle {
// unit square: prevertices 0, 1, inf, -1 exactly; C purely imaginary.
constexpr double kSquareC = 0.3813798817509066;
// spur n=2 (Q_2):
constexpr double kQ2X4 = -2.0334450020608963;
constexpr double kQ2X5 = -1.4207366245779809;
constexpr double kQ2X6 = -1.4187081294057289;
constexpr double kQ2LogLam = -6.8936082358401397;
constexpr double kQ2C = 0.3765463560034478;
constexpr Complex kQ2F{0.4955526569352040, 0.5029172706834884};
constexpr Complex kQ2Fp{1.0177731709584910, 0.0077089954844864};
constexpr Complex kQ2FB{0.2211231492833401, 0.7500923996084460};
constexpr Complex kQ2FC{0.8994932601331190, 0.1004995543160996};
constexpr double kQ2Sup5x5 = 0.0919104946307;
// spur n=4 (Q_4): cluster below double resolution (lambda ~ 4.4e-18).
constexpr double kQ4X4 = -1.1904709431640285;
constexpr double kQ4Center = -1.0910148313610719;
constexpr double kQ4LogLam = -39.9726592701278793;
constexpr Complex kQ4F{0.4997471960387989, 0.5002277092531217};
constexpr Complex kQ4Fp{1.0012533064075249, 0.0001312546961867};
constexpr double kQ4Sup5x5 = 0.0217222563807;
// sqrt-variant n=4 (spur top 2, lambda ~ 3.6e-7, solved without cluster).
constexpr double kS4X4 = -1.1904709431643988;
constexpr double kS4LogLam = -14.8399180414084633;
}  // namespace oracle

TEST_CASE("square map solves to the lemniscatic configuration") {
  MapRegistry reg;
  auto sq = reg.square_map();
  CHECK(sq->converged());
  CHECK(sq->report().residual_norm < 1e-11);
  CHECK(sq->report().closure_error < 1e-9);
  auto xs = sq->finite_prevertices();
  REQUIRE(xs.size() == 3);
  CHECK(xs[2] == doctest::Approx(-1.0).epsilon(1e-10));  // vertex (0,1)
  CHECK(std::abs(sq->scale() - Complex(0, oracle::kSquareC)) < 1e-10);

  // Map values: center of the half-plane symmetric point i -> square center.
  CHECK(std::abs(sq->map({0, 1}) - Complex(0.5, 0.5)) < 1e-10);
  // inverse round-trip
  Complex z{0.3, 0.6};
  Complex zeta = sq->inverse(z);
  CHECK(std::abs(sq->map(zeta) - z) < 1e-11);
}

TEST_CASE("Q_2 parameter problem matches the high-precision oracle") {
  MapRegistry reg;
  auto q2 = reg.spur_half_plane(2.0, 2.0);
  CHECK(q2->converged());
  CHECK(!q2->cluster_active());  // gap ~ 2e-3: direct representation
  auto xs = q2->finite_prevertices();
  REQUIRE(xs.size() == 5);
  CHECK(xs[2] == doctest::Approx(oracle::kQ2X4).epsilon(1e-9));
  CHECK(xs[3] == doctest::Approx(oracle::kQ2X5).epsilon(1e-9));
  CHECK(xs[4] == doctest::Approx(oracle::kQ2X6).epsilon(1e-9));
  CHECK(std::log((xs[4] - xs[3]) / 2) == doctest::Approx(oracle::kQ2LogLam).epsilon(1e-6));
  CHECK(std::abs(q2->scale() - Complex(0, oracle::kQ2C)) < 1e-9);

  auto f2 = reg.spur_map(2.0, 2.0);
  CHECK(std::abs(f2->map({0.5, 0.5}) - oracle::kQ2F) < 1e-9);
  CHECK(std::abs(f2->derivative({0.5, 0.5}) - oracle::kQ2Fp) < 1e-8);
  CHECK(std::abs(f2->map({0.25, 0.75}) - oracle::kQ2FB) < 1e-9);
  CHECK(std::abs(f2->map({0.9, 0.1}) - oracle::kQ2FC) < 1e-9);
}

TEST_CASE("Q_4 cluster mode matches the oracle in log space") {
  MapRegistry reg;
  auto q4 = reg.spur_half_plane(4.0, 4.0);
  CHECK(q4->converged());
  CHECK(q4->cluster_active());
  CHECK(q4->report().crowded);  // flagged per contract, accuracy kept
  CHECK(q4->cluster_center() == doctest::Approx(oracle::kQ4Center).epsilon(1e-9));
  CHECK(q4->cluster_log_lambda() == doctest::Approx(oracle::kQ4LogLam).epsilon(1e-7));
  auto xs = q4->finite_prevertices();
  CHECK(xs[2] == doctest::Approx(oracle::kQ4X4).epsilon(1e-9));

  auto f4 = reg.spur_map(4.0, 4.0);
  CHECK(std::abs(f4->map({0.5, 0.5}) - oracle::kQ4F) < 1e-9);
  CHECK(std::abs(f4->derivative({0.5, 0.5}) - oracle::kQ4Fp) < 1e-8);
}

TEST_CASE("sqrt-variant n=4 cluster parameters match the oracle") {
  MapRegistry reg;
  auto s4 = reg.spur_half_plane(4.0, 2.0);
  CHECK(s4->converged());
  CHECK(s4->cluster_active());  // lambda ~ 3.6e-7: below the cluster threshold
  auto xs = s4->finite_prevertices();
  CHECK(xs[2] == doctest::Approx(oracle::kS4X4).epsilon(1e-8));
  CHECK(s4->cluster_log_lambda() == doctest::Approx(oracle::kS4LogLam).epsilon(1e-5));
}

TEST_CASE("identity normalization: three fixed points stay fixed") {
  MapRegistry reg;
  for (double n : {2.0, 4.0}) {
    auto f = reg.spur_map(n, n);
    for (Complex p : {Complex(0, 0), Complex(1, 0), Complex(1, 1)}) {
      // Boundary fixed points: approach from inside to dodge corner cases.
      Complex inside = p + Complex(p.real() > 0.5 ? -1e-4 : 1e-4,
                                   p.imag() > 0.5 ? -1e-4 : 1e-4);
      CHECK(std::abs(f->map(inside) - inside) < 5e-3);
    }
  }
}

TEST_CASE("pullback norm reproduces the target area (conformal invariance)") {
  MapRegistry reg;
  auto dom = std::make_shared<PlanarDomain>(PlanarDomain::unit_square());

  // ||pullback(f_2, dz^2)|| = area(Q_2) = 2 (unit-area spur).
  QuadDiff phi2(Expr::pullback(reg.resolve("f2"), "f2", Expr::dz2()), dom);
  NormResult n2 = l1_norm(phi2, 1e-3);
  CHECK(n2.value == doctest::Approx(2.0).epsilon(2e-3));

  // ||pullback(f_4, dz^2)|| = area(Q_4) = 2 - crosses the cluster path.
  QuadDiff phi4(Expr::pullback(reg.resolve("f4"), "f4", Expr::dz2()), dom);
  NormResult n4 = l1_norm(phi4, 1e-3);
  CHECK(n4.value == doctest::Approx(2.0).epsilon(2e-3));

  // A plain-geometry spur map: top 4 has area 1.75.
  QuadDiff phi44(Expr::pullback(reg.spur_map(4.0, 4.0), "spur4x4", Expr::dz2()), dom);
  CHECK(l1_norm(phi44, 1e-3).value == doctest::Approx(1.75).epsilon(2e-3));

  // Distance to dz^2 >= norm gap = 1.
  QuadDiff one(Expr::dz2(), dom);
  double d4 = l1_distance(phi4, one, 1e-3).value;
  CHECK(d4 >= 1.0 - 5e-3);
}

TEST_CASE("sup |f_n - id| on the 5x5 grid matches the oracle and decreases") {
  MapRegistry reg;
  auto sup5x5 = [&](double n, double top) {
    auto f = reg.spur_map(n, top);
    double sup = 0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        Complex z{0.1 + 0.2 * i, 0.1 + 0.2 * j};
        sup = std::max(sup, std::abs(f->map(z) - z));
      }
    return sup;
  };
  double s2 = sup5x5(2, 2), s4 = sup5x5(4, 4);
  CHECK(s2 == doctest::Approx(oracle::kQ2Sup5x5).epsilon(1e-6));
  CHECK(s4 == doctest::Approx(oracle::kQ4Sup5x5).epsilon(1e-6));
  CHECK(s4 < s2);
}

TEST_CASE("map cache round-trips through json") {
  MapRegistry reg;
  auto q2 = reg.spur_half_plane(2.0, 2.0);
  auto back = HalfPlaneMap::from_json(q2->to_json());
  CHECK(back->converged());
  CHECK(std::abs(back->map({0, 1}) - q2->map({0, 1})) < 1e-12);
}

TEST_CASE("general sc_map: identity target") {
  MapRegistry reg;
  auto id = reg.sc_map(PlanarDomain::unit_square(), {0, 0}, {1, 0}, {1, 1});
  for (Complex z : {Complex(0.3, 0.3), Complex(0.7, 0.2), Complex(0.5, 0.9)})
    CHECK(std::abs(id->map(z) - z) < 1e-6);
}
