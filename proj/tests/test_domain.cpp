#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qdlab/domain.hpp"

using namespace qdlab;

TEST_CASE("rectilinear polygon decomposition and area") {
  PlanarDomain sq = PlanarDomain::unit_square();
  CHECK(sq.area() == doctest::Approx(1.0));
  CHECK(sq.contains({0.5, 0.5}));
  CHECK(!sq.contains({1.5, 0.5}));
  CHECK(sq.distance_to_boundary({0.5, 0.5}) == doctest::Approx(0.5));

  // Q_4 = [0,1]^2 u [0,1/4]x[1,4]: area 1 + (1/4)*3 = 1.75... the paper's
  // Q_n has area 2 for every n: 1 + (1/n)(n-1) = 2 - 1/n. Check the raw sum.
  PlanarDomain q4 = PlanarDomain::square_with_spur(0.25, 4.0);
  CHECK(q4.area() == doctest::Approx(1.0 + 0.25 * 3.0));
  CHECK(q4.contains({0.1, 2.0}));
  CHECK(!q4.contains({0.5, 1.5}));
}

TEST_CASE("boundary coordinates round-trip") {
  PlanarDomain sq = PlanarDomain::unit_square();
  for (double c : {0.0, 0.1, 0.3, 0.55, 0.99}) {
    Complex z = sq.boundary_point(c);
    CHECK(sq.boundary_coordinate(z) == doctest::Approx(c).epsilon(1e-12));
  }
  PlanarDomain disk = PlanarDomain::unit_disk();
  Complex z = disk.boundary_point(0.25);
  CHECK(z.real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.imag() == doctest::Approx(1.0));
}

TEST_CASE("domain json round-trip") {
  PlanarDomain q2 = PlanarDomain::square_with_spur(0.5, 2.0);
  PlanarDomain back = PlanarDomain::from_json(q2.to_json());
  CHECK(back.same_as(q2));

  PlanarDomain disk = PlanarDomain::unit_disk({{0.2, 0.3}});
  PlanarDomain back2 = PlanarDomain::from_json(disk.to_json());
  CHECK(back2.same_as(disk));
}

TEST_CASE("puncture validation") {
  CHECK_THROWS_AS(PlanarDomain::rectilinear({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{2.0, 2.0}}),
                  Error);
}

TEST_CASE("compact exhaustion nesting") {
  PlanarDomain sq = PlanarDomain::unit_square();
  CompactExhaustion ex(sq, {0.2, 0.1, 0.05});
  CHECK(ex.size() == 3);
  CHECK(ex.region_contains(0, {0.5, 0.5}));
  CHECK(!ex.region_contains(0, {0.15, 0.5}));
  CHECK(ex.region_contains(1, {0.15, 0.5}));
  // strict nesting: margins must decrease
  CHECK_THROWS_AS(CompactExhaustion(sq, {0.1, 0.2}), Error);
}
