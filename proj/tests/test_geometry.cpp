#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <linevec/geometry.hpp>

#include <cmath>
#include <random>

using namespace linevec;

TEST_CASE("vector arithmetic and norms") {
  Vec2 a(3.0, 4.0);
  CHECK(a.norm() == doctest::Approx(5.0));
  CHECK(a.squaredNorm() == doctest::Approx(25.0));
  CHECK(a.normalized().norm() == doctest::Approx(1.0));
  CHECK(Vec2(0.0, 0.0).normalized().norm() == 0.0);
  Vec2 b = a + Vec2(1.0, -2.0);
  CHECK(b.x == doctest::Approx(4.0));
  CHECK(b.y == doctest::Approx(2.0));
  CHECK(a.dot(Vec2(-4.0, 3.0)) == doctest::Approx(0.0));
  CHECK(Vec2(1.0, 0.0).cross(Vec2(0.0, 1.0)) == doctest::Approx(1.0));
}

TEST_CASE("line angle folds direction sign") {
  Complex east(1.0, 0.0);
  Complex west(-1.0, 0.0);
  Complex north(0.0, 1.0);
  CHECK(lineAngle(east, west) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lineAngle(east, north) == doctest::Approx(M_PI / 2));
  Complex diag = std::polar(1.0, M_PI / 4);
  CHECK(lineAngle(east, diag) == doctest::Approx(M_PI / 4));
  CHECK(lineAngle(west, diag) == doctest::Approx(M_PI / 4));
}

TEST_CASE("angle mod pi stays in range") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    Complex z(u(rng), u(rng));
    if (std::abs(z) < 1e-9) continue;
    double a = angleModPi(z);
    CHECK(a >= 0.0);
    CHECK(a < M_PI);
    // The same line in the opposite direction folds onto the same angle.
    double b = angleModPi(-z);
    CHECK(std::min(std::abs(a - b), M_PI - std::abs(a - b)) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("point-segment distance") {
  Vec2 a(0.0, 0.0), b(10.0, 0.0);
  CHECK(pointSegmentDistance(Vec2(5.0, 3.0), a, b) == doctest::Approx(3.0));
  CHECK(pointSegmentDistance(Vec2(-4.0, 3.0), a, b) == doctest::Approx(5.0));
  CHECK(pointSegmentDistance(Vec2(13.0, 4.0), a, b) == doctest::Approx(5.0));
  // Degenerate segment behaves as a point.
  CHECK(pointSegmentDistance(Vec2(1.0, 1.0), a, a) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("segment intersection basic cases") {
  SegmentHit h = segmentIntersect(Vec2(0, 0), Vec2(10, 0), Vec2(5, -5), Vec2(5, 5));
  REQUIRE(h.hit);
  CHECK(h.pos.x == doctest::Approx(5.0));
  CHECK(h.pos.y == doctest::Approx(0.0));
  CHECK(h.t == doctest::Approx(0.5));
  CHECK(h.u == doctest::Approx(0.5));

  // Non-crossing.
  CHECK_FALSE(segmentIntersect(Vec2(0, 0), Vec2(10, 0), Vec2(5, 1), Vec2(5, 5)).hit);
  // Parallel.
  CHECK_FALSE(segmentIntersect(Vec2(0, 0), Vec2(10, 0), Vec2(0, 1), Vec2(10, 1)).hit);
  // Endpoint touch counts as a hit (closed segments).
  SegmentHit e = segmentIntersect(Vec2(0, 0), Vec2(10, 0), Vec2(10, 0), Vec2(10, 5));
  CHECK(e.hit);
}

TEST_CASE("segment intersection agrees with parametric reconstruction") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 2000; ++i) {
    Vec2 a0(u(rng), u(rng)), a1(u(rng), u(rng)), b0(u(rng), u(rng)), b1(u(rng), u(rng));
    SegmentHit h = segmentIntersect(a0, a1, b0, b1);
    if (!h.hit) continue;
    Vec2 onA = a0 + (a1 - a0) * h.t;
    Vec2 onB = b0 + (b1 - b0) * h.u;
    CHECK(distance(onA, h.pos) < 1e-9);
    CHECK(distance(onB, h.pos) < 1e-6);
  }
}
