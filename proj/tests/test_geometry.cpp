#include <doctest.h>

#include <random>

#include "sparc/geometry.hpp"
#include "support.hpp"

using namespace sparc;
using namespace sparc::geo;
using test::dist;

TEST_SUITE("geometry") {

TEST_CASE("seat angles") {
  for (int i = 0; i < 8; ++i) CHECK(seat_angle(SeatIndex(i)).angle_deg() == doctest::Approx(45.0 * i));
  CHECK_THROWS_AS(SeatIndex(8), std::out_of_range);
  CHECK_THROWS_AS(SeatIndex(-1), std::out_of_range);
}

TEST_CASE("rotation normalizes and composes") {
  CHECK(RotationY(360.0).angle_deg() == 0.0);
  CHECK(RotationY(-45.0).angle_deg() == 315.0);
  CHECK(RotationY(405.0).angle_deg() == 45.0);
  CHECK((RotationY(270.0) + RotationY(135.0)).angle_deg() == 45.0);
  CHECK(shortest_difference_deg(350.0, 10.0) == doctest::Approx(20.0));
  CHECK(shortest_difference_deg(10.0, 350.0) == doctest::Approx(-20.0));
  CHECK(shortest_difference_deg(0.0, 180.0) == doctest::Approx(180.0));
  const Vec3 v{0.3, 1.1, -0.7};
  for (double a : {0.0, 45.0, 90.0, 12.5, 300.0}) {
    CHECK(dist(RotationY(a).inverse().apply(RotationY(a).apply(v)), v) < 1e-15);
  }
}

TEST_CASE("quarter turn matches the counterclockwise oracle") {
  const Vec3 got = RotationY(90.0).apply({1.0, 0.0, 0.0});
  CHECK(dist(got, {0.0, 0.0, -1.0}) < 1e-15);
  for (int k = 0; k < 8; ++k) {
    const Vec3 p{0.37, 0.2, -0.81};
    const Vec3 want = test::oracle::vec(test::oracle::yaw_about(test::oracle::lv(p), {0, 0, 0}, 45.0L * k));
    CHECK(dist(RotationY(45.0 * k).apply(p), want) < 1e-15);
  }
}

TEST_CASE("explicit 90 degree case") {
  // Canonical (0.3, 0.9, -0.2) seen from seat 2 (a quarter turn away).
  const TableFrame f;
  const Vec3 q{0.3, 0.9, -0.2};
  const Vec3 d = from_canonical(q, SeatIndex(2), Condition::Sparc, f);
  CHECK(dist(d, {-0.2, 0.9, -0.3}) < 1e-12);
  CHECK(dist(to_canonical(d, SeatIndex(2), Condition::Sparc, f), q) < 1e-12);
  const Vec3 ru = from_canonical(q, SeatIndex(0), Condition::Sparc, f);
  CHECK(dist(map_reference(ru, SeatIndex(0), SeatIndex(2), Condition::Sparc, f), d) < 1e-12);
}

TEST_CASE("veridical is the identity") {
  const TableFrame f;
  const Vec3 p{0.4, 0.8, 0.1};
  for (int s = 0; s < 8; ++s) {
    CHECK(from_canonical(p, SeatIndex(s), Condition::Veridical, f) == p);
    CHECK(to_canonical(p, SeatIndex(s), Condition::Veridical, f) == p);
    CHECK(map_reference(p, SeatIndex(s), SeatIndex((s + 3) % 8), Condition::Veridical, f) == p);
  }
}

TEST_CASE("display transforms match the oracle and round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  TableFrame f;
  f.center = {0.25, 0.8, -0.4};
  f.workspace_bounds = {{-0.35, 0.8, -1.0}, {0.85, 1.4, 0.2}};
  for (int i = 0; i < 500; ++i) {
    const Vec3 q{u(rng), u(rng), u(rng)};
    const int s = static_cast<int>(rng() % 8);
    const Condition c = (i % 2) ? Condition::Sparc : Condition::Veridical;
    const Vec3 d = from_canonical(q, SeatIndex(s), c, f);
    CHECK(dist(d, test::oracle::displayed(q, s, c, f.center)) < 1e-12);
    CHECK(dist(to_canonical(d, SeatIndex(s), c, f), q) < 1e-12);
    CHECK(d.y == q.y);
  }
}

TEST_CASE("deictic preservation, 1000 random cases") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const TableFrame f;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q{u(rng), 0.75 + u(rng) + 0.6, u(rng)};
    const SeatIndex ru(static_cast<int>(rng() % 8)), lu(static_cast<int>(rng() % 8));
    const Condition c = (rng() & 1) ? Condition::Sparc : Condition::Veridical;
    const Vec3 lhs = map_reference(from_canonical(q, ru, c, f), ru, lu, c, f);
    CHECK(dist(lhs, from_canonical(q, lu, c, f)) <= 1e-9);
    CHECK(dist(lhs, test::oracle::displayed(q, lu.value(), c, f.center)) <= 1e-9);
  }
}

TEST_CASE("shared facing under sparc") {
  const TableFrame f;
  for (int s = 0; s < 8; ++s) {
    const Vec3 own = seat_direction(SeatIndex(s), f);
    CHECK(dist(to_canonical_dir(own, SeatIndex(s), Condition::Sparc), f.assembler_dir) <= 1e-9);
  }
  // Seat 2 sits a quarter turn counterclockwise of the assembler.
  CHECK(dist(seat_direction(SeatIndex(2), f), {0.0, 0.0, -1.0}) < 1e-15);
  CHECK(dist(seat_direction(SeatIndex(4), f), {-1.0, 0.0, 0.0}) < 1e-15);
}

TEST_CASE("quaternions") {
  const Quat q = quat_from_axis_angle({1.0, 2.0, -0.5}, 0.9);
  const Vec3 v{0.2, -0.4, 1.3};
  const auto m = to_matrix(q);
  const Vec3 mv{m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  CHECK(dist(rotate(q, v), mv) < 1e-14);
  const Quat back = quat_from_matrix(m);
  CHECK(dist(rotate(back, v), rotate(q, v)) < 1e-12);
  CHECK(dist(rotate(q * conjugate(q), v), v) < 1e-14);
  CHECK(dist(rotate(quat_yaw_deg(90.0), kForward), RotationY(90.0).apply(kForward)) < 1e-15);
  CHECK(yaw_deg(quat_yaw_deg(135.0)) == doctest::Approx(135.0));
  CHECK(yaw_deg(quat_yaw_deg(-30.0)) == doctest::Approx(330.0));
}

TEST_CASE("arm spline follows de Casteljau") {
  const Vec3 s{0.1, 1.0, 0.9}, h{-0.2, 0.8, 0.1};
  const SplineArm arm = arm_spline(s, h, 24);
  REQUIRE(arm.samples.size() == 24);
  CHECK(arm.samples.front() == s);
  CHECK(arm.samples.back() == h);
  const Vec3 d = h - s;
  const double lift = kSplineLift * norm(d);
  const std::array<Vec3, 4> ctrl{s, s + 0.25 * d + lift * kUp, s + 0.75 * d + lift * kUp, h};
  for (int i = 0; i < 24; ++i) CHECK(dist(arm.samples[i], test::oracle::bezier(ctrl, i / 23.0)) < 1e-12);
  CHECK_THROWS_AS(arm_spline(s, s), DegenerateArm);
  CHECK_THROWS_AS(arm_spline(s, h, 1), std::invalid_argument);
  CHECK(mirror_arm(Handedness::Left) == Handedness::Right);
  CHECK(mirror_arm(Handedness::Right) == Handedness::Left);
}

TEST_CASE("ray sphere") {
  const Ray r = Ray::along({0, 0, 0}, {1, 0, 0});
  REQUIRE(ray_sphere(r, {2, 0, 0}, 0.5).has_value());
  CHECK(*ray_sphere(r, {2, 0, 0}, 0.5) == doctest::Approx(1.5));
  CHECK_FALSE(ray_sphere(r, {0, 2, 0}, 0.5).has_value());
  CHECK_FALSE(ray_sphere(r, {-2, 0, 0}, 0.5).has_value());
  CHECK(*ray_sphere(r, {0.1, 0, 0}, 0.5) == doctest::Approx(0.6));
  CHECK_THROWS_AS(Ray::along({0, 0, 0}, {0, 0, 0}), std::invalid_argument);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int hits = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 o{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
    const Ray ray = Ray::toward(o, c + Vec3{u(rng), u(rng), u(rng)} * 0.3);
    const double rad = 0.1 + std::abs(u(rng)) / 3.0;
    const auto got = ray_sphere(ray, c, rad);
    const auto want = test::oracle::sphere_hit(ray.origin, ray.dir, c, rad);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      ++hits;
      CHECK(*got == doctest::Approx(*want).epsilon(1e-9));
    }
  }
  CHECK(hits > 100);
}

TEST_CASE("ray box") {
  const Box unit{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
  CHECK(*ray_box(Ray::along({-1, 0, 0}, {1, 0, 0}), unit) == doctest::Approx(0.5));
  CHECK(*ray_box(Ray::along({0.1, 0.2, 0}, {0, 0, 1}), unit) == 0.0);
  CHECK_FALSE(ray_box(Ray::along({-1, 0, 0}, {-1, 0, 0}), unit).has_value());
  CHECK_FALSE(ray_box(Ray::along({-1, 0.6, 0}, {1, 0, 0}), unit).has_value());

  // March along the ray and compare with the first sampled containment.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  constexpr int kSteps = 10000;
  constexpr double kLen = 12.0;
  constexpr double kStep = kLen / kSteps;
  int hits = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 lo{u(rng) / 2, u(rng) / 2, u(rng) / 2};
    const Vec3 size{0.2 + std::abs(u(rng)) / 3, 0.2 + std::abs(u(rng)) / 3, 0.2 + std::abs(u(rng)) / 3};
    const Box box{lo, lo + size};
    const Ray ray = Ray::toward({u(rng), u(rng), u(rng)}, box.center() + Vec3{u(rng), u(rng), u(rng)} * 0.3);
    std::optional<double> want;
    for (int k = 0; k <= kSteps && !want; ++k) {
      if (point_in_box(ray.at(k * kStep), box)) want = k * kStep;
    }
    const auto got = ray_box(ray, box);
    if (want) {
      ++hits;
      REQUIRE(got.has_value());
      CHECK(*got <= *want + 1e-12);
      CHECK(*got >= *want - kStep);
    } else if (got) {
      // Only a sliver shorter than one step may slip between samples.
      CHECK(point_in_box(ray.at(*got + 1e-12), Box{box.min - Vec3{1e-9, 1e-9, 1e-9}, box.max + Vec3{1e-9, 1e-9, 1e-9}}));
    }
  }
  CHECK(hits > 100);
}

TEST_CASE("point in box is inclusive") {
  const Box b{{0, 0, 0}, {1, 1, 1}};
  CHECK(point_in_box({0, 0, 0}, b));
  CHECK(point_in_box({1, 1, 1}, b));
  CHECK(point_in_box({0.5, 0.5, 0.5}, b));
  CHECK_FALSE(point_in_box({1 + 1e-6, 0.5, 0.5}, b));
  CHECK_FALSE(point_in_box({0.5, -1e-6, 0.5}, b));
}

TEST_CASE("table frame validation") {
  TableFrame f;
  CHECK_NOTHROW(f.validate());
  f.seat_radius = 0.5;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f = TableFrame{};
  f.center = {2.0, 0.75, 0.0};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f = TableFrame{};
  f.assembler_dir = {1.0, 0.1, 0.0};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

}
