#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isacsim/geometry.hpp"
#include "isacsim/rng.hpp"

using namespace isacsim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("aoa of the cardinal examples") {
  const Position anchor{-50, 0};
  CHECK(aoa(anchor, {0, 0}) == doctest::Approx(0.0));
  CHECK(aoa(anchor, {-100, 0}) == doctest::Approx(kPi));
  CHECK(aoa(anchor, {0, 50}) == doctest::Approx(kPi / 4));
  CHECK_THROWS_AS(aoa(anchor, anchor), std::domain_error);
}

TEST_CASE("aoa range and vertical edge cases") {
  const Position anchor{0, 0};
  CHECK(aoa(anchor, {0, 1}) == doctest::Approx(kPi / 2));
  // straight below maps to 3*pi/2, keeping the range (-pi/2, 3*pi/2]
  CHECK(aoa(anchor, {0, -1}) == doctest::Approx(3 * kPi / 2));
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Position p{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    if (p.x == 0 && p.y == 0) continue;
    const double theta = aoa(anchor, p);
    CHECK(theta > -kPi / 2);
    CHECK(theta <= 3 * kPi / 2);
  }
}

TEST_CASE("aoa is rotation consistent") {
  Rng rng(3);
  const Position anchor{-5, 2};
  for (int i = 0; i < 100; ++i) {
    const double r = rng.uniform(0.5, 10);
    const double base = rng.uniform(0, 2 * kPi);
    const double phi = rng.uniform(0, 2 * kPi);
    const Position p{anchor.x + r * std::cos(base), anchor.y + r * std::sin(base)};
    const Position q{anchor.x + r * std::cos(base + phi),
                     anchor.y + r * std::sin(base + phi)};
    const double diff = aoa(anchor, q) - aoa(anchor, p) - phi;
    const double wrapped = std::remainder(diff, 2 * kPi);
    CHECK(std::abs(wrapped) < 1e-9);
  }
}

TEST_CASE("radar delay examples and linear scaling") {
  const Position bs{-50, 0};
  CHECK(radar_delay(bs, bs) == 0.0);
  CHECK(radar_delay(bs, {0, 0}) == doctest::Approx(100.0 / 299792458.0));
  CHECK(radar_delay(bs, {-50, 30}) == doctest::Approx(60.0 / 299792458.0));
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Position d{rng.uniform(-40, 40), rng.uniform(-40, 40)};
    const Position p1{bs.x + d.x, bs.y + d.y};
    const Position p2{bs.x + 2 * d.x, bs.y + 2 * d.y};
    CHECK(radar_delay(bs, p2) == doctest::Approx(2 * radar_delay(bs, p1)));
  }
}

TEST_CASE("comm relative delay examples") {
  const Position bs{-50, 0}, user{50, 0};
  CHECK(comm_relative_delay(bs, user, user) == doctest::Approx(0.0));
  CHECK(comm_relative_delay(bs, {0, 0}, user) == doctest::Approx(0.0));
  const double expected = (100.0 * std::sqrt(2.0) - 100.0) / 299792458.0;
  CHECK(comm_relative_delay(bs, {0, 50}, user) == doctest::Approx(expected));
}

TEST_CASE("comm relative delay is non-negative, zero only on the segment") {
  Rng rng(13);
  const Position bs{-25, 0}, user{20, 5};
  for (int i = 0; i < 200; ++i) {
    const Position s{rng.uniform(-25, 25), rng.uniform(-25, 25)};
    const double d = comm_relative_delay(bs, s, user);
    CHECK(d >= 0.0);
    if (d < 1e-15) {
      // collinear and between the endpoints
      const double cross = (s.x - bs.x) * (user.y - bs.y) - (s.y - bs.y) * (user.x - bs.x);
      CHECK(std::abs(cross) < 1e-4);
    }
  }
}

TEST_CASE("steering vector examples") {
  const ArrayGeometry m4(4);
  const auto a0 = steering(0.0, m4);
  for (int i = 0; i < 4; ++i) {
    CHECK(a0(i).real() == doctest::Approx(0.5));
    CHECK(a0(i).imag() == doctest::Approx(0.0));
  }
  const auto a90 = steering(kPi / 2, m4);
  for (int i = 0; i < 4; ++i) {
    CHECK(a90(i).real() == doctest::Approx(i % 2 == 0 ? 0.5 : -0.5));
    CHECK(std::abs(a90(i).imag()) < 1e-12);
  }
  const auto a1 = steering(1.234, ArrayGeometry(1));
  CHECK(a1(0) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("steering vectors have unit norm for any angle and size") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const int m = 1 + static_cast<int>(rng.below(64));
    const double theta = rng.uniform(-kPi / 2, 3 * kPi / 2);
    CHECK(steering(theta, ArrayGeometry(m)).norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(ArrayGeometry(0), std::invalid_argument);
}

TEST_CASE("uniform grid layout") {
  const GridSpec paper({-50, -50, 100, 100}, 5.0);
  const auto pts = uniform_grid(paper);
  REQUIRE(pts.size() == 400);
  CHECK(pts[0].x == doctest::Approx(-47.5));
  CHECK(pts[0].y == doctest::Approx(-47.5));
  CHECK(pts[1].x == doctest::Approx(-42.5));  // row-major: x moves first
  CHECK(pts[1].y == doctest::Approx(-47.5));

  const GridSpec single({-5, -5, 10, 10}, 10.0);
  const auto one = uniform_grid(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].x == doctest::Approx(0.0));
  CHECK(one[0].y == doctest::Approx(0.0));

  CHECK_THROWS_AS(GridSpec({0, 0, 10, 10}, 3.0), std::invalid_argument);
}

TEST_CASE("geometry gradients match finite differences") {
  Rng rng(23);
  const Position bs{-25, 0};
  const double h = 1e-6;
  for (int i = 0; i < 30; ++i) {
    const Position p{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const Position u{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    if (distance(p, bs) < 1.0 || distance(p, u) < 1.0 || distance(u, bs) < 1.0) continue;

    const auto ga = aoa_gradient(bs, p);
    CHECK(ga.x == doctest::Approx((aoa(bs, {p.x + h, p.y}) - aoa(bs, {p.x - h, p.y})) / (2 * h)).epsilon(1e-5));
    CHECK(ga.y == doctest::Approx((aoa(bs, {p.x, p.y + h}) - aoa(bs, {p.x, p.y - h})) / (2 * h)).epsilon(1e-5));

    const auto gr = radar_delay_gradient(bs, p);
    CHECK(gr.x == doctest::Approx((radar_delay(bs, {p.x + h, p.y}) - radar_delay(bs, {p.x - h, p.y})) / (2 * h)).epsilon(1e-5));

    const auto gc = comm_relative_delay_gradient(bs, p, u);
    CHECK(gc.d_scatterer.x ==
          doctest::Approx((comm_relative_delay(bs, {p.x + h, p.y}, u) -
                           comm_relative_delay(bs, {p.x - h, p.y}, u)) / (2 * h))
              .epsilon(1e-4));
    CHECK(gc.d_user.y ==
          doctest::Approx((comm_relative_delay(bs, p, {u.x, u.y + h}) -
                           comm_relative_delay(bs, p, {u.x, u.y - h})) / (2 * h))
              .epsilon(1e-4));
  }
}
