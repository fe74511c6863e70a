#include "scout/dubins.hpp"

#include <cmath>

#include "doctest.h"
#include "scout/validate.hpp"

using namespace scout;

TEST_CASE("collinear aligned poses give a straight segment") {
  DubinsPath p = shortest_dubins(Pose(0, 0, 0), Pose(1, 0, 0), 0.02);
  CHECK(p.length() == doctest::Approx(1.0).epsilon(1e-12));
  const Pose end = p.end();
  CHECK(end.z[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(end.z[1]) < 1e-9);
}

TEST_CASE("coincident poses give a zero-length path") {
  DubinsPath p = shortest_dubins(Pose(0.3, 0.4, 1.0), Pose(0.3, 0.4, 1.0), 0.05);
  CHECK(p.length() == 0.0);
}

TEST_CASE("endpoint consistency") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Pose a(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const Pose b(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const double rho = 0.02 + 0.2 * rng.uniform();
    const DubinsPath p = shortest_dubins(a, b, rho);
    const Pose end = p.end();
    CHECK((end.z - b.z).norm() < 1e-9);
    CHECK(std::abs(wrap_angle(end.theta - b.theta)) < 1e-9);
  }
}

TEST_CASE("length dominates euclidean distance") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const Pose a(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const Pose b(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const double rho = 0.02 + 0.3 * rng.uniform();
    CHECK(shortest_dubins(a, b, rho).length() >= (b.z - a.z).norm() - 1e-12);
  }
}

TEST_CASE("invariant under rigid rotation and translation") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Pose a(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const Pose b(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const double rho = 0.05 + 0.2 * rng.uniform();
    const double len = shortest_dubins(a, b, rho).length();

    const double phi = rng.uniform(-kPi, kPi);
    const Vec2 shift(rng.uniform(-2, 2), rng.uniform(-2, 2));
    auto rigid = [&](const Pose& p) {
      const double c = std::cos(phi), s = std::sin(phi);
      return Pose(Vec2(c * p.z[0] - s * p.z[1], s * p.z[0] + c * p.z[1]) + shift, p.theta + phi);
    };
    CHECK(shortest_dubins(rigid(a), rigid(b), rho).length() == doctest::Approx(len).epsilon(1e-9));
  }
}

TEST_CASE("u-turn against a brute-force sweep") {
  // end directly above the start, facing back: length verified independently
  const double rho = 0.1;
  const Pose a(0, 0, 0), b(0, 4 * rho, kPi);
  const double len = shortest_dubins(a, b, rho).length();
  const double ref = validate::dubins_brute_force_length(a, b, rho, 1e-4);
  CHECK(len == doctest::Approx(ref).epsilon(1e-3));
}

TEST_CASE("shortest path matches the brute-force oracle on random pairs") {
  Rng rng(17);
  for (int i = 0; i < 25; ++i) {
    const Pose a(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const Pose b(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi));
    const double rho = (i % 2 == 0) ? 0.02 + 0.03 * rng.uniform() : 0.1 + 0.2 * rng.uniform();
    const double len = shortest_dubins(a, b, rho).length();
    const double ref = validate::dubins_brute_force_length(a, b, rho, 1e-4);
    CHECK(len == doctest::Approx(ref).epsilon(1e-3));
  }
}

TEST_CASE("sample_path spacing and endpoints") {
  SUBCASE("straight path, ds=0.25") {
    DubinsPath p = shortest_dubins(Pose(0, 0, 0), Pose(1, 0, 0), 0.02);
    auto pts = sample_path(p, 0.25);
    REQUIRE(pts.size() == 5);
    for (int i = 0; i < 5; ++i) {
      CHECK(pts[i].first[0] == doctest::Approx(0.25 * i).epsilon(1e-12));
      CHECK(pts[i].second == doctest::Approx(0.25 * i).epsilon(1e-12));
    }
  }
  SUBCASE("arc samples stay on the turning circle") {
    // pure-turn path: same position, opposite heading unreachable without arcs
    DubinsPath p = shortest_dubins(Pose(0, 0, 0), Pose(0, 0.2, kPi), 0.1);
    auto pts = sample_path(p, 0.01);
    // first segment is an arc around a center at distance rho from start
    double s_acc = 0.0;
    const auto& seg = p.segments[0];
    REQUIRE(seg.kind != Turn::Straight);
    const double sgn = seg.kind == Turn::Left ? 1.0 : -1.0;
    const Vec2 center = Vec2(0, 0) + 0.1 * Vec2(-sgn * std::sin(0.0), sgn * std::cos(0.0));
    for (const auto& [z, s] : pts) {
      if (s > seg.length) break;
      CHECK((z - center).norm() == doctest::Approx(0.1).epsilon(1e-9));
      s_acc = s;
    }
    CHECK(s_acc > 0.0);
  }
  SUBCASE("chord sum converges to the length from below") {
    Rng rng(19);
    const Pose a(0.1, 0.2, 0.3), b(0.8, 0.7, -2.0);
    DubinsPath p = shortest_dubins(a, b, 0.15);
    double prev = 0.0;
    for (double ds : {0.2, 0.05, 0.0125}) {
      auto pts = sample_path(p, ds);
      double chord = 0.0;
      for (size_t i = 1; i < pts.size(); ++i) chord += (pts[i].first - pts[i - 1].first).norm();
      CHECK(chord <= p.length() + 1e-12);
      CHECK(chord >= prev - 1e-12);
      prev = chord;
    }
    CHECK(prev == doctest::Approx(p.length()).epsilon(1e-3));
  }
  SUBCASE("consecutive samples at most ds apart in arclength") {
    DubinsPath p = shortest_dubins(Pose(0, 0, 1.0), Pose(0.5, 0.1, -1.0), 0.07);
    auto pts = sample_path(p, 0.03);
    for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].second - pts[i - 1].second <= 0.03 + 1e-12);
    CHECK(pts.back().second == doctest::Approx(p.length()));
  }
}
