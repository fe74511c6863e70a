#include "scout/planner.hpp"

#include <cmath>

#include "doctest.h"
#include "scout/gp.hpp"

using namespace scout;

TEST_CASE("interior pose keeps the full arc") {
  const Pose pose(0.5, 0.5, 0.3);
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 64);
  CHECK(set.candidates.size() == 64);
  for (const auto& z : set.candidates) {
    CHECK((z - pose.z).norm() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(z[0] > 0.04);
    CHECK(z[0] < 0.96);
    CHECK(z[1] > 0.04);
    CHECK(z[1] < 0.96);
    // bearing within the field of view
    const double b = std::atan2(z[1] - pose.z[1], z[0] - pose.z[0]);
    CHECK(std::abs(wrap_angle(b - pose.theta)) <= 0.75 * kPi + 1e-9);
  }
}

TEST_CASE("wall-facing pose keeps only candidates curving away") {
  const Pose pose(0.01, 0.5, kPi);  // heading straight into the left wall
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 64);
  CHECK(!set.candidates.empty());
  CHECK(set.candidates.size() < 64);
  for (const auto& z : set.candidates) {
    CHECK(z[0] > 0.04);  // margin respected even though the pose is in the wall zone
  }
}

TEST_CASE("boundary-trapped pose escapes by widening the arc once") {
  // Deep in a corner, narrow field of view pointing outward: the initial arc
  // is entirely outside the margin, the doubled arc is not.
  const Pose pose(0.03, 0.03, -0.75 * kPi);
  CHECK_THROWS_AS(admissible_destinations(pose, 0.05, 0.1, 0.02, 8), PlannerStuckError);
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.45 * kPi, 0.02, 64);
  CHECK(!set.candidates.empty());
  CHECK(set.half_angle == doctest::Approx(0.9 * kPi));
}

TEST_CASE("select_destination tie-breaks to the first candidate on zero cost") {
  const Pose pose(0.5, 0.5, 0.0);
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 16);
  auto zero = [](const Vec2&, double) { return 0.0; };
  DestinationChoice c = select_destination(pose, set, zero, 1.0, 0.0, 16, 0.02);
  CHECK(c.candidate_index == 0);
  CHECK(c.integral == 0.0);
}

TEST_CASE("constant positive cost prefers the shortest path") {
  const Pose pose(0.5, 0.5, 0.0);
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 17);
  auto flat = [](const Vec2&, double) { return 1.0; };
  DestinationChoice c = select_destination(pose, set, flat, 1.0, 0.0, 16, 0.02);
  // straight ahead = middle of the arc
  CHECK(c.candidate_index == 8);
  CHECK(c.integral == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("variance-seeking cost picks virgin territory") {
  // Data cluster to the left; negative-variance cost => maximize integrated variance.
  Rng rng(7);
  Dataset d = Dataset::empty(2);
  for (int i = 0; i < 30; ++i) {
    d.append(Vec2(0.3 + 0.02 * rng.normal(), 0.5 + 0.02 * rng.normal()), rng.normal());
  }
  KernelParams p;
  p.signal_variance = 1.0;
  p.lengthscales = Eigen::VectorXd::Constant(2, 0.15);
  p.noise_variance = 1e-3;
  GpModel m(p, d);

  const Pose pose(0.5, 0.5, kPi / 2);
  AdmissibleSet set;
  set.center = pose;
  set.lookahead = 0.2;
  set.boundary_margin = 0.04;
  set.candidates = {Vec2(0.3, 0.5), Vec2(0.7, 0.5)};  // cluster-adjacent vs virgin
  auto cost = [&](const Vec2& z, double) { return -m.posterior_var(z); };
  DestinationChoice c = select_destination(pose, set, cost, 1.0, 0.0, 16, 0.02);
  CHECK(c.candidate_index == 1);
  CHECK(c.destination[0] == doctest::Approx(0.7));
}

TEST_CASE("selected destinations respect the 2R margin") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Pose pose(Vec2(0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()),
                    rng.uniform(-kPi, kPi));
    AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 32);
    auto cost = [&](const Vec2& z, double) { return std::sin(20.0 * z[0]) * std::cos(17.0 * z[1]); };
    DestinationChoice c = select_destination(pose, set, cost, 1.0, 0.0, 16, 0.02);
    CHECK(c.destination[0] > 0.04);
    CHECK(c.destination[0] < 0.96);
    CHECK(c.destination[1] > 0.04);
    CHECK(c.destination[1] < 0.96);
  }
}

TEST_CASE("path integral stable under sampling refinement") {
  Rng rng(13);
  Dataset d = Dataset::empty(2);
  for (int i = 0; i < 25; ++i) d.append(Vec2(rng.uniform(), rng.uniform()), rng.normal());
  KernelParams p;
  p.signal_variance = 1.0;
  p.lengthscales = Eigen::VectorXd::Constant(2, 0.3);
  p.noise_variance = 1e-2;
  GpModel m(p, d);
  auto cost = [&](const Vec2& z, double) { return -m.posterior_var(z); };

  const Pose pose(0.4, 0.45, 0.7);
  AdmissibleSet set = admissible_destinations(pose, 0.2, 0.75 * kPi, 0.02, 16);
  for (size_t i = 0; i < set.candidates.size(); ++i) {
    AdmissibleSet one = set;
    one.candidates = {set.candidates[i]};
    const double c16 = select_destination(pose, one, cost, 1.0, 0.0, 16, 0.02).integral;
    const double c32 = select_destination(pose, one, cost, 1.0, 0.0, 32, 0.02).integral;
    CHECK(std::abs(c16 - c32) <= 1e-3 * std::max({std::abs(c16), std::abs(c32), 1e-12}));
  }
}
