#pragma once

#include <functional>
#include <vector>

#include "scout/dubins.hpp"

namespace scout {

struct PlannerParams {
  double lookahead = 0.2;          // L
  double half_angle = 0.75 * kPi;  // alpha
  double turn_radius = 0.02;       // R; boundary margin is 2R
  int n_candidates = 64;
  int n_path_samples = 16;
};

//! Candidate destinations on the forward arc, boundary-filtered.
struct AdmissibleSet {
  Pose center;
  double lookahead = 0.0;
  double half_angle = 0.0;
  double boundary_margin = 0.0;  // 2R
  std::vector<Vec2> candidates;
};

//! n_candidates bearings uniformly spanning [theta - alpha, theta + alpha];
//! candidates closer than 2R to a unit-square boundary are dropped.  If the
//! filter empties the arc, alpha is doubled once (capped at pi) and re-run;
//! if the set is still empty a PlannerStuckError is thrown.
AdmissibleSet admissible_destinations(const Pose& pose, double lookahead, double half_angle,
                                      double turn_radius, int n_candidates);

//! Cost of measuring at spatial point z at mission time t; the planner
//! minimizes its path integral.
using CostFn = std::function<double(const Vec2& z, double t)>;

struct DestinationChoice {
  Vec2 destination{0.0, 0.0};
  DubinsPath path;
  int candidate_index = -1;
  double integral = 0.0;
};

//! Builds a Dubins path to each candidate (arrival heading = bearing from the
//! current position), samples it, trapezoid-integrates the cost with time
//! advancing as t + s/speed, and returns the minimizing candidate (ties break
//! to the lowest index).
DestinationChoice select_destination(const Pose& pose, const AdmissibleSet& set, const CostFn& cost,
                                     double speed, double t_now, int n_path_samples,
                                     double turn_radius);

}  // namespace scout
