#include "scout/planner.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace scout {

namespace {

std::vector<Vec2> arc_candidates(const Pose& pose, double L, double alpha, double margin,
                                 int n_candidates) {
  std::vector<Vec2> out;
  out.reserve(n_candidates);
  for (int i = 0; i < n_candidates; ++i) {
    const double bearing = pose.theta - alpha + 2.0 * alpha * i / (n_candidates - 1);
    const Vec2 z = pose.z + L * Vec2(std::cos(bearing), std::sin(bearing));
    const bool safe = z[0] > margin && z[0] < 1.0 - margin && z[1] > margin && z[1] < 1.0 - margin;
    if (safe) out.push_back(z);
  }
  return out;
}

}  // namespace

AdmissibleSet admissible_destinations(const Pose& pose, double lookahead, double half_angle,
                                      double turn_radius, int n_candidates) {
  if (!(lookahead > 0.0)) throw ContractError("admissible_destinations: lookahead must be positive");
  if (!(half_angle > 0.0 && half_angle <= kPi)) {
    throw ContractError("admissible_destinations: half_angle must be in (0, pi]");
  }
  if (n_candidates < 2) throw ContractError("admissible_destinations: need at least 2 candidates");

  AdmissibleSet set;
  set.center = pose;
  set.lookahead = lookahead;
  set.half_angle = half_angle;
  set.boundary_margin = 2.0 * turn_radius;
  set.candidates = arc_candidates(pose, lookahead, half_angle, set.boundary_margin, n_candidates);
  if (set.candidates.empty()) {
    // Escape hatch near corners: widen the field of view once.
    set.half_angle = std::min(2.0 * half_angle, kPi);
    set.candidates =
        arc_candidates(pose, lookahead, set.half_angle, set.boundary_margin, n_candidates);
  }
  if (set.candidates.empty()) {
    std::ostringstream os;
    os << "admissible set empty at pose (" << pose.z[0] << ", " << pose.z[1] << ", theta "
       << pose.theta << ") with L=" << lookahead << ", alpha=" << half_angle << ", 2R margin "
       << set.boundary_margin;
    throw PlannerStuckError(os.str());
  }
  return set;
}

DestinationChoice select_destination(const Pose& pose, const AdmissibleSet& set, const CostFn& cost,
                                     double speed, double t_now, int n_path_samples,
                                     double turn_radius) {
  if (set.candidates.empty()) throw PlannerStuckError("select_destination: empty admissible set");
  if (n_path_samples < 2) throw ContractError("select_destination: need at least 2 path samples");
  if (!(speed > 0.0)) throw ContractError("select_destination: speed must be positive");

  DestinationChoice best;
  double best_integral = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < set.candidates.size(); ++i) {
    const Vec2& dest = set.candidates[i];
    const Vec2 offset = dest - pose.z;
    const double arrival_heading = std::atan2(offset[1], offset[0]);
    const DubinsPath path = shortest_dubins(pose, Pose(dest, arrival_heading), turn_radius);

    const double len = path.length();
    const double ds = len / (n_path_samples - 1);
    double integral = 0.0;
    double prev = 0.0;
    for (int k = 0; k < n_path_samples; ++k) {
      const double s = ds * k;
      const Pose at = path.point_at(s);
      const double c = cost(at.z, t_now + s / speed);
      if (k > 0) integral += 0.5 * (prev + c) * ds;
      prev = c;
    }
    if (integral < best_integral) {
      best_integral = integral;
      best.destination = dest;
      best.path = path;
      best.candidate_index = static_cast<int>(i);
      best.integral = integral;
    }
  }
  return best;
}

}  // namespace scout
