#pragma once

#include <array>
#include <vector>

#include "scout/common.hpp"

namespace scout {

struct Pose {
  Vec2 z{0.0, 0.0};
  double theta = 0.0;  // radians, 0 along the z1 axis, normalized to (-pi, pi]

  Pose() = default;
  Pose(const Vec2& z_, double theta_) : z(z_), theta(wrap_angle(theta_)) {}
  Pose(double x, double y, double theta_) : z(x, y), theta(wrap_angle(theta_)) {}
};

enum class Turn { Left, Straight, Right };

struct DubinsSegment {
  Turn kind = Turn::Straight;
  double length = 0.0;  // arclength, >= 0
};

//! Shortest curvature-bounded path: at most three segments, C1 by construction.
struct DubinsPath {
  Pose start;
  std::array<DubinsSegment, 3> segments;
  double turning_radius = 1.0;

  double length() const { return segments[0].length + segments[1].length + segments[2].length; }
  //! Pose after traveling arclength s from the start (s clamped to [0, length]).
  Pose point_at(double s) const;
  Pose end() const { return point_at(length()); }
};

//! Minimum-length path among the six families (LSL, RSR, LSR, RSL, RLR, LRL).
//! Coincident poses produce a zero-length path.
DubinsPath shortest_dubins(const Pose& start, const Pose& end, double radius);

//! Points at arclengths {0, ds, 2ds, ..., length}; the final point is always
//! included so consecutive samples are at most ds apart.
std::vector<std::pair<Vec2, double>> sample_path(const DubinsPath& path, double ds);

}  // namespace scout
