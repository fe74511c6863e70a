#include "scout/dubins.hpp"

#include <cmath>
#include <limits>

namespace scout {

namespace {

double mod2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

struct Word {
  Turn t0, t1, t2;
};
constexpr Word kWords[6] = {
    {Turn::Left, Turn::Straight, Turn::Left},   {Turn::Right, Turn::Straight, Turn::Right},
    {Turn::Left, Turn::Straight, Turn::Right},  {Turn::Right, Turn::Straight, Turn::Left},
    {Turn::Right, Turn::Left, Turn::Right},     {Turn::Left, Turn::Right, Turn::Left},
};

// Normalized segment lengths (radius 1, start at origin heading alpha, goal at
// distance d on the x-axis heading beta).  Returns false when infeasible.
bool solve_word(int word, double alpha, double beta, double d, double out[3]) {
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  const double sb = std::sin(beta), cb = std::cos(beta);
  const double cab = std::cos(alpha - beta);
  switch (word) {
    case 0: {  // LSL
      const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
      if (p2 < 0.0) return false;
      const double tmp = std::atan2(cb - ca, d + sa - sb);
      out[0] = mod2pi(tmp - alpha);
      out[1] = std::sqrt(p2);
      out[2] = mod2pi(beta - tmp);
      return true;
    }
    case 1: {  // RSR
      const double p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
      if (p2 < 0.0) return false;
      const double tmp = std::atan2(ca - cb, d - sa + sb);
      out[0] = mod2pi(alpha - tmp);
      out[1] = std::sqrt(p2);
      out[2] = mod2pi(tmp - beta);
      return true;
    }
    case 2: {  // LSR
      const double p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
      if (p2 < 0.0) return false;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      out[0] = mod2pi(tmp - alpha);
      out[1] = p;
      out[2] = mod2pi(tmp - mod2pi(beta));
      return true;
    }
    case 3: {  // RSL
      const double p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
      if (p2 < 0.0) return false;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      out[0] = mod2pi(alpha - tmp);
      out[1] = p;
      out[2] = mod2pi(beta - tmp);
      return true;
    }
    case 4: {  // RLR
      const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
      if (std::abs(tmp) > 1.0) return false;
      const double p = mod2pi(2.0 * kPi - std::acos(tmp));
      out[0] = mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + mod2pi(p / 2.0));
      out[1] = p;
      out[2] = mod2pi(alpha - beta - out[0] + mod2pi(p));
      return true;
    }
    case 5: {  // LRL
      const double tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
      if (std::abs(tmp) > 1.0) return false;
      const double p = mod2pi(2.0 * kPi - std::acos(tmp));
      out[0] = mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + p / 2.0);
      out[1] = p;
      out[2] = mod2pi(mod2pi(beta) - alpha - out[0] + mod2pi(p));
      return true;
    }
  }
  return false;
}

}  // namespace

DubinsPath shortest_dubins(const Pose& start, const Pose& end, double radius) {
  if (!(radius > 0.0)) throw ContractError("shortest_dubins: radius must be positive");
  DubinsPath path;
  path.start = start;
  path.turning_radius = radius;

  const Vec2 dz = end.z - start.z;
  const double dist = dz.norm();
  const double dtheta = std::abs(wrap_angle(end.theta - start.theta));
  if (dist < 1e-14 && dtheta < 1e-14) {
    path.segments = {DubinsSegment{Turn::Straight, 0.0}, DubinsSegment{Turn::Straight, 0.0},
                     DubinsSegment{Turn::Straight, 0.0}};
    return path;
  }

  const double line = std::atan2(dz[1], dz[0]);
  const double alpha = mod2pi(start.theta - line);
  const double beta = mod2pi(end.theta - line);
  const double d = dist / radius;

  double best = std::numeric_limits<double>::infinity();
  int best_word = -1;
  double best_seg[3] = {0, 0, 0};
  for (int w = 0; w < 6; ++w) {
    double seg[3];
    if (!solve_word(w, alpha, beta, d, seg)) continue;
    const double total = seg[0] + seg[1] + seg[2];
    if (total < best) {
      best = total;
      best_word = w;
      best_seg[0] = seg[0];
      best_seg[1] = seg[1];
      best_seg[2] = seg[2];
    }
  }
  if (best_word < 0) {
    // With d >= 0 at least LSL is always solvable; guard anyway.
    throw ContractError("shortest_dubins: no feasible family");
  }
  const Word w = kWords[best_word];
  path.segments[0] = DubinsSegment{w.t0, best_seg[0] * radius};
  path.segments[1] = DubinsSegment{w.t1, best_seg[1] * radius};
  path.segments[2] = DubinsSegment{w.t2, best_seg[2] * radius};
  return path;
}

Pose DubinsPath::point_at(double s) const {
  s = std::min(std::max(s, 0.0), length());
  Vec2 z = start.z;
  double th = start.theta;
  for (const auto& seg : segments) {
    const double take = std::min(s, seg.length);
    if (take > 0.0) {
      if (seg.kind == Turn::Straight) {
        z += take * Vec2(std::cos(th), std::sin(th));
      } else {
        const double sgn = (seg.kind == Turn::Left) ? 1.0 : -1.0;
        const double dphi = sgn * take / turning_radius;
        // turn center sits a radius to the side of the heading
        const Vec2 c = z + turning_radius * Vec2(-sgn * std::sin(th), sgn * std::cos(th));
        const Vec2 rel = z - c;
        const double cph = std::cos(dphi), sph = std::sin(dphi);
        z = c + Vec2(cph * rel[0] - sph * rel[1], sph * rel[0] + cph * rel[1]);
        th += dphi;
      }
    }
    s -= take;
    if (s <= 0.0) break;
  }
  return Pose(z, th);
}

std::vector<std::pair<Vec2, double>> sample_path(const DubinsPath& path, double ds) {
  if (!(ds > 0.0)) throw ContractError("sample_path: ds must be positive");
  const double total = path.length();
  std::vector<std::pair<Vec2, double>> out;
  for (double s = 0.0; s < total; s += ds) {
    out.emplace_back(path.point_at(s).z, s);
  }
  out.emplace_back(path.point_at(total).z, total);
  return out;
}

}  // namespace scout
