#pragma once

#include <functional>
#include <string>

#include "scout/common.hpp"

namespace scout {

struct EnvDescriptor {
  std::string name;
  Vec2 native_lo{0.0, 0.0};
  Vec2 native_hi{1.0, 1.0};
  bool dynamic = false;
  bool from_grid = false;
};

inline Vec2 to_native(const EnvDescriptor& d, const Vec2& unit) {
  return d.native_lo + (d.native_hi - d.native_lo).cwiseProduct(unit);
}
inline Vec2 to_unit(const EnvDescriptor& d, const Vec2& native) {
  return (native - d.native_lo).cwiseQuotient(d.native_hi - d.native_lo);
}

//! Ground-truth map on the unit square.  Deterministic and immutable.
class Environment {
 public:
  Environment() = default;
  Environment(EnvDescriptor desc, std::function<double(const Vec2&)> native_fn)
      : descriptor(std::move(desc)), native_fn_(std::move(native_fn)) {}

  //! Evaluate at unit-square coordinates and time t >= 0.
  double operator()(const Vec2& z, double t) const {
    if (!descriptor.dynamic) return native_fn_(to_native(descriptor, z));
    return native_fn_(to_native(descriptor, wrap_unit(z + dynamic_shift(t))));
  }

  //! Evaluate the raw analytic expression at native coordinates (static part).
  double native(const Vec2& zn) const { return native_fn_(zn); }

  //! Shift applied to unit coordinates at time t (dynamic environments).
  static Vec2 dynamic_shift(double t) {
    const double tau = std::fmod(t, 15.0);
    return Vec2(0.1 * std::sin(2.0 * kPi * tau / 15.0), 0.4 * t / 15.0);
  }

  static Vec2 wrap_unit(Vec2 z) {
    z[0] -= std::floor(z[0]);
    z[1] -= std::floor(z[1]);
    return z;
  }

  EnvDescriptor descriptor;
  double noise_variance = 0.0;

 private:
  std::function<double(const Vec2&)> native_fn_;
};

//! One of the five analytic benchmarks: ackley, bird, bukin06, michalewicz,
//! mod_rosenbrock.  Unknown names raise ConfigError.
Environment make_benchmark(const std::string& name);

//! Periodic drifting transformation of a unit-square environment.
Environment make_dynamic(Environment base);

//! Bicubic-spline interpolant over a gridded lattice file.
Environment make_grid_env(const std::string& path);

//! base_variance scaled by the sample variance of f over n uniform (z, t)
//! draws; 0 for grid environments (real data is left uncorrupted).
double calibrate_noise(const Environment& env, double base_variance, int n, Rng& rng,
                       double t_max = 15.0);

//! C1 bicubic interpolant over a uniform rectangular lattice.
class GridField {
 public:
  //! `values(iy, ix)` is the sample at (x0 + ix*dx, y0 + iy*dy).
  GridField(Eigen::MatrixXd values, double x0, double y0, double dx, double dy);

  double eval(double x, double y) const;
  double x_min() const { return x0_; }
  double y_min() const { return y0_; }
  double x_max() const { return x0_ + dx_ * (nx_ - 1); }
  double y_max() const { return y0_ + dy_ * (ny_ - 1); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Eigen::MatrixXd& lattice() const { return v_; }

 private:
  Eigen::MatrixXd v_, fx_, fy_, fxy_;
  double x0_, y0_, dx_, dy_;
  int nx_, ny_;
};

}  // namespace scout
