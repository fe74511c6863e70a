#include "scout/environment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace scout {

namespace {

double ackley(const Vec2& z) {
  constexpr double a = 20.0, b = 0.2, c = 2.0 * kPi;
  // Grouped so each pair cancels exactly at the origin.
  return a * (1.0 - std::exp(-b * std::sqrt((z[0] * z[0] + z[1] * z[1]) / 2.0))) +
         (std::exp(1.0) - std::exp((std::cos(c * z[0]) + std::cos(c * z[1])) / 2.0));
}

double bird(const Vec2& z) {
  return std::sin(z[0]) * std::exp(square(1.0 - std::cos(z[1]))) +
         std::cos(z[1]) * std::exp(square(1.0 - std::sin(z[0]))) + square(z[0] - z[1]);
}

double bukin06(const Vec2& z) {
  return 100.0 * std::sqrt(std::abs(z[1] - 0.01 * z[0] * z[0])) + 0.01 * std::abs(z[0] + 10.0);
}

double michalewicz(const Vec2& z) {
  constexpr int m = 10;
  return -std::sin(z[0]) * std::pow(std::sin(z[0] * z[0] / kPi), 2 * m) -
         std::sin(z[1]) * std::pow(std::sin(2.0 * z[1] * z[1] / kPi), 2 * m);
}

double mod_rosenbrock(const Vec2& z) {
  return 74.0 + 100.0 * square(z[1] - z[0] * z[0]) + square(1.0 - z[0]) -
         400.0 * std::exp(-10.0 * square(z[0] + 1.0) - 10.0 * square(z[1] + 1.0));
}

}  // namespace

Environment make_benchmark(const std::string& name) {
  EnvDescriptor d;
  d.name = name;
  if (name == "ackley") {
    d.native_lo = Vec2(-5, -5);
    d.native_hi = Vec2(5, 5);
    return Environment(d, ackley);
  }
  if (name == "bird") {
    d.native_lo = Vec2(-2.0 * kPi, -2.0 * kPi);
    d.native_hi = Vec2(2.0 * kPi, 2.0 * kPi);
    return Environment(d, bird);
  }
  if (name == "bukin06") {
    d.native_lo = Vec2(-15, -3);
    d.native_hi = Vec2(-5, 3);
    return Environment(d, bukin06);
  }
  if (name == "michalewicz") {
    d.native_lo = Vec2(0, 0);
    d.native_hi = Vec2(kPi, kPi);
    return Environment(d, michalewicz);
  }
  if (name == "mod_rosenbrock") {
    d.native_lo = Vec2(-2, -2);
    d.native_hi = Vec2(2, 2);
    return Environment(d, mod_rosenbrock);
  }
  throw ConfigError("unknown benchmark environment: " + name);
}

Environment make_dynamic(Environment base) {
  EnvDescriptor d = base.descriptor;
  d.name += "-dynamic";
  d.dynamic = true;
  Environment out(d, [inner = std::move(base)](const Vec2& zn) { return inner.native(zn); });
  out.noise_variance = 0.0;
  return out;
}

double calibrate_noise(const Environment& env, double base_variance, int n, Rng& rng, double t_max) {
  if (n < 1000) throw ContractError("calibrate_noise: n must be >= 1e3");
  if (env.descriptor.from_grid) return 0.0;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    const double t = env.descriptor.dynamic ? rng.uniform(0.0, t_max) : 0.0;
    const double f = env(z, t);
    sum += f;
    sumsq += f * f;
  }
  const double mean = sum / n;
  const double var = std::max(sumsq / n - mean * mean, 0.0);
  return base_variance * var;
}

// ---------------------------------------------------------------------------
// Bicubic lattice interpolation.
// ---------------------------------------------------------------------------

namespace {

// First derivatives of the C2 cubic spline through uniformly spaced samples,
// not-a-knot end conditions (reproduces global cubics exactly).
Eigen::VectorXd spline_derivatives(const Eigen::VectorXd& y, double h) {
  const int n = static_cast<int>(y.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  // Second-derivative unknowns M_i.
  for (int i = 1; i + 1 < n; ++i) {
    A(i, i - 1) = 1.0;
    A(i, i) = 4.0;
    A(i, i + 1) = 1.0;
    rhs[i] = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
  }
  A(0, 0) = 1.0;
  A(0, 1) = -2.0;
  A(0, 2) = 1.0;
  A(n - 1, n - 3) = 1.0;
  A(n - 1, n - 2) = -2.0;
  A(n - 1, n - 1) = 1.0;
  const Eigen::VectorXd M = A.partialPivLu().solve(rhs);

  Eigen::VectorXd d(n);
  for (int i = 0; i + 1 < n; ++i) {
    d[i] = (y[i + 1] - y[i]) / h - h * (2.0 * M[i] + M[i + 1]) / 6.0;
  }
  d[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (M[n - 2] + 2.0 * M[n - 1]) / 6.0;
  return d;
}

inline void hermite_basis(double t, double& a0, double& b0, double& a1, double& b1) {
  const double t2 = t * t, t3 = t2 * t;
  a0 = 2.0 * t3 - 3.0 * t2 + 1.0;
  b0 = t3 - 2.0 * t2 + t;
  a1 = -2.0 * t3 + 3.0 * t2;
  b1 = t3 - t2;
}

}  // namespace

GridField::GridField(Eigen::MatrixXd values, double x0, double y0, double dx, double dy)
    : v_(std::move(values)), x0_(x0), y0_(y0), dx_(dx), dy_(dy) {
  ny_ = static_cast<int>(v_.rows());
  nx_ = static_cast<int>(v_.cols());
  if (nx_ < 4 || ny_ < 4) throw ContractError("GridField: lattice must be at least 4x4");
  if (!(dx_ > 0.0 && dy_ > 0.0)) throw ContractError("GridField: spacing must be positive");

  fx_.resize(ny_, nx_);
  fy_.resize(ny_, nx_);
  fxy_.resize(ny_, nx_);
  for (int iy = 0; iy < ny_; ++iy) fx_.row(iy) = spline_derivatives(v_.row(iy), dx_).transpose();
  for (int ix = 0; ix < nx_; ++ix) fy_.col(ix) = spline_derivatives(v_.col(ix), dy_);
  for (int ix = 0; ix < nx_; ++ix) fxy_.col(ix) = spline_derivatives(fx_.col(ix), dy_);
}

double GridField::eval(double x, double y) const {
  x = std::min(std::max(x, x_min()), x_max());
  y = std::min(std::max(y, y_min()), y_max());
  int ix = std::min(static_cast<int>((x - x0_) / dx_), nx_ - 2);
  int iy = std::min(static_cast<int>((y - y0_) / dy_), ny_ - 2);
  const double u = (x - (x0_ + ix * dx_)) / dx_;
  const double w = (y - (y0_ + iy * dy_)) / dy_;

  double au0, bu0, au1, bu1, aw0, bw0, aw1, bw1;
  hermite_basis(u, au0, bu0, au1, bu1);
  hermite_basis(w, aw0, bw0, aw1, bw1);
  const double ax[2] = {au0, au1}, bx[2] = {bu0, bu1};
  const double ay[2] = {aw0, aw1}, by[2] = {bw0, bw1};

  double out = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int jx = ix + a, jy = iy + b;
      out += v_(jy, jx) * ax[a] * ay[b];
      out += fx_(jy, jx) * dx_ * bx[a] * ay[b];
      out += fy_(jy, jx) * dy_ * ax[a] * by[b];
      out += fxy_(jy, jx) * dx_ * dy_ * bx[a] * by[b];
    }
  }
  return out;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Environment make_grid_env(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("grid file not found: " + path);

  int ncols = -1, nrows = -1;
  double x0 = 0.0, y0 = 0.0, cell = -1.0;
  bool have_nodata = false;
  double nodata = 0.0;

  // Header: key/value lines until the first purely numeric line.
  std::string line;
  std::streampos data_start = in.tellg();
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) {
      data_start = in.tellg();
      continue;  // blank line
    }
    const std::string k = lower(key);
    double val;
    if ((k == "ncols" || k == "nrows" || k == "xllcorner" || k == "yllcorner" ||
         k == "cellsize" || k == "nodata_value") &&
        (ls >> val)) {
      if (k == "ncols") ncols = static_cast<int>(val);
      else if (k == "nrows") nrows = static_cast<int>(val);
      else if (k == "xllcorner") x0 = val;
      else if (k == "yllcorner") y0 = val;
      else if (k == "cellsize") cell = val;
      else {
        have_nodata = true;
        nodata = val;
      }
      data_start = in.tellg();
    } else {
      break;  // first data line
    }
  }
  if (ncols < 4 || nrows < 4) {
    throw ParseError(path + ": header must declare ncols/nrows >= 4");
  }
  if (cell <= 0.0) throw ParseError(path + ": header must declare a positive cellsize");

  in.clear();
  in.seekg(data_start);
  Eigen::MatrixXd v(nrows, ncols);
  // ESRI convention: first data row is the northernmost (largest y).
  for (long idx = 0; idx < static_cast<long>(nrows) * ncols; ++idx) {
    double val;
    if (!(in >> val)) {
      const long r = idx / ncols, c = idx % ncols;
      throw ParseError(path + ": malformed value at data row " + std::to_string(r + 1) +
                       ", column " + std::to_string(c + 1));
    }
    if (have_nodata && val == nodata) {
      const long r = idx / ncols, c = idx % ncols;
      throw ParseError(path + ": NODATA cell at data row " + std::to_string(r + 1) + ", column " +
                       std::to_string(c + 1) + " (gaps are not supported)");
    }
    const long file_row = idx / ncols, c = idx % ncols;
    v(nrows - 1 - file_row, c) = val;  // store bottom-up
  }
  double extra;
  if (in >> extra) throw ParseError(path + ": trailing values after the declared lattice");

  auto field = std::make_shared<GridField>(std::move(v), x0, y0, cell, cell);
  EnvDescriptor d;
  d.name = "grid:" + path;
  d.native_lo = Vec2(field->x_min(), field->y_min());
  d.native_hi = Vec2(field->x_max(), field->y_max());
  d.from_grid = true;
  Environment env(d, [field](const Vec2& zn) { return field->eval(zn[0], zn[1]); });
  env.noise_variance = 0.0;
  return env;
}

}  // namespace scout
