#include "scout/gp.hpp"

#include <cmath>
#include <limits>

namespace scout {

void KernelParams::validate() const {
  if (!(signal_variance > 0.0)) throw ContractError("signal_variance must be positive");
  if (lengthscales.size() == 0) throw ContractError("lengthscales must be non-empty");
  for (int d = 0; d < lengthscales.size(); ++d) {
    if (!(lengthscales[d] > 0.0)) throw ContractError("lengthscales must be positive");
  }
  if (!(noise_variance >= 0.0)) throw ContractError("noise_variance must be nonnegative");
}

double kernel_eval(const KernelParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != p.lengthscales.size() || y.size() != p.lengthscales.size()) {
    throw ContractError("kernel_eval: input dimension does not match lengthscales");
  }
  double q = 0.0;
  for (int d = 0; d < x.size(); ++d) {
    q += square((x[d] - y[d]) / p.lengthscales[d]);
  }
  return p.signal_variance * std::exp(-0.5 * q);
}

void Dataset::append(const Eigen::VectorXd& x, double y) {
  if (inputs.cols() != x.size()) throw ContractError("Dataset::append: dimension mismatch");
  const int n = size();
  inputs.conservativeResize(n + 1, Eigen::NoChange);
  inputs.row(n) = x.transpose();
  outputs.conservativeResize(n + 1);
  outputs[n] = y;
}

Dataset Dataset::empty(int dim) {
  Dataset d;
  d.inputs.resize(0, dim);
  d.outputs.resize(0);
  return d;
}

namespace {

// K = k(X,X) + sn^2 I, without jitter.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& p) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd scaled = X.array().rowwise() / p.lengthscales.transpose().array();
  Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) - 2.0 * scaled * scaled.transpose();
  Eigen::MatrixXd K = (p.signal_variance * (-0.5 * d2.array().max(0.0)).exp()).matrix();
  K.diagonal().array() += p.noise_variance;
  return K;
}

// Cholesky with jitter escalation.  Returns the jitter used.
double factorize(const Eigen::MatrixXd& K, double sf2, Eigen::MatrixXd& L) {
  const int n = static_cast<int>(K.rows());
  double jitter = 1e-10 * sf2;
  for (;;) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      L = llt.matrixL();
      return jitter;
    }
    jitter *= 10.0;
    if (jitter > 1e-4 * sf2) {
      throw NonPsdError("kernel matrix not positive definite after jitter escalation (n=" +
                        std::to_string(n) + ")");
    }
  }
}

}  // namespace

GpModel::GpModel(KernelParams params, Dataset data, double mean_offset)
    : params_(std::move(params)), data_(std::move(data)), offset_(mean_offset) {
  params_.validate();
  if (data_.inputs.cols() != params_.dim()) {
    throw ContractError("GpModel: data dimension does not match kernel");
  }
  const int n = data_.size();
  if (n == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    lml_ = 0.0;
    return;
  }
  Eigen::MatrixXd K = kernel_matrix(data_.inputs, params_);
  jitter_ = factorize(K, params_.signal_variance, chol_);
  Eigen::VectorXd y = data_.outputs.array() - offset_;
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(y);
  const double quad = alpha_.squaredNorm();
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
  const double logdet = 2.0 * chol_.diagonal().array().log().sum();
  lml_ = -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * kPi);
}

void GpModel::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != params_.dim()) throw ContractError("GpModel: query dimension mismatch");
}

Eigen::VectorXd GpModel::kernel_vector(const Eigen::VectorXd& x) const {
  const int n = data_.size();
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    double q = 0.0;
    for (int d = 0; d < x.size(); ++d) {
      q += square((data_.inputs(i, d) - x[d]) / params_.lengthscales[d]);
    }
    k[i] = params_.signal_variance * std::exp(-0.5 * q);
  }
  return k;
}

Eigen::VectorXd GpModel::solve_lower(const Eigen::VectorXd& v) const {
  return chol_.triangularView<Eigen::Lower>().solve(v);
}

Eigen::VectorXd GpModel::solve_full(const Eigen::VectorXd& v) const {
  Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(v);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(w);
}

double GpModel::posterior_mean(const Eigen::VectorXd& x) const {
  check_dim(x);
  if (data_.size() == 0) return offset_;
  return offset_ + kernel_vector(x).dot(alpha_);
}

Eigen::VectorXd GpModel::posterior_mean_many(const Eigen::MatrixXd& X) const {
  if (X.cols() != params_.dim()) throw ContractError("GpModel: query dimension mismatch");
  const int m = static_cast<int>(X.rows());
  const int n = data_.size();
  if (n == 0) return Eigen::VectorXd::Constant(m, offset_);

  const Eigen::MatrixXd data_scaled =
      data_.inputs.array().rowwise() / params_.lengthscales.transpose().array();
  const Eigen::VectorXd data_sq = data_scaled.rowwise().squaredNorm();
  Eigen::VectorXd out(m);
  constexpr int kChunk = 4096;
  Eigen::MatrixXd d2;
  for (int start = 0; start < m; start += kChunk) {
    const int len = std::min(kChunk, m - start);
    const Eigen::MatrixXd q_scaled =
        X.middleRows(start, len).array().rowwise() / params_.lengthscales.transpose().array();
    const Eigen::VectorXd q_sq = q_scaled.rowwise().squaredNorm();
    d2.noalias() = -2.0 * q_scaled * data_scaled.transpose();
    d2.colwise() += q_sq;
    d2.rowwise() += data_sq.transpose();
    d2 = (params_.signal_variance * (-0.5 * d2.array().max(0.0)).exp()).matrix();
    out.segment(start, len).noalias() = d2 * alpha_;
  }
  out.array() += offset_;
  return out;
}

double GpModel::posterior_var(const Eigen::VectorXd& x) const {
  check_dim(x);
  const double kxx = params_.signal_variance;
  if (data_.size() == 0) return kxx;
  const Eigen::VectorXd v = solve_lower(kernel_vector(x));
  double var = kxx - v.squaredNorm();
  if (var < 0.0) var = 0.0;
  if (var > kxx) var = kxx;
  return var;
}

double GpModel::posterior_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  check_dim(x);
  check_dim(y);
  const double kxy = kernel_eval(params_, x, y);
  if (data_.size() == 0) return kxy;
  const Eigen::VectorXd vx = solve_lower(kernel_vector(x));
  const Eigen::VectorXd vy = solve_lower(kernel_vector(y));
  return kxy - vx.dot(vy);
}

double GpModel::conditional_var(const Eigen::VectorXd& x, const Eigen::VectorXd& ghost) const {
  const double vx = posterior_var(x);
  const double vg = posterior_var(ghost);
  const double floor = 1e-12 * params_.signal_variance;
  if (vg <= floor) return vx;
  const double c = posterior_cov(ghost, x);
  double out = vx - c * c / vg;
  if (out < 0.0) out = 0.0;
  return out;
}

double log_marginal_likelihood(const Dataset& data, const KernelParams& p) {
  const int n = data.size();
  Eigen::MatrixXd K = kernel_matrix(data.inputs, p);
  Eigen::MatrixXd L;
  factorize(K, p.signal_variance, L);
  Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(data.outputs);
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * logdet - 0.5 * n * std::log(2.0 * kPi);
}

namespace {

// One factorization for both the value and the gradient.
double lml_value_and_gradient(const Dataset& data, const KernelParams& p, Eigen::VectorXd& grad) {
  const int n = data.size();
  const int d = p.dim();
  Eigen::MatrixXd K = kernel_matrix(data.inputs, p);
  Eigen::MatrixXd L;
  factorize(K, p.signal_variance, L);
  Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(data.outputs);
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  const double value = -0.5 * w.squaredNorm() - 0.5 * logdet - 0.5 * n * std::log(2.0 * kPi);

  Eigen::VectorXd alpha = L.transpose().triangularView<Eigen::Upper>().solve(w);
  Eigen::MatrixXd Kinv = Eigen::MatrixXd::Identity(n, n);
  L.triangularView<Eigen::Lower>().solveInPlace(Kinv);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(Kinv);
  // A = alpha alpha' - Kinv; dL/dtheta = 1/2 tr(A dK/dtheta)
  Eigen::MatrixXd A = alpha * alpha.transpose() - Kinv;

  Eigen::MatrixXd Knoiseless = K;
  Knoiseless.diagonal().array() -= p.noise_variance;

  grad.resize(d + 2);
  // d/d log sf2: dK = Knoiseless
  grad[0] = 0.5 * (A.array() * Knoiseless.array()).sum();
  // d/d log l_k: dK_ij = K_ij * (x_ik - x_jk)^2 / l_k^2
  for (int k = 0; k < d; ++k) {
    const Eigen::VectorXd col = data.inputs.col(k);
    Eigen::MatrixXd D2 = (col.replicate(1, n) - col.transpose().replicate(n, 1)).array().square();
    grad[1 + k] = 0.5 * (A.array() * Knoiseless.array() * D2.array()).sum() / square(p.lengthscales[k]);
  }
  // d/d log sn2: dK = sn2 I
  grad[d + 1] = 0.5 * p.noise_variance * A.trace();
  return value;
}

}  // namespace

Eigen::VectorXd lml_gradient(const Dataset& data, const KernelParams& p) {
  Eigen::VectorXd grad;
  lml_value_and_gradient(data, p, grad);
  return grad;
}

namespace {

struct LogBounds {
  Eigen::VectorXd lo, hi;
};

// theta = (log sf2, log l_1..l_d, log sn2)
Eigen::VectorXd pack(const KernelParams& p) {
  Eigen::VectorXd th(p.dim() + 2);
  th[0] = std::log(p.signal_variance);
  for (int k = 0; k < p.dim(); ++k) th[1 + k] = std::log(p.lengthscales[k]);
  th[p.dim() + 1] = std::log(std::max(p.noise_variance, 1e-300));
  return th;
}

KernelParams unpack(const Eigen::VectorXd& th) {
  KernelParams p;
  const int d = static_cast<int>(th.size()) - 2;
  p.signal_variance = std::exp(th[0]);
  p.lengthscales.resize(d);
  for (int k = 0; k < d; ++k) p.lengthscales[k] = std::exp(th[1 + k]);
  p.noise_variance = std::exp(th[d + 1]);
  return p;
}

LogBounds make_bounds(int d, double yvar) {
  const double scale = yvar > 0.0 ? yvar : 1.0;
  LogBounds b;
  b.lo.resize(d + 2);
  b.hi.resize(d + 2);
  b.lo[0] = std::log(1e-6 * scale);
  b.hi[0] = std::log(1e3 * scale);
  for (int k = 0; k < d; ++k) {
    b.lo[1 + k] = std::log(1e-3);
    b.hi[1 + k] = std::log(1e3);
  }
  b.lo[d + 1] = std::log(1e-8 * scale);
  b.hi[d + 1] = std::log(1.0 * scale);
  return b;
}

Eigen::VectorXd clamp_box(Eigen::VectorXd x, const LogBounds& b) {
  for (int i = 0; i < x.size(); ++i) x[i] = std::min(std::max(x[i], b.lo[i]), b.hi[i]);
  return x;
}

struct AscentResult {
  Eigen::VectorXd theta;
  double value = -std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Projected BFGS ascent of f over a box.  `frozen[i]` pins coordinate i.
// `fg` returns value and gradient together; `fval` is the cheap value-only
// path used inside the line search.
template <typename FG, typename F>
AscentResult maximize_bounded(const FG& fg, const F& fval, Eigen::VectorXd th0, const LogBounds& b,
                              const std::vector<bool>& frozen, int max_iters) {
  const int m = static_cast<int>(th0.size());
  AscentResult res;
  th0 = clamp_box(std::move(th0), b);

  Eigen::VectorXd g(m);
  double f0 = fg(th0, g);
  if (!std::isfinite(f0)) return res;
  for (int i = 0; i < m; ++i) {
    if (frozen[i]) g[i] = 0.0;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);  // inverse-Hessian approx
  bool h_scaled = false;
  const double gtol = 1e-5;

  for (int it = 0; it < max_iters; ++it) {
    // Projected gradient: ignore components pushing outside an active bound.
    Eigen::VectorXd pg = g;
    for (int i = 0; i < m; ++i) {
      if (frozen[i]) pg[i] = 0.0;
      if (th0[i] >= b.hi[i] - 1e-12 && pg[i] > 0.0) pg[i] = 0.0;
      if (th0[i] <= b.lo[i] + 1e-12 && pg[i] < 0.0) pg[i] = 0.0;
    }
    if (pg.norm() < gtol * std::max(1.0, std::abs(f0))) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd dir = H * pg;
    if (dir.dot(pg) <= 0.0) {
      H.setIdentity();
      h_scaled = false;
      dir = pg;
    }
    for (int i = 0; i < m; ++i) {
      if (frozen[i]) dir[i] = 0.0;
    }
    // Keep a single move bounded in log space; H adapts the scale afterwards.
    const double cap = h_scaled ? 10.0 : 1.0;
    if (dir.norm() > cap) dir *= cap / dir.norm();

    // Backtracking line search (Armijo) on projected points, value-only.
    double step = 1.0;
    double f1 = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd th1;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      th1 = clamp_box(th0 + step * dir, b);
      const double slope = pg.dot(th1 - th0);
      f1 = fval(th1);
      if (std::isfinite(f1) && f1 >= f0 + 1e-4 * slope - 1e-14 * std::abs(f0)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || (th1 - th0).norm() < 1e-13) break;

    Eigen::VectorXd g1(m);
    f1 = fg(th1, g1);
    for (int i = 0; i < m; ++i) {
      if (frozen[i]) g1[i] = 0.0;
    }
    // BFGS update on (s, y) with ascent sign convention.
    const Eigen::VectorXd s = th1 - th0;
    const Eigen::VectorXd yv = g - g1;  // curvature s'yv > 0 while f is locally concave
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!h_scaled) {
        H *= sy / yv.squaredNorm();
        h_scaled = true;
      }
      const Eigen::VectorXd Hy = H * yv;
      const double yHy = yv.dot(Hy);
      H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
           (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
    th0 = th1;
    f0 = f1;
    g = g1;
  }
  res.theta = th0;
  res.value = f0;
  return res;
}

}  // namespace

GpModel fit(const Dataset& data, const KernelParams& init, int restarts) {
  FitOptions opts;
  opts.restarts = restarts;
  return fit(data, init, opts);
}

GpModel fit(const Dataset& data, const KernelParams& init, const FitOptions& opts) {
  if (data.size() == 0) throw ContractError("fit: dataset must be nonempty");
  if (opts.restarts < 1) throw ContractError("fit: restarts must be >= 1");
  init.validate();
  if (init.dim() != data.dim()) throw ContractError("fit: init dimension mismatch");

  const int d = data.dim();
  const double ymean = data.outputs.mean();
  Dataset centered = data;
  centered.outputs.array() -= ymean;
  const double yvar =
      data.size() > 1 ? centered.outputs.squaredNorm() / static_cast<double>(data.size()) : 0.0;

  const LogBounds bounds = make_bounds(d, yvar);
  std::vector<bool> frozen(d + 2, false);
  LogBounds eff = bounds;
  for (int k : opts.fixed_lengthscales) {
    if (k < 0 || k >= d) throw ContractError("fit: fixed lengthscale index out of range");
    frozen[1 + k] = true;
    // Keep the frozen value inside the box so clamping cannot move it.
    const double v = std::log(init.lengthscales[k]);
    eff.lo[1 + k] = std::min(eff.lo[1 + k], v);
    eff.hi[1 + k] = std::max(eff.hi[1 + k], v);
  }

  auto objective = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) -> double {
    try {
      return lml_value_and_gradient(centered, unpack(th), grad);
    } catch (const NonPsdError&) {
      grad = Eigen::VectorXd::Zero(th.size());
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto objective_value = [&](const Eigen::VectorXd& th) -> double {
    try {
      return log_marginal_likelihood(centered, unpack(th));
    } catch (const NonPsdError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(opts.seed);
  const double scale = yvar > 0.0 ? yvar : 1.0;
  AscentResult best;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd th0;
    if (r == 0) {
      th0 = pack(init);
      if (init.noise_variance <= 0.0) th0[d + 1] = std::log(1e-3 * scale);
    } else if (r <= 3) {
      // Deterministic coarse seeds spanning the unit-cube lengthscale range.
      const double ells[3] = {0.07, 0.2, 0.6};
      th0.resize(d + 2);
      th0[0] = std::log(scale);
      for (int k = 0; k < d; ++k) {
        th0[1 + k] = frozen[1 + k] ? std::log(init.lengthscales[k]) : std::log(ells[r - 1]);
      }
      th0[d + 1] = std::log(1e-3 * scale);
    } else {
      th0.resize(d + 2);
      th0[0] = std::log(scale * std::exp(rng.uniform(std::log(0.1), std::log(10.0))));
      for (int k = 0; k < d; ++k) {
        th0[1 + k] = frozen[1 + k] ? std::log(init.lengthscales[k])
                                   : rng.uniform(std::log(0.03), std::log(2.0));
      }
      th0[d + 1] = std::log(scale * std::exp(rng.uniform(std::log(1e-6), std::log(0.1))));
    }
    AscentResult res = maximize_bounded(objective, objective_value, th0, eff, frozen, opts.max_iters);
    if (res.value > best.value) best = res;
  }
  if (!std::isfinite(best.value)) {
    throw OptimizationError("fit: all restarts diverged");
  }
  return GpModel(unpack(best.theta), data, ymean);
}

Eigen::VectorXd model_input(int model_dim, const Vec2& z, double t) {
  if (model_dim == 2) return z;
  if (model_dim == 3) {
    Eigen::VectorXd x(3);
    x << z[0], z[1], t;
    return x;
  }
  throw ContractError("model_input: unsupported dimension");
}

}  // namespace scout
