#include "scout/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scout {

InputPrior InputPrior::uniform() {
  InputPrior p;
  p.kind = Kind::Uniform;
  return p;
}

InputPrior InputPrior::gaussian(const Vec2& mean, const Eigen::Matrix2d& cov) {
  InputPrior p;
  p.kind = Kind::Gaussian;
  p.mean = mean;
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ContractError("InputPrior: covariance must be symmetric");
  }
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw ContractError("InputPrior: covariance must be positive definite");
  }
  p.cov = cov;
  p.cov_inv_ = cov.inverse();
  p.norm_const_ = 1.0 / (2.0 * kPi * std::sqrt(cov.determinant()));
  return p;
}

double InputPrior::density(const Vec2& z) const {
  if (kind == Kind::Uniform) {
    return (z[0] >= 0.0 && z[0] <= 1.0 && z[1] >= 0.0 && z[1] <= 1.0) ? 1.0 : 0.0;
  }
  const Vec2 d = z - mean;
  return norm_const_ * std::exp(-0.5 * d.dot(cov_inv_ * d));
}

namespace {

double silverman_bandwidth(const Eigen::VectorXd& ys) {
  const int n = static_cast<int>(ys.size());
  const double mean = ys.mean();
  const double sd = std::sqrt((ys.array() - mean).square().sum() / n);
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace

OutputDensity OutputDensity::from_samples(const Eigen::VectorXd& ys, int grid_points) {
  if (ys.size() < 1) throw ContractError("OutputDensity: need at least one sample");
  OutputDensity out;
  const double lo_s = ys.minCoeff(), hi_s = ys.maxCoeff();
  double h = silverman_bandwidth(ys);
  if (!(h > 0.0)) {
    // Degenerate sample set (all values equal): narrow bump at that value.
    h = std::max(1e-6 * std::max(1.0, std::abs(lo_s)), 1e-12);
  }
  out.bandwidth = h;
  const double lo = lo_s - 3.0 * h, hi = hi_s + 3.0 * h;
  out.grid.setLinSpaced(grid_points, lo, hi);
  const double dx = (hi - lo) / (grid_points - 1);

  // Linear binning followed by convolution with the discretized kernel.
  Eigen::VectorXd bins = Eigen::VectorXd::Zero(grid_points);
  for (int i = 0; i < ys.size(); ++i) {
    const double pos = (ys[i] - lo) / dx;
    int i0 = std::min(static_cast<int>(pos), grid_points - 2);
    if (i0 < 0) i0 = 0;
    const double frac = std::min(std::max(pos - i0, 0.0), 1.0);
    bins[i0] += 1.0 - frac;
    bins[i0 + 1] += frac;
  }
  bins /= static_cast<double>(ys.size());

  const int m = static_cast<int>(std::ceil(6.0 * h / dx));
  Eigen::VectorXd kernel(2 * m + 1);
  const double knorm = 1.0 / (h * std::sqrt(2.0 * kPi));
  for (int k = -m; k <= m; ++k) kernel[k + m] = knorm * std::exp(-0.5 * square(k * dx / h));

  out.values = Eigen::VectorXd::Zero(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    if (bins[i] == 0.0) continue;
    const int j0 = std::max(0, i - m), j1 = std::min(grid_points - 1, i + m);
    for (int j = j0; j <= j1; ++j) out.values[j] += bins[i] * kernel[j - i + m];
  }

  // Trapezoid renormalization to unit mass.
  double mass = 0.0;
  for (int i = 0; i + 1 < grid_points; ++i) mass += 0.5 * (out.values[i] + out.values[i + 1]) * dx;
  if (mass > 0.0) out.values /= mass;

  out.peak = out.values.maxCoeff();
  const double fl = out.floor();
  out.values = out.values.cwiseMax(fl);
  return out;
}

double OutputDensity::eval(double y) const {
  const int n = static_cast<int>(grid.size());
  const double lo = grid[0], hi = grid[n - 1];
  if (!(y >= lo) || !(y <= hi)) return floor();
  const double dx = (hi - lo) / (n - 1);
  const double pos = (y - lo) / dx;
  const int i0 = std::min(static_cast<int>(pos), n - 2);
  const double frac = pos - i0;
  return std::max((1.0 - frac) * values[i0] + frac * values[i0 + 1], floor());
}

OutputDensity estimate_output_density(const GpModel& m, int n_samples, double t, Rng& rng) {
  if (n_samples < 100) throw ContractError("estimate_output_density: n_samples must be >= 100");
  Eigen::MatrixXd X(n_samples, m.dim());
  for (int i = 0; i < n_samples; ++i) {
    X(i, 0) = rng.uniform();
    X(i, 1) = rng.uniform();
  }
  if (m.dim() == 3) X.col(2).setConstant(t);
  return OutputDensity::from_samples(m.posterior_mean_many(X));
}

double GmmSurrogate::eval(const Vec2& z) const {
  double out = 0.0;
  for (const auto& c : components) {
    const double q = square(z[0] - c.mean[0]) / c.var[0] + square(z[1] - c.mean[1]) / c.var[1];
    out += c.weight * std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(c.var[0] * c.var[1]));
  }
  return out;
}

double GmmSurrogate::total_mass() const {
  double s = 0.0;
  for (const auto& c : components) s += c.weight;
  return s;
}

void GmmSurrogate::scale_mass(double target) {
  const double cur = total_mass();
  if (cur <= 0.0) return;
  for (auto& c : components) c.weight *= target / cur;
}

namespace {

constexpr double kCovFloor = 1e-6;  // per-axis variance floor

double log_gauss_diag(const Vec2& z, const Vec2& mean, const Vec2& var) {
  const double q = square(z[0] - mean[0]) / var[0] + square(z[1] - mean[1]) / var[1];
  return -0.5 * q - 0.5 * std::log(var[0] * var[1]) - std::log(2.0 * kPi);
}

}  // namespace

GmmSurrogate fit_gmm(const std::vector<WeightedSample>& samples, int n_components, int max_iter,
                     Rng& rng, std::vector<double>* loglik_trace) {
  const int n = static_cast<int>(samples.size());
  if (n_components < 1) throw ContractError("fit_gmm: n_components must be >= 1");
  if (n < 10 * n_components) throw ContractError("fit_gmm: need at least 10 samples per component");
  double wtot = 0.0;
  for (const auto& s : samples) {
    if (s.w < 0.0) throw ContractError("fit_gmm: weights must be nonnegative");
    wtot += s.w;
  }
  if (!(wtot > 0.0)) throw ContractError("fit_gmm: total weight must be positive");

  // Weighted global moments for initialization and covariance resets.
  Vec2 gm(0, 0);
  for (const auto& s : samples) gm += (s.w / wtot) * s.z;
  Vec2 gv(0, 0);
  for (const auto& s : samples) {
    gv[0] += (s.w / wtot) * square(s.z[0] - gm[0]);
    gv[1] += (s.w / wtot) * square(s.z[1] - gm[1]);
  }
  gv = gv.cwiseMax(kCovFloor);

  auto weighted_pick = [&]() {
    double u = rng.uniform() * wtot;
    for (const auto& s : samples) {
      u -= s.w;
      if (u <= 0.0) return s.z;
    }
    return samples.back().z;
  };

  const int k = n_components;
  std::vector<Vec2> mean(k), var(k, gv);
  std::vector<double> mix(k, 1.0 / k);
  for (int j = 0; j < k; ++j) mean[j] = weighted_pick();

  Eigen::MatrixXd resp(n, k);
  std::vector<bool> reinitialized(k, false);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iter; ++it) {
    // E step
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        resp(i, j) = std::log(mix[j]) + log_gauss_diag(samples[i].z, mean[j], var[j]);
        mx = std::max(mx, resp(i, j));
      }
      double sum = 0.0;
      for (int j = 0; j < k; ++j) sum += std::exp(resp(i, j) - mx);
      const double lse = mx + std::log(sum);
      ll += samples[i].w * lse;
      for (int j = 0; j < k; ++j) resp(i, j) = std::exp(resp(i, j) - lse);
    }
    if (loglik_trace) loglik_trace->push_back(ll);
    if (std::isfinite(prev_ll) && ll - prev_ll < 1e-10 * (1.0 + std::abs(ll))) break;
    prev_ll = ll;

    // M step
    bool reset = false;
    for (int j = 0; j < k; ++j) {
      double nk = 0.0;
      Vec2 mu(0, 0);
      for (int i = 0; i < n; ++i) {
        const double g = samples[i].w * resp(i, j);
        nk += g;
        mu += g * samples[i].z;
      }
      if (nk <= 1e-12 * wtot) {
        mean[j] = weighted_pick();
        var[j] = gv;
        mix[j] = 1.0 / k;
        reset = true;
        continue;
      }
      mu /= nk;
      Vec2 v(0, 0);
      for (int i = 0; i < n; ++i) {
        const double g = samples[i].w * resp(i, j);
        v[0] += g * square(samples[i].z[0] - mu[0]);
        v[1] += g * square(samples[i].z[1] - mu[1]);
      }
      v /= nk;
      if ((v[0] < kCovFloor || v[1] < kCovFloor) && !reinitialized[j]) {
        // Collapsed component: one fresh start, then accept with floored covariance.
        reinitialized[j] = true;
        mean[j] = weighted_pick();
        var[j] = gv;
        mix[j] = nk / wtot;
        reset = true;
        continue;
      }
      mean[j] = mu;
      var[j] = v.cwiseMax(kCovFloor);
      mix[j] = nk / wtot;
    }
    if (reset) prev_ll = -std::numeric_limits<double>::infinity();
    // Renormalize mixing proportions (resets can unbalance them).
    double msum = 0.0;
    for (double w : mix) msum += w;
    for (auto& w : mix) w /= msum;
  }

  GmmSurrogate out;
  out.components.resize(k);
  for (int j = 0; j < k; ++j) {
    out.components[j].weight = mix[j] * wtot;
    out.components[j].mean = mean[j];
    out.components[j].var = var[j];
  }
  return out;
}

double LikelihoodWeight::ratio(const GpModel& m, const Eigen::VectorXd& x) const {
  const Vec2 z(x[0], x[1]);
  const double mu = m.posterior_mean(x);
  return prior.density(z) / out_density.eval(mu);
}

double likelihood_ratio(const LikelihoodWeight& lw, const GpModel& m, const Eigen::VectorXd& x) {
  return lw.ratio(m, x);
}

LikelihoodWeight refresh_weight(const GpModel& m, const InputPrior& prior, double t,
                                const WeightConfig& cfg, Rng& rng) {
  LikelihoodWeight lw;
  lw.prior = prior;
  lw.sample_count = cfg.kde_samples;

  // One shared sample set for the KDE and for the weight evaluations.
  const int n = cfg.kde_samples;
  std::vector<Vec2> zs(n);
  Eigen::MatrixXd X(n, m.dim());
  for (int i = 0; i < n; ++i) {
    zs[i] = Vec2(rng.uniform(), rng.uniform());
    X(i, 0) = zs[i][0];
    X(i, 1) = zs[i][1];
  }
  if (m.dim() == 3) X.col(2).setConstant(t);
  const Eigen::VectorXd mu = m.posterior_mean_many(X);
  lw.out_density = OutputDensity::from_samples(mu);

  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = prior.density(zs[i]) / lw.out_density.eval(mu[i]);
  const double wsum = w.sum();
  if (!(wsum > 0.0)) throw OptimizationError("refresh_weight: weight field vanished");

  // Importance resampling proportional to w, then an unweighted EM fit.
  std::vector<WeightedSample> resampled(n);
  Eigen::VectorXd cdf(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[i];
    cdf[i] = acc;
  }
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    const int idx = static_cast<int>(std::lower_bound(cdf.data(), cdf.data() + n, u) - cdf.data());
    resampled[i] = WeightedSample{zs[std::min(idx, n - 1)], 1.0};
  }
  lw.gmm = fit_gmm(resampled, cfg.gmm_components, cfg.gmm_max_iter, rng);

  // Scale the mixture to the trapezoid-estimated mass of w over the unit square.
  const int g = cfg.mass_grid;
  const double step = 1.0 / (g - 1);
  Eigen::MatrixXd Xg(g * g, m.dim());
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      Xg(i * g + j, 0) = i * step;
      Xg(i * g + j, 1) = j * step;
    }
  }
  if (m.dim() == 3) Xg.col(2).setConstant(t);
  const Eigen::VectorXd mu_grid = m.posterior_mean_many(Xg);
  double mass = 0.0;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const Vec2 z(i * step, j * step);
      const double wij = prior.density(z) / lw.out_density.eval(mu_grid[i * g + j]);
      const double cx = (i == 0 || i == g - 1) ? 0.5 : 1.0;
      const double cy = (j == 0 || j == g - 1) ? 0.5 : 1.0;
      mass += cx * cy * wij;
    }
  }
  mass *= step * step;
  lw.gmm.scale_mass(mass);
  return lw;
}

}  // namespace scout
