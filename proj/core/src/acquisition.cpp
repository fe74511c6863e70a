#include "scout/acquisition.hpp"

#include <cmath>
#include <limits>

namespace scout {

AcquisitionKind parse_acquisition(const std::string& name) {
  if (name == "US") return AcquisitionKind::US;
  if (name == "US-IW") return AcquisitionKind::USIW;
  if (name == "US-LW") return AcquisitionKind::USLW;
  if (name == "IVR") return AcquisitionKind::IVR;
  if (name == "IVR-IW") return AcquisitionKind::IVRIW;
  if (name == "IVR-LW") return AcquisitionKind::IVRLW;
  if (name == "UCB") return AcquisitionKind::UCB;
  if (name == "PI") return AcquisitionKind::PI;
  if (name == "EI") return AcquisitionKind::EI;
  throw ConfigError("unknown acquisition: " + name);
}

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::US: return "US";
    case AcquisitionKind::USIW: return "US-IW";
    case AcquisitionKind::USLW: return "US-LW";
    case AcquisitionKind::IVR: return "IVR";
    case AcquisitionKind::IVRIW: return "IVR-IW";
    case AcquisitionKind::IVRLW: return "IVR-LW";
    case AcquisitionKind::UCB: return "UCB";
    case AcquisitionKind::PI: return "PI";
    case AcquisitionKind::EI: return "EI";
  }
  return "?";
}

bool is_input_weighted(AcquisitionKind k) {
  return k == AcquisitionKind::USIW || k == AcquisitionKind::IVRIW;
}
bool is_likelihood_weighted(AcquisitionKind k) {
  return k == AcquisitionKind::USLW || k == AcquisitionKind::IVRLW;
}
bool is_classic(AcquisitionKind k) {
  return k == AcquisitionKind::UCB || k == AcquisitionKind::PI || k == AcquisitionKind::EI;
}

namespace {

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

//! \int_0^1 exp(-(u-a)^2/(2l2)) exp(-(u-b)^2/(2l2)) N(u; w, s2) du
double gauss_pair_box_integral(double a, double b, double w, double s2, double l2) {
  const double v1 = 0.5 * l2;
  const double m = 0.5 * (a + b);
  const double pref = std::exp(-square(a - b) / (4.0 * l2));
  const double v3 = v1 * s2 / (v1 + s2);
  const double c = v3 * (m / v1 + w / s2);
  const double amp = std::exp(-square(m - w) / (2.0 * (v1 + s2)));
  const double denom = std::sqrt(2.0 * v3);
  const double box = 0.5 * (std::erf((1.0 - c) / denom) - std::erf((0.0 - c) / denom));
  return pref * amp * std::sqrt(v3 / s2) * box;
}

// Time-axis kernel factors for the data points at the slice time of x.
Eigen::VectorXd time_factors(const GpModel& m, double t) {
  const int n = m.data().size();
  Eigen::VectorXd tau = Eigen::VectorXd::Ones(n);
  if (m.dim() == 3) {
    const double lt = m.params().lengthscales[2];
    for (int i = 0; i < n; ++i) tau[i] = std::exp(-0.5 * square((m.data().inputs(i, 2) - t) / lt));
  }
  return tau;
}

double slice_time(const Eigen::VectorXd& x) { return x.size() == 3 ? x[2] : 0.0; }

}  // namespace

AcquisitionEvaluator::AcquisitionEvaluator(AcquisitionKind kind, const AcquisitionContext& ctx)
    : kind_(kind), ctx_(ctx) {
  if (ctx_.model == nullptr) throw ContractError("AcquisitionEvaluator: model required");
  if ((is_input_weighted(kind) || is_likelihood_weighted(kind)) && ctx_.prior == nullptr) {
    throw ConfigError("acquisition " + to_string(kind) + " requires an input prior");
  }
  if (is_likelihood_weighted(kind) && ctx_.weight == nullptr) {
    throw ConfigError("acquisition " + to_string(kind) + " requires a likelihood weight");
  }
  if (is_classic(kind) && !std::isfinite(ctx_.y_star)) {
    throw ContractError("acquisition " + to_string(kind) + " requires y_star (>=1 observation)");
  }
  const GpModel& m = *ctx_.model;
  var_floor_ = 1e-12 * m.params().signal_variance;

  if (kind == AcquisitionKind::IVR || kind == AcquisitionKind::IVRIW) {
    const int nq = ctx_.quad.n;
    const int n = m.data().size();
    quad_nodes_.resize(nq * nq, 2);
    quad_weights_.resize(nq * nq);
    const double cell = 1.0 / nq;
    for (int i = 0; i < nq; ++i) {
      for (int j = 0; j < nq; ++j) {
        const int idx = i * nq + j;
        const Vec2 z((i + 0.5) * cell, (j + 0.5) * cell);
        quad_nodes_.row(idx) = z.transpose();
        quad_weights_[idx] =
            cell * cell * (kind == AcquisitionKind::IVRIW ? ctx_.prior->density(z) : 1.0);
      }
    }
    // Spatial kernel block between training inputs and quadrature nodes.
    kq_spatial_.resize(n, nq * nq);
    const auto& p = m.params();
    for (int i = 0; i < n; ++i) {
      for (int q = 0; q < nq * nq; ++q) {
        const double d2 = square((m.data().inputs(i, 0) - quad_nodes_(q, 0)) / p.lengthscales[0]) +
                          square((m.data().inputs(i, 1) - quad_nodes_(q, 1)) / p.lengthscales[1]);
        kq_spatial_(i, q) = p.signal_variance * std::exp(-0.5 * d2);
      }
    }
  }

  if (kind == AcquisitionKind::IVRLW) {
    const int n = m.data().size();
    const auto& p = m.params();
    const auto& comps = ctx_.weight->gmm.components;
    pair_integrals_.resize(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) {
      Eigen::MatrixXd G(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          double g = 1.0;
          for (int d = 0; d < 2; ++d) {
            g *= gauss_pair_box_integral(m.data().inputs(i, d), m.data().inputs(j, d),
                                         comps[c].mean[d], comps[c].var[d],
                                         square(p.lengthscales[d]));
          }
          G(i, j) = g;
          G(j, i) = g;
        }
      }
      pair_integrals_[c] = std::move(G);
    }
  }
}

double AcquisitionEvaluator::value(const Eigen::VectorXd& x) const {
  const GpModel& m = *ctx_.model;
  switch (kind_) {
    case AcquisitionKind::US:
      return m.posterior_var(x);
    case AcquisitionKind::USIW:
      return m.posterior_var(x) * ctx_.prior->density(Vec2(x[0], x[1]));
    case AcquisitionKind::USLW:
      return m.posterior_var(x) * ctx_.weight->ratio(m, x);
    case AcquisitionKind::IVR:
    case AcquisitionKind::IVRIW:
      return ivr_family(x);
    case AcquisitionKind::IVRLW:
      return ivr_lw_analytic(x);
    case AcquisitionKind::UCB:
    case AcquisitionKind::PI:
    case AcquisitionKind::EI:
      return classic(x);
  }
  return 0.0;
}

double AcquisitionEvaluator::ivr_family(const Eigen::VectorXd& x) const {
  const GpModel& m = *ctx_.model;
  const int n = m.data().size();
  const auto& p = m.params();
  const int nq = static_cast<int>(quad_nodes_.rows());

  // Spatial kernel between x and the nodes (x's own time factor is 1).
  Eigen::VectorXd kqx(nq);
  for (int q = 0; q < nq; ++q) {
    const double d2 = square((x[0] - quad_nodes_(q, 0)) / p.lengthscales[0]) +
                      square((x[1] - quad_nodes_(q, 1)) / p.lengthscales[1]);
    kqx[q] = p.signal_variance * std::exp(-0.5 * d2);
  }

  double var;
  Eigen::VectorXd cov;
  if (n == 0) {
    var = p.signal_variance;
    cov = kqx;
  } else {
    const Eigen::VectorXd kx = m.kernel_vector(x);
    const Eigen::VectorXd v = m.solve_lower(kx);
    var = std::max(p.signal_variance - v.squaredNorm(), 0.0);
    Eigen::VectorXd ax = m.chol_lower().transpose().triangularView<Eigen::Upper>().solve(v);
    ax.array() *= time_factors(m, slice_time(x)).array();
    cov = kqx - kq_spatial_.transpose() * ax;
  }
  if (var <= var_floor_) return 0.0;
  return cov.array().square().matrix().dot(quad_weights_) / var;
}

double AcquisitionEvaluator::ivr_lw_analytic(const Eigen::VectorXd& x) const {
  const GpModel& m = *ctx_.model;
  const int n = m.data().size();
  const auto& p = m.params();
  const double sf2 = p.signal_variance;
  const double sf4 = sf2 * sf2;
  const auto& comps = ctx_.weight->gmm.components;

  double var;
  Eigen::VectorXd gamma;  // time-scaled K^{-1} k(X,x)
  if (n == 0) {
    var = sf2;
  } else {
    const Eigen::VectorXd kx = m.kernel_vector(x);
    const Eigen::VectorXd v = m.solve_lower(kx);
    var = std::max(sf2 - v.squaredNorm(), 0.0);
    gamma = m.chol_lower().transpose().triangularView<Eigen::Upper>().solve(v);
    gamma.array() *= time_factors(m, slice_time(x)).array();
  }
  if (var <= var_floor_) return 0.0;

  double total = 0.0;
  for (size_t c = 0; c < comps.size(); ++c) {
    const auto& cm = comps[c];
    double t1 = sf4;
    for (int d = 0; d < 2; ++d) {
      t1 *= gauss_pair_box_integral(x[d], x[d], cm.mean[d], cm.var[d], square(p.lengthscales[d]));
    }
    double t2 = 0.0, t3 = 0.0;
    if (n > 0) {
      for (int i = 0; i < n; ++i) {
        double g = 1.0;
        for (int d = 0; d < 2; ++d) {
          g *= gauss_pair_box_integral(x[d], m.data().inputs(i, d), cm.mean[d], cm.var[d],
                                       square(p.lengthscales[d]));
        }
        t2 += gamma[i] * g;
      }
      t2 *= sf4;
      t3 = sf4 * gamma.dot(pair_integrals_[c] * gamma);
    }
    total += cm.weight * (t1 - 2.0 * t2 + t3);
  }
  return std::max(total, 0.0) / var;
}

double AcquisitionEvaluator::classic(const Eigen::VectorXd& x) const {
  const GpModel& m = *ctx_.model;
  const double mu = m.posterior_mean(x);
  const double var = m.posterior_var(x);
  const double sd = std::sqrt(std::max(var, 0.0));
  const double improve = ctx_.y_star - mu - ctx_.kappa;
  if (kind_ == AcquisitionKind::UCB) return -mu + ctx_.kappa * sd;
  if (sd <= std::sqrt(var_floor_)) {
    // sigma -> 0 limits
    if (kind_ == AcquisitionKind::PI) return improve > 0.0 ? 1.0 : 0.0;
    return std::max(improve, 0.0);  // EI
  }
  const double lambda = improve / sd;
  if (kind_ == AcquisitionKind::PI) return norm_cdf(lambda);
  return sd * (lambda * norm_cdf(lambda) + norm_pdf(lambda));  // EI
}

// ---------------------------------------------------------------------------

double acq_us(const AcquisitionContext& ctx, const Eigen::VectorXd& x) {
  return AcquisitionEvaluator(AcquisitionKind::US, ctx).value(x);
}

double acq_us_weighted(const AcquisitionContext& ctx, const Eigen::VectorXd& x, WeightMode mode) {
  const auto kind = mode == WeightMode::InputPrior ? AcquisitionKind::USIW : AcquisitionKind::USLW;
  return AcquisitionEvaluator(kind, ctx).value(x);
}

double acq_ivr(const AcquisitionContext& ctx, const Eigen::VectorXd& x, const QuadratureSpec& quad) {
  AcquisitionContext c = ctx;
  c.quad = quad;
  return AcquisitionEvaluator(AcquisitionKind::IVR, c).value(x);
}

double acq_ivr_weighted(const AcquisitionContext& ctx, const Eigen::VectorXd& x, WeightMode mode,
                        const QuadratureSpec& quad) {
  AcquisitionContext c = ctx;
  c.quad = quad;
  const auto kind = mode == WeightMode::InputPrior ? AcquisitionKind::IVRIW : AcquisitionKind::IVRLW;
  return AcquisitionEvaluator(kind, c).value(x);
}

double acq_classic(const AcquisitionContext& ctx, const Eigen::VectorXd& x, AcquisitionKind kind) {
  if (!is_classic(kind)) throw ContractError("acq_classic: kind must be UCB/PI/EI");
  return AcquisitionEvaluator(kind, ctx).value(x);
}

double acq_classic_log(const AcquisitionContext& ctx, const Eigen::VectorXd& x, AcquisitionKind kind) {
  if (!is_classic(kind)) throw ContractError("acq_classic_log: kind must be UCB/PI/EI");
  if (kind == AcquisitionKind::UCB) return acq_classic(ctx, x, kind);
  const GpModel& m = *ctx.model;
  const double mu = m.posterior_mean(x);
  const double sd = std::sqrt(std::max(m.posterior_var(x), 0.0));
  const double improve = ctx.y_star - mu - ctx.kappa;
  const double sd_floor = std::sqrt(1e-12 * m.params().signal_variance);
  if (sd <= sd_floor) {
    if (kind == AcquisitionKind::PI) return improve > 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return improve > 0.0 ? std::log(improve) : -std::numeric_limits<double>::infinity();
  }
  const double lambda = improve / sd;
  const double log_phi = -0.5 * lambda * lambda - 0.5 * std::log(2.0 * kPi);
  // erfc stays accurate until about -37 sigma; switch to the tail expansion
  // well before that so the series truncation error is negligible too.
  if (lambda > -26.0) {
    if (kind == AcquisitionKind::PI) return std::log(std::max(norm_cdf(lambda), 1e-300));
    const double ei = sd * (lambda * norm_cdf(lambda) + norm_pdf(lambda));
    return std::log(std::max(ei, 1e-300));
  }
  // Deep-tail asymptotics keep the ordering when the linear forms underflow.
  const double il2 = 1.0 / (lambda * lambda);
  if (kind == AcquisitionKind::PI) {
    return log_phi - std::log(-lambda) + std::log1p(-il2 + 3.0 * il2 * il2);
  }
  return std::log(sd) + log_phi + std::log(il2 * (1.0 - 3.0 * il2 + 15.0 * il2 * il2));
}

double evaluate_acquisition(AcquisitionKind kind, const AcquisitionContext& ctx,
                            const Eigen::VectorXd& x) {
  return AcquisitionEvaluator(kind, ctx).value(x);
}

double ivr_lw_quadrature(const AcquisitionContext& ctx, const Eigen::VectorXd& x,
                         int nodes_per_axis) {
  if (ctx.model == nullptr || ctx.weight == nullptr) {
    throw ContractError("ivr_lw_quadrature: model and weight required");
  }
  const GpModel& m = *ctx.model;
  const double var = m.posterior_var(x);
  const double floor = 1e-12 * m.params().signal_variance;
  if (var <= floor) return 0.0;
  const double t = slice_time(x);
  const int nq = nodes_per_axis;
  const double cell = 1.0 / nq;
  double acc = 0.0;
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < nq; ++j) {
      const Vec2 z((i + 0.5) * cell, (j + 0.5) * cell);
      const Eigen::VectorXd xq = model_input(m.dim(), z, t);
      acc += square(m.posterior_cov(x, xq)) * ctx.weight->gmm.eval(z);
    }
  }
  return acc * cell * cell / var;
}

}  // namespace scout
