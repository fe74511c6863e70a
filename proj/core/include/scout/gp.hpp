#pragma once

#include <optional>
#include <vector>

#include "scout/common.hpp"

namespace scout {

//! Anisotropic RBF kernel hyperparameters.  `lengthscales[d]` is in input
//! units, so the kernel is
//!   k(x, x') = signal_variance * exp(-1/2 sum_d ((x_d - x'_d)/l_d)^2).
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
  double noise_variance = 0.0;

  int dim() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;
};

double kernel_eval(const KernelParams& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

//! Training inputs (rows) and scalar observations.
struct Dataset {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd outputs;  // n

  int size() const { return static_cast<int>(outputs.size()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  void append(const Eigen::VectorXd& x, double y);
  static Dataset empty(int dim);
};

//! Exact GP posterior backed by a Cholesky factor of K = k(X,X) + sn^2 I.
//! Immutable after construction; safe to share across threads read-only.
class GpModel {
 public:
  GpModel() = default;
  //! Builds the factor, escalating diagonal jitter from 1e-10*sf^2 by x10 up
  //! to 1e-4*sf^2 before giving up with NonPsdError.
  GpModel(KernelParams params, Dataset data, double mean_offset = 0.0);

  static GpModel prior(KernelParams params) {
    const int d = params.dim();
    return GpModel(std::move(params), Dataset::empty(d));
  }

  double posterior_mean(const Eigen::VectorXd& x) const;
  //! Chunked batch evaluation of the posterior mean (rows of X are inputs).
  Eigen::VectorXd posterior_mean_many(const Eigen::MatrixXd& X) const;
  double posterior_var(const Eigen::VectorXd& x) const;
  double posterior_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  //! Predictive variance at x had `ghost` been observed (noise-free ghost).
  double conditional_var(const Eigen::VectorXd& x, const Eigen::VectorXd& ghost) const;

  //! Log marginal likelihood of the stored (offset-corrected) observations.
  double log_marginal_likelihood() const { return lml_; }

  const KernelParams& params() const { return params_; }
  const Dataset& data() const { return data_; }
  double mean_offset() const { return offset_; }
  int dim() const { return params_.dim(); }
  double jitter() const { return jitter_; }

  // Low-level accessors used by the acquisition evaluators.
  Eigen::VectorXd kernel_vector(const Eigen::VectorXd& x) const;  // k(X, x)
  const Eigen::MatrixXd& chol_lower() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }  // K^{-1} (y - offset)
  Eigen::VectorXd solve_lower(const Eigen::VectorXd& v) const;    // L^{-1} v
  Eigen::VectorXd solve_full(const Eigen::VectorXd& v) const;     // K^{-1} v

 private:
  void check_dim(const Eigen::VectorXd& x) const;

  KernelParams params_;
  Dataset data_;
  double offset_ = 0.0;
  Eigen::MatrixXd chol_;   // lower triangular
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
  double jitter_ = 0.0;
};

struct FitOptions {
  int restarts = 10;
  int max_iters = 120;
  //! Lengthscale indices held fixed at their init value (excluded from MLE).
  std::vector<int> fixed_lengthscales;
  std::uint64_t seed = 0x5c007;
};

//! Log marginal likelihood of `data` (offset already removed by caller) at
//! the given hyperparameters: -1/2 y'K^{-1}y - 1/2 log|K| - n/2 log(2pi).
double log_marginal_likelihood(const Dataset& data, const KernelParams& p);

//! Gradient of the log marginal likelihood with respect to
//! (log sf^2, log l_1, ..., log l_d, log sn^2), in that order.
Eigen::VectorXd lml_gradient(const Dataset& data, const KernelParams& p);

//! Maximum-likelihood fit with multi-start bounded ascent in log space.
//! Observations are centered before fitting; the offset is re-added by
//! GpModel::posterior_mean.
GpModel fit(const Dataset& data, const KernelParams& init, const FitOptions& opts = {});
GpModel fit(const Dataset& data, const KernelParams& init, int restarts);

//! Appends the time coordinate when the model carries one.
Eigen::VectorXd model_input(int model_dim, const Vec2& z, double t);

}  // namespace scout
