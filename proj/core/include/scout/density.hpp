#pragma once

#include <vector>

#include "scout/gp.hpp"

namespace scout {

//! Operator belief over the spatial input space.
struct InputPrior {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  Vec2 mean{0.5, 0.5};
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();

  static InputPrior uniform();
  static InputPrior gaussian(const Vec2& mean, const Eigen::Matrix2d& cov);

  //! Spatial density p_z(z).  Uniform: indicator of the unit square.
  double density(const Vec2& z) const;

 private:
  // Cached Cholesky pieces of the gaussian covariance.
  Eigen::Matrix2d cov_inv_ = Eigen::Matrix2d::Identity();
  double norm_const_ = 1.0;
};

//! Gaussian-kernel KDE of a scalar sample set on a uniform grid, bandwidth by
//! Silverman's rule, trapezoid-renormalized to unit mass.
struct OutputDensity {
  Eigen::VectorXd grid;    // uniform, covering [min - 3h, max + 3h]
  Eigen::VectorXd values;  // >= floor()
  double bandwidth = 0.0;

  double floor() const { return 1e-9 * peak; }
  double peak = 0.0;

  //! Linear interpolation on the grid; queries outside return the floor.
  double eval(double y) const;

  static OutputDensity from_samples(const Eigen::VectorXd& ys, int grid_points = 1024);
};

//! Draws n uniform spatial samples, pushes them through the posterior mean at
//! time t, and returns the KDE of the resulting values.
OutputDensity estimate_output_density(const GpModel& m, int n_samples, double t, Rng& rng);

//! Gaussian mixture with diagonal covariances; the weights sum to the mass of
//! the field it approximates, not to 1.
struct GmmComponent {
  double weight = 1.0;
  Vec2 mean{0.5, 0.5};
  Vec2 var{0.1, 0.1};  // diagonal covariance entries
};
struct GmmSurrogate {
  std::vector<GmmComponent> components;

  double eval(const Vec2& z) const;
  double total_mass() const;
  void scale_mass(double target);
  int size() const { return static_cast<int>(components.size()); }
};

struct WeightedSample {
  Vec2 z;
  double w = 1.0;
};

//! Weighted EM fit with diagonal covariances.  Component masses are scaled so
//! they sum to the total mass of the input weights.  If `loglik_trace` is
//! given it receives the EM objective after each iteration.
GmmSurrogate fit_gmm(const std::vector<WeightedSample>& samples, int n_components, int max_iter,
                     Rng& rng, std::vector<double>* loglik_trace = nullptr);

struct WeightConfig {
  int kde_samples = 10000;   // uniform draws per refresh
  int gmm_components = 2;
  int gmm_max_iter = 100;
  int mass_grid = 65;        // trapezoid nodes per axis for the w mass estimate
};

//! The likelihood ratio w(x) = p_x(x) / p_mu(mu(x)) plus its GMM surrogate.
struct LikelihoodWeight {
  InputPrior prior;
  OutputDensity out_density;
  GmmSurrogate gmm;
  int sample_count = 0;

  //! Raw ratio at a model input (spatial part feeds the prior).
  double ratio(const GpModel& m, const Eigen::VectorXd& x) const;
};

double likelihood_ratio(const LikelihoodWeight& lw, const GpModel& m, const Eigen::VectorXd& x);

//! Re-estimates p_mu, evaluates w on the sample set, importance-resamples, and
//! refits the GMM.  Deterministic given the RNG state.
LikelihoodWeight refresh_weight(const GpModel& m, const InputPrior& prior, double t,
                                const WeightConfig& cfg, Rng& rng);

}  // namespace scout
