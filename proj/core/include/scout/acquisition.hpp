#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scout/density.hpp"
#include "scout/gp.hpp"

namespace scout {

enum class AcquisitionKind { US, USIW, USLW, IVR, IVRIW, IVRLW, UCB, PI, EI };

AcquisitionKind parse_acquisition(const std::string& name);
std::string to_string(AcquisitionKind kind);
bool is_input_weighted(AcquisitionKind kind);       // *-IW
bool is_likelihood_weighted(AcquisitionKind kind);  // *-LW
bool is_classic(AcquisitionKind kind);              // UCB/PI/EI

//! Tensor-grid midpoint rule over the spatial unit square.
struct QuadratureSpec {
  int n = 64;  // nodes per axis
};

//! Everything an acquisition can depend on.  Pointers are borrowed; the
//! caller keeps the referees alive while evaluating.
struct AcquisitionContext {
  const GpModel* model = nullptr;
  const InputPrior* prior = nullptr;           // required for IW and LW kinds
  const LikelihoodWeight* weight = nullptr;    // required for LW kinds
  double y_star = std::numeric_limits<double>::quiet_NaN();  // best (min) observation
  double kappa = 0.0;                          // UCB/PI/EI trade-off
  QuadratureSpec quad;
};

//! Batch evaluator with per-decision precomputation (quadrature tables and
//! GMM pair integrals).  Values follow the paper forms and are maximized;
//! `cost` negates them for the arg-min mission convention.
class AcquisitionEvaluator {
 public:
  AcquisitionEvaluator(AcquisitionKind kind, const AcquisitionContext& ctx);

  double value(const Eigen::VectorXd& x) const;
  double cost(const Eigen::VectorXd& x) const { return -value(x); }
  AcquisitionKind kind() const { return kind_; }

 private:
  double ivr_family(const Eigen::VectorXd& x) const;
  double ivr_lw_analytic(const Eigen::VectorXd& x) const;
  double classic(const Eigen::VectorXd& x) const;

  AcquisitionKind kind_;
  AcquisitionContext ctx_;
  double var_floor_ = 0.0;
  // IVR / IVR-IW quadrature tables.
  Eigen::MatrixXd quad_nodes_;     // nq x 2
  Eigen::VectorXd quad_weights_;   // nq (cell mass, prior-weighted for IW)
  Eigen::MatrixXd kq_spatial_;     // n x nq, spatial kernel block
  // IVR-LW pair-integral tables, one per mixture component.
  std::vector<Eigen::MatrixXd> pair_integrals_;
};

//! Predictive variance (Eq.-4-style uncertainty sampling).
double acq_us(const AcquisitionContext& ctx, const Eigen::VectorXd& x);

enum class WeightMode { InputPrior, LikelihoodRatio };

//! sigma^2(x) * p_z(z) or sigma^2(x) * w(x); the LW form uses the raw ratio.
double acq_us_weighted(const AcquisitionContext& ctx, const Eigen::VectorXd& x, WeightMode mode);

//! Integrated variance reduction by quadrature.
double acq_ivr(const AcquisitionContext& ctx, const Eigen::VectorXd& x, const QuadratureSpec& quad);

//! IW by quadrature; LW analytically through the GMM surrogate.
double acq_ivr_weighted(const AcquisitionContext& ctx, const Eigen::VectorXd& x, WeightMode mode,
                        const QuadratureSpec& quad);

//! UCB / PI / EI in minimization form: lambda = (y* - mu - kappa)/sigma.
double acq_classic(const AcquisitionContext& ctx, const Eigen::VectorXd& x, AcquisitionKind kind);

//! Order-preserving log forms (UCB passes through).  PI and EI underflow to
//! zero for large kappa in double precision; argmax comparisons use these.
double acq_classic_log(const AcquisitionContext& ctx, const Eigen::VectorXd& x, AcquisitionKind kind);

//! Kind dispatch in value (maximize) form.
double evaluate_acquisition(AcquisitionKind kind, const AcquisitionContext& ctx,
                            const Eigen::VectorXd& x);

//! Quadrature reference for the IVR-LW analytic path: integrates
//! cov^2(x, x') * w_GMM(x') / sigma^2(x) over the unit square.
double ivr_lw_quadrature(const AcquisitionContext& ctx, const Eigen::VectorXd& x, int nodes_per_axis);

}  // namespace scout
