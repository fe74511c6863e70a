#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scout/acquisition.hpp"
#include "scout/dubins.hpp"
#include "scout/gp.hpp"

namespace scout::validate {

//! Independent shortest-path oracle: per family, a fine sweep over the first
//! arc angle with geometric closure of the remaining segments.  Returns +inf
//! when no family closes on the grid (should not happen for grid_step <= 1e-3).
double dubins_brute_force_length(const Pose& start, const Pose& end, double radius,
                                 double grid_step = 1e-4);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

//! Fault-injection seams: checks call these instead of the library entry
//! points so tests can verify that a corrupted implementation is caught.
struct Hooks {
  //! Analytic IVR-LW path under test; defaults to the library implementation.
  std::function<double(const AcquisitionContext&, const Eigen::VectorXd&)> ivr_lw_analytic;
};

CheckResult check_gp_dense_oracle();
CheckResult check_mle_gradient();
CheckResult check_ivr_lw_analytic(const Hooks& hooks = {});
CheckResult check_dubins_brute_force(int n_pairs = 60);
CheckResult check_exploration_limit_argmax();
CheckResult check_benchmark_transcription();

//! The fast oracle suite behind `scout validate`.
std::vector<CheckResult> run_all(const Hooks& hooks = {});

}  // namespace scout::validate
