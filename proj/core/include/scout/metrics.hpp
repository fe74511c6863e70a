#pragma once

#include <iosfwd>
#include <vector>

#include "scout/environment.hpp"
#include "scout/gp.hpp"

namespace scout {

//! Frozen uniform spatial sample set shared by all metric evaluations of a
//! replicate suite.
struct ProbeSet {
  Eigen::MatrixXd z;  // n x 2
  static ProbeSet make(int n, Rng& rng);
  int size() const { return static_cast<int>(z.rows()); }
};

struct MetricSnapshot {
  double clock = 0.0;
  double rmse = 0.0;
  double pdfe = 0.0;
  double dist_to_min = 0.0;  // squared distance between the two minimizers
  double regret = 0.0;       // |f(z*) - f(z+)|
};

double rmse(const Environment& env, const GpModel& m, double t, const ProbeSet& probes);

struct PdfeResult {
  double value = 0.0;
  double y_lo = 0.0, y_hi = 0.0;  // integration range actually used
};
//! Integral of |log p_f - log p_mu| over the range where both KDEs exceed
//! 1e-3 of the lower peak (keeps the tails statistically meaningful).
PdfeResult pdfe_detail(const Environment& env, const GpModel& m, double t, const ProbeSet& probes);
double pdfe(const Environment& env, const GpModel& m, double t, const ProbeSet& probes);
//! Sample-space core of the log-pdf error.
PdfeResult pdfe_from_samples(const Eigen::VectorXd& f_values, const Eigen::VectorXd& mu_values);

//! (squared distance between minimizers, |f(z*) - f(z+)|), minimizers taken
//! over the probe set.
std::pair<double, double> extremum_metrics(const Environment& env, const GpModel& m, double t,
                                           const ProbeSet& probes);

//! All four metrics off one pass over the probe set.
MetricSnapshot compute_metrics(const Environment& env, const GpModel& m, double t,
                               const ProbeSet& probes);

//! Across-replicate aggregation: per-epoch median of the cumulative minimum
//! and a band of MAD/4.
struct AggregateSeries {
  struct Row {
    int epoch = 0;
    double clock = 0.0;  // median across replicates
    double median = 0.0;
    double band = 0.0;  // MAD/4
  };
  // metric name -> series (rmse, pdfe, dist_to_min, regret)
  std::vector<std::string> metric_names;
  std::vector<std::vector<Row>> series;
  int n_replicates = 0;
};

//! Input: per replicate, the per-epoch metric snapshots (epoch index implied
//! by position).  Replicates are truncated to the shortest series.
AggregateSeries aggregate(const std::vector<std::vector<MetricSnapshot>>& replicates);

//! CSV columns: epoch, clock, metric, median, band.
void write_aggregate_csv(std::ostream& out, const AggregateSeries& agg);

}  // namespace scout
