#include "scout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "scout/density.hpp"

namespace scout {

ProbeSet ProbeSet::make(int n, Rng& rng) {
  ProbeSet p;
  p.z.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    p.z(i, 0) = rng.uniform();
    p.z(i, 1) = rng.uniform();
  }
  return p;
}

namespace {

struct FieldSamples {
  Eigen::VectorXd f;   // environment values at the probes
  Eigen::VectorXd mu;  // posterior mean at the probes
};

FieldSamples evaluate_fields(const Environment& env, const GpModel& m, double t,
                             const ProbeSet& probes) {
  const int n = probes.size();
  FieldSamples out;
  out.f.resize(n);
  for (int i = 0; i < n; ++i) out.f[i] = env(Vec2(probes.z(i, 0), probes.z(i, 1)), t);
  Eigen::MatrixXd X(n, m.dim());
  X.leftCols(2) = probes.z;
  if (m.dim() == 3) X.col(2).setConstant(t);
  out.mu = m.posterior_mean_many(X);
  return out;
}

double rmse_of(const FieldSamples& s) {
  return std::sqrt((s.f - s.mu).squaredNorm() / static_cast<double>(s.f.size()));
}

PdfeResult pdfe_of(const FieldSamples& s) {
  PdfeResult res;
  const OutputDensity pf = OutputDensity::from_samples(s.f);
  const OutputDensity pm = OutputDensity::from_samples(s.mu);
  // Common grid covering both supports.
  const double lo = std::min(pf.grid[0], pm.grid[0]);
  const double hi = std::max(pf.grid[pf.grid.size() - 1], pm.grid[pm.grid.size() - 1]);
  if (!(hi > lo)) return res;
  const int n = 2048;
  const double dy = (hi - lo) / (n - 1);
  const double floor = 1e-3 * std::min(pf.peak, pm.peak);

  double acc = 0.0;
  bool any = false;
  double prev = 0.0;
  bool prev_in = false;
  for (int i = 0; i < n; ++i) {
    const double y = lo + i * dy;
    const double a = pf.eval(y);
    const double b = pm.eval(y);
    const bool in = a > floor && b > floor;
    const double val = in ? std::abs(std::log(a) - std::log(b)) : 0.0;
    if (in && prev_in) acc += 0.5 * (prev + val) * dy;
    if (in) {
      if (!any) res.y_lo = y;
      res.y_hi = y;
      any = true;
    }
    prev = val;
    prev_in = in;
  }
  res.value = acc;
  if (!any) {
    res.y_lo = res.y_hi = lo;
  }
  return res;
}

std::pair<double, double> extremum_of(const FieldSamples& s, const ProbeSet& probes) {
  int i_f = 0, i_mu = 0;
  s.f.minCoeff(&i_f);
  s.mu.minCoeff(&i_mu);
  const Vec2 z_star(probes.z(i_f, 0), probes.z(i_f, 1));
  const Vec2 z_plus(probes.z(i_mu, 0), probes.z(i_mu, 1));
  const double dist_sq = (z_star - z_plus).squaredNorm();
  const double regret = std::abs(s.f[i_f] - s.f[i_mu]);
  return {dist_sq, regret};
}

}  // namespace

double rmse(const Environment& env, const GpModel& m, double t, const ProbeSet& probes) {
  return rmse_of(evaluate_fields(env, m, t, probes));
}

PdfeResult pdfe_detail(const Environment& env, const GpModel& m, double t, const ProbeSet& probes) {
  return pdfe_of(evaluate_fields(env, m, t, probes));
}

PdfeResult pdfe_from_samples(const Eigen::VectorXd& f_values, const Eigen::VectorXd& mu_values) {
  FieldSamples s;
  s.f = f_values;
  s.mu = mu_values;
  return pdfe_of(s);
}

double pdfe(const Environment& env, const GpModel& m, double t, const ProbeSet& probes) {
  return pdfe_detail(env, m, t, probes).value;
}

std::pair<double, double> extremum_metrics(const Environment& env, const GpModel& m, double t,
                                           const ProbeSet& probes) {
  return extremum_of(evaluate_fields(env, m, t, probes), probes);
}

MetricSnapshot compute_metrics(const Environment& env, const GpModel& m, double t,
                               const ProbeSet& probes) {
  const FieldSamples s = evaluate_fields(env, m, t, probes);
  MetricSnapshot snap;
  snap.clock = t;
  snap.rmse = rmse_of(s);
  snap.pdfe = pdfe_of(s).value;
  std::tie(snap.dist_to_min, snap.regret) = extremum_of(s, probes);
  return snap;
}

namespace {

double median_of(std::vector<double> v) {
  const size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

AggregateSeries aggregate(const std::vector<std::vector<MetricSnapshot>>& replicates) {
  if (replicates.size() < 2) throw ContractError("aggregate: need at least 2 replicates");
  size_t epochs = replicates[0].size();
  for (const auto& r : replicates) epochs = std::min(epochs, r.size());
  if (epochs == 0) throw ContractError("aggregate: empty replicate series");

  AggregateSeries agg;
  agg.metric_names = {"rmse", "pdfe", "dist_to_min", "regret"};
  agg.n_replicates = static_cast<int>(replicates.size());
  agg.series.resize(4);

  auto pick = [](const MetricSnapshot& s, int metric) {
    switch (metric) {
      case 0: return s.rmse;
      case 1: return s.pdfe;
      case 2: return s.dist_to_min;
      default: return s.regret;
    }
  };

  for (int metric = 0; metric < 4; ++metric) {
    // cumulative minimum per replicate
    std::vector<std::vector<double>> cummin(replicates.size(), std::vector<double>(epochs));
    for (size_t r = 0; r < replicates.size(); ++r) {
      double acc = std::numeric_limits<double>::infinity();
      for (size_t e = 0; e < epochs; ++e) {
        acc = std::min(acc, pick(replicates[r][e], metric));
        cummin[r][e] = acc;
      }
    }
    agg.series[metric].resize(epochs);
    for (size_t e = 0; e < epochs; ++e) {
      std::vector<double> vals(replicates.size()), clocks(replicates.size());
      for (size_t r = 0; r < replicates.size(); ++r) {
        vals[r] = cummin[r][e];
        clocks[r] = replicates[r][e].clock;
      }
      const double med = median_of(vals);
      std::vector<double> dev(vals.size());
      for (size_t r = 0; r < vals.size(); ++r) dev[r] = std::abs(vals[r] - med);
      AggregateSeries::Row row;
      row.epoch = static_cast<int>(e);
      row.clock = median_of(clocks);
      row.median = med;
      row.band = 0.25 * median_of(dev);
      agg.series[metric][e] = row;
    }
  }
  return agg;
}

void write_aggregate_csv(std::ostream& out, const AggregateSeries& agg) {
  out << "epoch,clock,metric,median,band\n";
  char buf[160];
  for (size_t metric = 0; metric < agg.series.size(); ++metric) {
    for (const auto& row : agg.series[metric]) {
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%s,%.17g,%.17g\n", row.epoch, row.clock,
                    agg.metric_names[metric].c_str(), row.median, row.band);
      out << buf;
    }
  }
}

}  // namespace scout
