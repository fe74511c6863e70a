#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scout/acquisition.hpp"
#include "scout/environment.hpp"
#include "scout/metrics.hpp"
#include "scout/planner.hpp"

namespace scout {

//! How a static environment is presented to the GP.
enum class StaticMode { Spatiotemporal, InfiniteTimeLengthscale, NoTimeVariable };

StaticMode parse_static_mode(const std::string& name);
std::string to_string(StaticMode mode);

//! Input layout plus which lengthscales the MLE may move.
struct GpSpec {
  int input_dim = 3;
  std::vector<int> fixed_lengthscales;
  KernelParams init;
};

//! Spatiotemporal: all lengthscales trained.  InfiniteTimeLengthscale: time
//! axis pinned at 1e6.  NoTimeVariable: 2-D inputs.
GpSpec apply_static_mode(StaticMode mode, GpSpec spec);

struct MissionConfig {
  double duration = 15.0;
  double speed = 1.0;
  double sample_period = 1.0 / 15.0;
  Vec2 start_position{0.0, 0.0};
  double start_heading = kPi / 4.0;
  AcquisitionKind acquisition = AcquisitionKind::IVR;
  double kappa = 1.0;  // UCB/PI/EI only
  InputPrior prior = InputPrior::uniform();
  PlannerParams planner;
  QuadratureSpec quad;
  WeightConfig weight;
  StaticMode static_mode = StaticMode::Spatiotemporal;
  int gp_restarts = 8;     // initial fit
  int refit_restarts = 1;  // per-epoch refits (warm-started; a fresh restart
                           // is added every eighth epoch to escape bad basins)
  int metric_probes = 100000;
  std::uint64_t seed = 0;
  std::uint64_t probe_seed = 0x9e11;

  void validate() const;
};

struct EpochSnapshot {
  int epoch = 0;
  double clock = 0.0;
  Pose pose;
  Vec2 destination{0.0, 0.0};
  AcquisitionKind acquisition = AcquisitionKind::US;
  int n_data = 0;
  MetricSnapshot metrics;
};

struct MissionResult {
  std::vector<EpochSnapshot> trace;
  GpModel model;
};

//! Per-epoch hook used by tests to replace the acquisition; receives the
//! current model and decision time, returns the planner cost.
using CostFactory = std::function<CostFn(const GpModel& model, double t)>;

//! Informative path planning: destinations by path-integral arg min, en-route
//! measurements on the global sampling clock, surrogate refit per epoch.
//! Deterministic given cfg.seed.  `probes` (when given) overrides the
//! internally seeded metric probe set so suites can share one.
MissionResult run_mission(const Environment& env, const MissionConfig& cfg,
                          const ProbeSet* probes = nullptr, const CostFactory* cost_override = nullptr);

//! Next-best-view: pointwise arg min over the admissible arc, one measurement
//! per epoch at the destination.
MissionResult run_next_best_view(const Environment& env, const MissionConfig& cfg,
                                 const ProbeSet* probes = nullptr,
                                 const CostFactory* cost_override = nullptr);

//! Line-delimited trace serialization (one JSON object per epoch).
void write_trace(std::ostream& out, const std::vector<EpochSnapshot>& trace);
std::vector<EpochSnapshot> read_trace(std::istream& in);
std::vector<MetricSnapshot> trace_metrics(const std::vector<EpochSnapshot>& trace);

}  // namespace scout
