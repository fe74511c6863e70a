#include "scout/mission.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace scout {

StaticMode parse_static_mode(const std::string& name) {
  if (name == "spatiotemporal") return StaticMode::Spatiotemporal;
  if (name == "infinite-time-lengthscale") return StaticMode::InfiniteTimeLengthscale;
  if (name == "no-time-variable") return StaticMode::NoTimeVariable;
  throw ConfigError("unknown static mode: " + name);
}

std::string to_string(StaticMode mode) {
  switch (mode) {
    case StaticMode::Spatiotemporal: return "spatiotemporal";
    case StaticMode::InfiniteTimeLengthscale: return "infinite-time-lengthscale";
    case StaticMode::NoTimeVariable: return "no-time-variable";
  }
  return "?";
}

GpSpec apply_static_mode(StaticMode mode, GpSpec spec) {
  if (spec.init.dim() != 3) throw ContractError("apply_static_mode: base spec must be 3-D");
  switch (mode) {
    case StaticMode::Spatiotemporal:
      spec.input_dim = 3;
      return spec;
    case StaticMode::InfiniteTimeLengthscale:
      spec.input_dim = 3;
      spec.init.lengthscales[2] = 1e6;
      spec.fixed_lengthscales.push_back(2);
      return spec;
    case StaticMode::NoTimeVariable: {
      spec.input_dim = 2;
      Eigen::VectorXd ls = spec.init.lengthscales.head(2);
      spec.init.lengthscales = ls;
      return spec;
    }
  }
  return spec;
}

void MissionConfig::validate() const {
  if (!(duration >= 0.0)) throw ConfigError("mission: duration must be nonnegative");
  if (!(speed > 0.0)) throw ConfigError("mission: speed must be positive");
  if (!(sample_period > 0.0)) throw ConfigError("mission: sample_period must be positive");
  if (!(planner.lookahead > 0.0)) throw ConfigError("mission: lookahead must be positive");
  if (metric_probes < 100) throw ConfigError("mission: metric_probes must be >= 100");
}

namespace {

struct MissionState {
  Pose pose;
  double clock = 0.0;
  Dataset data;
  GpModel model;
  std::optional<LikelihoodWeight> weight;
  int epoch = 0;
};

GpSpec default_gp_spec(const MissionConfig& cfg) {
  GpSpec spec;
  spec.input_dim = 3;
  spec.init.signal_variance = 1.0;
  spec.init.lengthscales = Eigen::VectorXd::Zero(3);
  spec.init.lengthscales << 0.3, 0.3, 5.0;
  spec.init.noise_variance = 1e-3;
  return apply_static_mode(cfg.static_mode, spec);
}

GpModel refit_model(const Dataset& data, const GpSpec& spec, const KernelParams* warm,
                    int restarts, Rng& fit_rng) {
  FitOptions opts;
  opts.restarts = restarts;
  opts.fixed_lengthscales = spec.fixed_lengthscales;
  opts.seed = fit_rng.next_u64();
  if (warm != nullptr) opts.max_iters = 50;  // warm starts converge quickly
  const KernelParams& init = warm ? *warm : spec.init;
  try {
    return fit(data, init, opts);
  } catch (const std::runtime_error&) {
    // one retry with fresh restarts before aborting
    opts.seed = fit_rng.next_u64();
    opts.restarts = restarts + 4;
    return fit(data, spec.init, opts);
  }
}

class MissionRunner {
 public:
  MissionRunner(const Environment& env, const MissionConfig& cfg, bool next_best_view,
                const ProbeSet* probes, const CostFactory* cost_override)
      : env_(env),
        cfg_(cfg),
        nbv_(next_best_view),
        cost_override_(cost_override),
        noise_rng_(Rng(cfg.seed).fork(0xA)),
        planner_rng_(Rng(cfg.seed).fork(0xB)),
        fit_rng_(Rng(cfg.seed).fork(0xC)),
        weight_rng_(Rng(cfg.seed).fork(0xD)),
        spec_(default_gp_spec(cfg)) {
    cfg.validate();
    if (probes != nullptr) {
      probes_ = *probes;
    } else {
      Rng probe_rng(cfg.probe_seed);
      probes_ = ProbeSet::make(cfg.metric_probes, probe_rng);
    }
  }

  MissionResult run() {
    MissionState st;
    st.pose = Pose(cfg_.start_position, cfg_.start_heading);
    st.data = Dataset::empty(spec_.input_dim);

    // initial measurement at the start pose
    record_measurement(st, st.pose.z, 0.0);
    st.model = refit_model(st.data, spec_, nullptr, cfg_.gp_restarts, fit_rng_);
    refresh_weight_if_needed(st);

    MissionResult out;
    out.trace.push_back(snapshot(st, st.pose.z));

    const double T = cfg_.duration;
    while (st.clock < T - 1e-12) {
      ++st.epoch;
      const AdmissibleSet set =
          admissible_destinations(st.pose, cfg_.planner.lookahead, cfg_.planner.half_angle,
                                  cfg_.planner.turn_radius, cfg_.planner.n_candidates);

      Vec2 dest;
      DubinsPath path;
      if (st.epoch == 1) {
        // nothing to compare yet: draw uniformly from the admissible set
        const int idx = planner_rng_.uniform_int(static_cast<int>(set.candidates.size()));
        dest = set.candidates[idx];
        path = path_to(st.pose, dest);
      } else if (nbv_) {
        std::tie(dest, path) = select_pointwise(st, set);
      } else {
        const CostFn cost = make_cost(st);
        const DestinationChoice choice =
            select_destination(st.pose, set, cost, cfg_.speed, st.clock, cfg_.planner.n_path_samples,
                               cfg_.planner.turn_radius);
        dest = choice.destination;
        path = choice.path;
      }

      // travel the leg
      const double t_depart = st.clock;
      const double t_arrive = t_depart + path.length() / cfg_.speed;
      const bool partial = t_arrive > T;
      if (!nbv_) sample_en_route(st, path, t_depart, std::min(t_arrive, T));
      if (partial) {
        st.pose = path.point_at((T - t_depart) * cfg_.speed);
        st.clock = T;
      } else {
        st.pose = path.end();
        st.clock = t_arrive;
        if (nbv_) record_measurement(st, st.pose.z, st.clock);
      }

      const KernelParams warm = st.model.params();
      const int restarts = cfg_.refit_restarts + (st.epoch % 8 == 0 ? 1 : 0);
      st.model = refit_model(st.data, spec_, &warm, restarts, fit_rng_);
      refresh_weight_if_needed(st);
      out.trace.push_back(snapshot(st, dest));
      if (partial) break;
    }
    out.model = std::move(st.model);
    return out;
  }

 private:
  DubinsPath path_to(const Pose& from, const Vec2& dest) const {
    const Vec2 off = dest - from.z;
    return shortest_dubins(from, Pose(dest, std::atan2(off[1], off[0])), cfg_.planner.turn_radius);
  }

  void record_measurement(MissionState& st, const Vec2& z, double t) {
    const double noise =
        env_.noise_variance > 0.0 ? std::sqrt(env_.noise_variance) * noise_rng_.normal() : 0.0;
    const double y = env_(z, t) + noise;
    st.data.append(model_input(spec_.input_dim, z, std::min(t, cfg_.duration)), y);
  }

  void sample_en_route(MissionState& st, const DubinsPath& path, double t_depart, double t_stop) {
    const double ts = cfg_.sample_period;
    long k = static_cast<long>(std::floor(t_depart / ts + 1e-9)) + 1;
    for (;; ++k) {
      const double tm = k * ts;
      if (tm > t_stop + 1e-9) break;
      const double s = (tm - t_depart) * cfg_.speed;
      record_measurement(st, path.point_at(s).z, tm);
    }
  }

  void refresh_weight_if_needed(MissionState& st) {
    if (!is_likelihood_weighted(cfg_.acquisition) || cost_override_ != nullptr) return;
    st.weight = refresh_weight(st.model, cfg_.prior, st.clock, cfg_.weight, weight_rng_);
  }

  CostFn make_cost(MissionState& st) {
    if (cost_override_ != nullptr) return (*cost_override_)(st.model, st.clock);
    AcquisitionContext ctx;
    ctx.model = &st.model;
    ctx.prior = &cfg_.prior;
    ctx.weight = st.weight ? &*st.weight : nullptr;
    ctx.kappa = cfg_.kappa;
    ctx.quad = cfg_.quad;
    if (st.data.size() > 0) ctx.y_star = st.data.outputs.minCoeff();
    auto eval = std::make_shared<AcquisitionEvaluator>(cfg_.acquisition, ctx);
    // the evaluator captures ctx by value; keep the weight alive alongside
    auto weight_copy = st.weight;
    const int dim = spec_.input_dim;
    return [eval, weight_copy, dim](const Vec2& z, double t) {
      return eval->cost(model_input(dim, z, t));
    };
  }

  std::pair<Vec2, DubinsPath> select_pointwise(MissionState& st, const AdmissibleSet& set) {
    const CostFn cost = make_cost(st);
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < set.candidates.size(); ++i) {
      const double c = cost(set.candidates[i], st.clock);
      if (c < best_cost) {
        best_cost = c;
        best = static_cast<int>(i);
      }
    }
    const Vec2 dest = set.candidates[best];
    return {dest, path_to(st.pose, dest)};
  }

  EpochSnapshot snapshot(const MissionState& st, const Vec2& dest) {
    EpochSnapshot snap;
    snap.epoch = st.epoch;
    snap.clock = st.clock;
    snap.pose = st.pose;
    snap.destination = dest;
    snap.acquisition = cfg_.acquisition;
    snap.n_data = st.data.size();
    snap.metrics = compute_metrics(env_, st.model, st.clock, probes_);
    return snap;
  }

  const Environment& env_;
  const MissionConfig& cfg_;
  bool nbv_;
  const CostFactory* cost_override_;
  Rng noise_rng_, planner_rng_, fit_rng_, weight_rng_;
  GpSpec spec_;
  ProbeSet probes_;
};

}  // namespace

MissionResult run_mission(const Environment& env, const MissionConfig& cfg, const ProbeSet* probes,
                          const CostFactory* cost_override) {
  return MissionRunner(env, cfg, /*next_best_view=*/false, probes, cost_override).run();
}

MissionResult run_next_best_view(const Environment& env, const MissionConfig& cfg,
                                 const ProbeSet* probes, const CostFactory* cost_override) {
  return MissionRunner(env, cfg, /*next_best_view=*/true, probes, cost_override).run();
}

// ---------------------------------------------------------------------------

void write_trace(std::ostream& out, const std::vector<EpochSnapshot>& trace) {
  for (const auto& s : trace) {
    nlohmann::ordered_json j;
    j["epoch"] = s.epoch;
    j["clock"] = s.clock;
    j["pose"] = {s.pose.z[0], s.pose.z[1], s.pose.theta};
    j["destination"] = {s.destination[0], s.destination[1]};
    j["acquisition"] = to_string(s.acquisition);
    j["n_data"] = s.n_data;
    j["rmse"] = s.metrics.rmse;
    j["pdfe"] = s.metrics.pdfe;
    j["dist_to_min"] = s.metrics.dist_to_min;
    j["regret"] = s.metrics.regret;
    out << j.dump() << "\n";
  }
}

std::vector<EpochSnapshot> read_trace(std::istream& in) {
  std::vector<EpochSnapshot> trace;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    EpochSnapshot s;
    s.epoch = j.at("epoch").get<int>();
    s.clock = j.at("clock").get<double>();
    const auto& p = j.at("pose");
    s.pose = Pose(Vec2(p.at(0).get<double>(), p.at(1).get<double>()), p.at(2).get<double>());
    const auto& d = j.at("destination");
    s.destination = Vec2(d.at(0).get<double>(), d.at(1).get<double>());
    s.acquisition = parse_acquisition(j.at("acquisition").get<std::string>());
    s.n_data = j.at("n_data").get<int>();
    s.metrics.clock = s.clock;
    s.metrics.rmse = j.at("rmse").get<double>();
    s.metrics.pdfe = j.at("pdfe").get<double>();
    s.metrics.dist_to_min = j.at("dist_to_min").get<double>();
    s.metrics.regret = j.at("regret").get<double>();
    trace.push_back(s);
  }
  return trace;
}

std::vector<MetricSnapshot> trace_metrics(const std::vector<EpochSnapshot>& trace) {
  std::vector<MetricSnapshot> out;
  out.reserve(trace.size());
  for (const auto& s : trace) out.push_back(s.metrics);
  return out;
}

}  // namespace scout
