#include "scout/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "scout/sha256.hpp"

namespace scout {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

InputPrior prior_from_json(const json& j) {
  const std::string kind = j.value("kind", "uniform");
  if (kind == "uniform") return InputPrior::uniform();
  if (kind == "gaussian") {
    if (!j.contains("mean") || !j.contains("cov")) {
      throw ConfigError("prior: gaussian priors need 'mean' and 'cov'");
    }
    const auto& mean = j.at("mean");
    const auto& cov = j.at("cov");
    Eigen::Matrix2d C;
    if (cov.is_number()) {
      C = cov.get<double>() * Eigen::Matrix2d::Identity();
    } else {
      C << cov.at(0).at(0).get<double>(), cov.at(0).at(1).get<double>(),
          cov.at(1).at(0).get<double>(), cov.at(1).at(1).get<double>();
    }
    return InputPrior::gaussian(Vec2(mean.at(0).get<double>(), mean.at(1).get<double>()), C);
  }
  throw ConfigError("prior: unknown kind '" + kind + "'");
}

ordered_json prior_to_json(const InputPrior& p) {
  ordered_json j;
  if (p.kind == InputPrior::Kind::Uniform) {
    j["kind"] = "uniform";
  } else {
    j["kind"] = "gaussian";
    j["mean"] = {p.mean[0], p.mean[1]};
    j["cov"] = {{p.cov(0, 0), p.cov(0, 1)}, {p.cov(1, 0), p.cov(1, 1)}};
  }
  return j;
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("spec: not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    spec.name = j.value("name", std::string("experiment"));
    if (!j.contains("environment")) throw ConfigError("spec: missing field 'environment'");
    spec.environment = j.at("environment").get<std::string>();
    spec.dynamic = j.value("dynamic", false);
    if (!j.contains("acquisitions") || !j.at("acquisitions").is_array() ||
        j.at("acquisitions").empty()) {
      throw ConfigError("spec: 'acquisitions' must be a nonempty array");
    }
    for (const auto& a : j.at("acquisitions")) {
      spec.acquisitions.push_back(parse_acquisition(a.get<std::string>()));
    }
    spec.algorithm = j.value("algorithm", std::string("ipp"));
    spec.replicates = j.value("replicates", 1);
    spec.seed_base = j.value("seed_base", std::uint64_t{0});
    spec.noise_base = j.value("noise_base", 1e-3);
    spec.noise_calib_samples = j.value("noise_calib_samples", 100000);
    spec.output_dir = j.value("output_dir", std::string("out"));
    if (j.contains("prior")) spec.mission.prior = prior_from_json(j.at("prior"));
    if (j.contains("mission")) {
      const auto& m = j.at("mission");
      auto& cfg = spec.mission;
      cfg.duration = m.value("duration", cfg.duration);
      cfg.speed = m.value("speed", cfg.speed);
      cfg.sample_period = m.value("sample_period", cfg.sample_period);
      if (m.contains("start_position")) {
        cfg.start_position =
            Vec2(m.at("start_position").at(0).get<double>(), m.at("start_position").at(1).get<double>());
      }
      cfg.start_heading = m.value("start_heading", cfg.start_heading);
      cfg.kappa = m.value("kappa", cfg.kappa);
      cfg.planner.lookahead = m.value("lookahead", cfg.planner.lookahead);
      cfg.planner.half_angle = m.value("half_angle", cfg.planner.half_angle);
      cfg.planner.turn_radius = m.value("turn_radius", cfg.planner.turn_radius);
      cfg.planner.n_candidates = m.value("n_candidates", cfg.planner.n_candidates);
      cfg.planner.n_path_samples = m.value("n_path_samples", cfg.planner.n_path_samples);
      cfg.quad.n = m.value("quadrature", cfg.quad.n);
      cfg.weight.kde_samples = m.value("kde_samples", cfg.weight.kde_samples);
      cfg.weight.gmm_components = m.value("gmm_components", cfg.weight.gmm_components);
      cfg.gp_restarts = m.value("gp_restarts", cfg.gp_restarts);
      cfg.refit_restarts = m.value("refit_restarts", cfg.refit_restarts);
      cfg.metric_probes = m.value("metric_probes", cfg.metric_probes);
      cfg.probe_seed = m.value("probe_seed", cfg.probe_seed);
      if (m.contains("static_mode")) {
        cfg.static_mode = parse_static_mode(m.at("static_mode").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spec: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentSpec::to_json_text() const {
  ordered_json j;
  j["name"] = name;
  j["environment"] = environment;
  j["dynamic"] = dynamic;
  ordered_json acqs = ordered_json::array();
  for (const auto a : acquisitions) acqs.push_back(to_string(a));
  j["acquisitions"] = acqs;
  j["algorithm"] = algorithm;
  j["replicates"] = replicates;
  j["seed_base"] = seed_base;
  j["noise_base"] = noise_base;
  j["noise_calib_samples"] = noise_calib_samples;
  j["output_dir"] = output_dir;
  j["prior"] = prior_to_json(mission.prior);
  ordered_json m;
  m["duration"] = mission.duration;
  m["speed"] = mission.speed;
  m["sample_period"] = mission.sample_period;
  m["start_position"] = {mission.start_position[0], mission.start_position[1]};
  m["start_heading"] = mission.start_heading;
  m["kappa"] = mission.kappa;
  m["lookahead"] = mission.planner.lookahead;
  m["half_angle"] = mission.planner.half_angle;
  m["turn_radius"] = mission.planner.turn_radius;
  m["n_candidates"] = mission.planner.n_candidates;
  m["n_path_samples"] = mission.planner.n_path_samples;
  m["quadrature"] = mission.quad.n;
  m["kde_samples"] = mission.weight.kde_samples;
  m["gmm_components"] = mission.weight.gmm_components;
  m["gp_restarts"] = mission.gp_restarts;
  m["refit_restarts"] = mission.refit_restarts;
  m["metric_probes"] = mission.metric_probes;
  m["probe_seed"] = mission.probe_seed;
  m["static_mode"] = to_string(mission.static_mode);
  j["mission"] = m;
  return j.dump(2);
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("spec: 'name' must not be empty");
  if (environment.empty()) throw ConfigError("spec: 'environment' must not be empty");
  if (acquisitions.empty()) throw ConfigError("spec: 'acquisitions' must not be empty");
  if (replicates < 1) throw ConfigError("spec: 'replicates' must be >= 1");
  if (algorithm != "ipp" && algorithm != "nbv") {
    throw ConfigError("spec: 'algorithm' must be 'ipp' or 'nbv'");
  }
  if (environment.rfind("grid:", 0) != 0) {
    make_benchmark(environment);  // throws ConfigError for unknown names
  }
  mission.validate();
}

Environment ExperimentSpec::build_environment(const std::string& data_dir) const {
  Environment env;
  if (environment.rfind("grid:", 0) == 0) {
    std::string path = environment.substr(5);
    if (!fs::path(path).is_absolute() && !fs::exists(path)) {
      const fs::path joined = fs::path(data_dir) / path;
      if (fs::exists(joined)) path = joined.string();
    }
    env = make_grid_env(path);
  } else {
    env = make_benchmark(environment);
  }
  if (dynamic) env = make_dynamic(std::move(env));
  Rng calib_rng(splitmix64(seed_base ^ 0xCA11B));
  env.noise_variance = calibrate_noise(env, noise_base, noise_calib_samples, calib_rng,
                                       mission.duration > 0 ? mission.duration : 15.0);
  return env;
}

std::string apply_spec_overrides(const std::string& json_text,
                                 const std::vector<std::string>& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("spec: not valid JSON: ") + e.what());
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + ov + "' must look like key=value");
    const std::string path = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    json* node = &j;
    size_t start = 0;
    for (;;) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
      if (key.empty()) throw ConfigError("override '" + ov + "' has an empty path segment");
      if (dot == std::string::npos) {
        json parsed = json::parse(value, nullptr, false);
        (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
  return j.dump();
}

// ---------------------------------------------------------------------------

namespace {

struct MissionJob {
  const ExperimentSpec* spec;
  const Environment* env;
  const ProbeSet* probes;
  AcquisitionKind acquisition;
  int replicate;
  fs::path trace_path;
};

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  }
  return s;
}

}  // namespace

RunReport run_experiments(const std::vector<ExperimentSpec>& specs, const std::string& output_root,
                          int jobs, std::ostream& log, const std::string& data_dir) {
  RunReport report;
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  fs::create_directories(output_root);

  // Environments and probe sets are shared read-only across jobs.
  std::vector<Environment> envs(specs.size());
  std::vector<ProbeSet> probes(specs.size());
  for (size_t s = 0; s < specs.size(); ++s) {
    specs[s].validate();
    envs[s] = specs[s].build_environment(data_dir);
    Rng probe_rng(specs[s].mission.probe_seed);
    probes[s] = ProbeSet::make(specs[s].mission.metric_probes, probe_rng);
  }

  std::vector<MissionJob> jobs_list;
  for (size_t s = 0; s < specs.size(); ++s) {
    for (const auto acq : specs[s].acquisitions) {
      for (int r = 0; r < specs[s].replicates; ++r) {
        MissionJob job;
        job.spec = &specs[s];
        job.env = &envs[s];
        job.probes = &probes[s];
        job.acquisition = acq;
        job.replicate = r;
        job.trace_path = fs::path(output_root) / ("trace_" + sanitize(specs[s].name) + "_" +
                                                  sanitize(to_string(acq)) + "_r" +
                                                  std::to_string(r) + ".jsonl");
        jobs_list.push_back(std::move(job));
      }
    }
  }

  std::atomic<size_t> next{0};
  std::mutex log_mutex;
  std::vector<std::string> errors;

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs_list.size()) return;
      const MissionJob& job = jobs_list[i];
      try {
        MissionConfig cfg = job.spec->mission;
        cfg.acquisition = job.acquisition;
        cfg.seed = job.spec->seed_base + static_cast<std::uint64_t>(job.replicate);
        const MissionResult res = job.spec->algorithm == "nbv"
                                      ? run_next_best_view(*job.env, cfg, job.probes)
                                      : run_mission(*job.env, cfg, job.probes);
        std::ofstream out(job.trace_path);
        write_trace(out, res.trace);
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "done " << job.trace_path.filename().string() << " (" << res.trace.size()
            << " epochs)\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(log_mutex);
        errors.push_back(job.trace_path.filename().string() + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Aggregate per (spec, acquisition) from the trace files just written.
  for (size_t s = 0; s < specs.size(); ++s) {
    for (const auto acq : specs[s].acquisitions) {
      std::vector<std::vector<MetricSnapshot>> reps;
      for (int r = 0; r < specs[s].replicates; ++r) {
        const fs::path path = fs::path(output_root) / ("trace_" + sanitize(specs[s].name) + "_" +
                                                       sanitize(to_string(acq)) + "_r" +
                                                       std::to_string(r) + ".jsonl");
        if (!fs::exists(path)) continue;  // failed replicate: keep partial artifacts
        std::ifstream in(path);
        reps.push_back(trace_metrics(read_trace(in)));
        report.artifacts.push_back(fs::relative(path, output_root).string());
      }
      if (reps.size() >= 2) {
        const fs::path csv_path = fs::path(output_root) / ("aggregate_" + sanitize(specs[s].name) +
                                                           "_" + sanitize(to_string(acq)) + ".csv");
        std::ofstream out(csv_path);
        write_aggregate_csv(out, aggregate(reps));
        report.artifacts.push_back(fs::relative(csv_path, output_root).string());
      }
    }
  }

  // Manifest: config echo plus content hashes; identical manifests imply
  // identical artifact bytes.
  std::sort(report.artifacts.begin(), report.artifacts.end());
  ordered_json manifest;
  ordered_json spec_list = ordered_json::array();
  for (const auto& s : specs) spec_list.push_back(ordered_json::parse(s.to_json_text()));
  manifest["specs"] = spec_list;
  ordered_json hashes;
  for (const auto& rel : report.artifacts) {
    hashes[rel] = sha256_file((fs::path(output_root) / rel).string());
  }
  manifest["artifacts"] = hashes;
  const fs::path manifest_path = fs::path(output_root) / "manifest.json";
  {
    std::ofstream out(manifest_path);
    out << manifest.dump(2) << "\n";
  }
  report.manifest_path = manifest_path.string();

  report.errors = errors;
  if (!errors.empty()) {
    for (const auto& e : errors) log << "mission failed: " << e << "\n";
    report.exit_code = 1;
  }
  return report;
}

std::vector<ExperimentSpec> bench_suite(const std::string& suite, int replicates,
                                        const std::string& data_dir) {
  auto base_spec = [&](const std::string& env_name) {
    ExperimentSpec spec;
    spec.name = env_name;
    spec.environment = env_name;
    spec.replicates = replicates;
    spec.seed_base = 1000;
    spec.noise_base = 1e-3;
    spec.mission = MissionConfig{};  // paper parameters are the defaults
    return spec;
  };
  const std::vector<std::string> static_envs = {"ackley", "bird", "bukin06", "michalewicz",
                                                "mod_rosenbrock"};
  std::vector<ExperimentSpec> specs;
  if (suite == "static-uniform") {
    for (const auto& env : static_envs) {
      ExperimentSpec s = base_spec(env);
      s.acquisitions = {AcquisitionKind::US, AcquisitionKind::USLW, AcquisitionKind::IVR,
                        AcquisitionKind::IVRLW};
      specs.push_back(std::move(s));
    }
  } else if (suite == "static-gaussian") {
    for (const auto& env : static_envs) {
      ExperimentSpec s = base_spec(env);
      s.acquisitions = {AcquisitionKind::USIW, AcquisitionKind::USLW, AcquisitionKind::IVRIW,
                        AcquisitionKind::IVRLW};
      s.mission.prior = InputPrior::gaussian(Vec2(0.5, 0.5), 0.01 * Eigen::Matrix2d::Identity());
      specs.push_back(std::move(s));
    }
  } else if (suite == "dynamic-adversarial") {
    for (const std::string env : {"ackley", "michalewicz"}) {
      ExperimentSpec s = base_spec(env);
      s.name = env + "-dynamic";
      s.dynamic = true;
      s.acquisitions = {AcquisitionKind::USIW, AcquisitionKind::USLW, AcquisitionKind::IVRIW,
                        AcquisitionKind::IVRLW};
      s.mission.prior = InputPrior::gaussian(Vec2(0.25, 0.75), 0.01 * Eigen::Matrix2d::Identity());
      specs.push_back(std::move(s));
    }
  } else if (suite == "grid") {
    ExperimentSpec s = base_spec("grid:trench.asc");
    s.name = "trench";
    s.environment = "grid:" + (std::filesystem::path(data_dir) / "trench.asc").string();
    s.noise_base = 0.0;
    s.acquisitions = {AcquisitionKind::US, AcquisitionKind::USLW, AcquisitionKind::IVR,
                      AcquisitionKind::IVRLW};
    specs.push_back(std::move(s));
  } else {
    throw ConfigError("unknown bench suite: " + suite +
                      " (expected static-uniform, static-gaussian, dynamic-adversarial, grid)");
  }
  return specs;
}

}  // namespace scout
