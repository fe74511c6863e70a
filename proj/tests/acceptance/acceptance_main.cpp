// Acceptance runner: executes every acceptance criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.  Exit code 0 only
// when everything passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "scout/experiment.hpp"
#include "scout/sha256.hpp"
#include "scout/validate.hpp"

namespace fs = std::filesystem;
using namespace scout;

namespace {

std::string g_data_dir = "data";
std::string g_cli_path;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome from_check(const validate::CheckResult& r) {
  return Outcome{r.passed, r.detail};
}

// ---------------------------------------------------------------------------
// Desk-scale experiment helpers (criteria 7, 8, 11).
// ---------------------------------------------------------------------------

struct DeskTrace {
  AcquisitionKind kind;
  int replicate = 0;
  std::vector<EpochSnapshot> trace;
};

std::vector<DeskTrace>& produced_traces() {
  static std::vector<DeskTrace> traces;
  return traces;
}

std::vector<DeskTrace> run_desk_experiment(const ExperimentSpec& spec) {
  const Environment env = spec.build_environment(g_data_dir);
  Rng probe_rng(spec.mission.probe_seed);
  const ProbeSet probes = ProbeSet::make(spec.mission.metric_probes, probe_rng);

  struct Job {
    AcquisitionKind kind;
    int replicate;
  };
  std::vector<Job> jobs;
  for (const auto kind : spec.acquisitions) {
    for (int r = 0; r < spec.replicates; ++r) jobs.push_back({kind, r});
  }
  std::vector<DeskTrace> results(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      MissionConfig cfg = spec.mission;
      cfg.acquisition = jobs[i].kind;
      cfg.seed = spec.seed_base + static_cast<std::uint64_t>(jobs[i].replicate);
      MissionResult res = run_mission(env, cfg, &probes);
      results[i] = DeskTrace{jobs[i].kind, jobs[i].replicate, std::move(res.trace)};
    }
  };
  const int n_threads = std::max(2u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& r : results) produced_traces().push_back(r);
  return results;
}

double metric_value(const MetricSnapshot& m, int idx) {
  switch (idx) {
    case 0: return m.rmse;
    case 1: return m.pdfe;
    case 2: return m.dist_to_min;
    default: return m.regret;
  }
}

//! Median across replicates of the final cumulative minimum of one metric.
double median_final_cummin(const std::vector<DeskTrace>& runs, AcquisitionKind kind, int metric) {
  std::vector<double> finals;
  for (const auto& r : runs) {
    if (r.kind != kind) continue;
    double acc = std::numeric_limits<double>::infinity();
    for (const auto& s : r.trace) acc = std::min(acc, metric_value(s.metrics, metric));
    finals.push_back(acc);
  }
  return median(finals);
}

ExperimentSpec desk_michalewicz(std::vector<AcquisitionKind> acqs) {
  ExperimentSpec spec;
  spec.name = "michalewicz-desk";
  spec.environment = "michalewicz";
  spec.acquisitions = std::move(acqs);
  spec.replicates = 10;
  spec.seed_base = 4100;
  spec.mission = MissionConfig{};  // paper defaults: T=15, ts=1/15, L, alpha, R, n_GMM
  return spec;
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

Outcome criterion_gp_dense_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  auto res = from_check(validate::check_gp_dense_oracle());
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt >= 10.0) {
    res.passed = false;
    res.detail += " [exceeded 10 s budget]";
  }
  return res;
}

Outcome criterion_mle_gradient() { return from_check(validate::check_mle_gradient()); }

Outcome criterion_ivr_lw_analytic() {
  const auto t0 = std::chrono::steady_clock::now();
  auto res = from_check(validate::check_ivr_lw_analytic());
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt >= 30.0) {
    res.passed = false;
    res.detail += " [exceeded 30 s budget]";
  }
  return res;
}

Outcome criterion_exploration_limit() { return from_check(validate::check_exploration_limit_argmax()); }

Outcome criterion_dubins() { return from_check(validate::check_dubins_brute_force(200)); }

Outcome criterion_transcription() { return from_check(validate::check_benchmark_transcription()); }

Outcome criterion_desk_uniform() {
  ExperimentSpec spec = desk_michalewicz({AcquisitionKind::US, AcquisitionKind::USLW,
                                          AcquisitionKind::IVR, AcquisitionKind::IVRLW});
  const auto runs = run_desk_experiment(spec);
  const double l_ivr = median_final_cummin(runs, AcquisitionKind::IVR, 2);
  const double l_ivrlw = median_final_cummin(runs, AcquisitionKind::IVRLW, 2);
  const double l_us = median_final_cummin(runs, AcquisitionKind::US, 2);
  const double l_uslw = median_final_cummin(runs, AcquisitionKind::USLW, 2);
  const double p_ivr = median_final_cummin(runs, AcquisitionKind::IVR, 1);
  const double p_ivrlw = median_final_cummin(runs, AcquisitionKind::IVRLW, 1);
  const double p_us = median_final_cummin(runs, AcquisitionKind::US, 1);
  const double p_uslw = median_final_cummin(runs, AcquisitionKind::USLW, 1);

  std::ostringstream os;
  os.precision(4);
  os << "l: IVR-LW " << l_ivrlw << " vs IVR " << l_ivr << ", US-LW " << l_uslw << " vs US " << l_us
     << "; pdfe: IVR-LW " << p_ivrlw << " vs IVR " << p_ivr << ", US-LW " << p_uslw << " vs US "
     << p_us;
  const bool ok = l_ivrlw <= l_ivr && l_uslw <= l_us && p_ivrlw <= p_ivr && p_uslw <= p_us;
  return Outcome{ok, os.str()};
}

Outcome criterion_desk_adversarial() {
  // static Michalewicz with a centered (poor) prior
  ExperimentSpec stat = desk_michalewicz({AcquisitionKind::IVRIW, AcquisitionKind::IVRLW});
  stat.mission.prior = InputPrior::gaussian(Vec2(0.5, 0.5), 0.01 * Eigen::Matrix2d::Identity());
  const auto stat_runs = run_desk_experiment(stat);
  const double stat_iw = median_final_cummin(stat_runs, AcquisitionKind::IVRIW, 2);
  const double stat_lw = median_final_cummin(stat_runs, AcquisitionKind::IVRLW, 2);

  // dynamic Michalewicz with the strongly adversarial prior
  ExperimentSpec dyn = desk_michalewicz({AcquisitionKind::IVRIW, AcquisitionKind::IVRLW});
  dyn.name = "michalewicz-dynamic-desk";
  dyn.dynamic = true;
  dyn.mission.prior = InputPrior::gaussian(Vec2(0.25, 0.75), 0.01 * Eigen::Matrix2d::Identity());
  const auto dyn_runs = run_desk_experiment(dyn);
  const double dyn_iw = median_final_cummin(dyn_runs, AcquisitionKind::IVRIW, 2);
  const double dyn_lw = median_final_cummin(dyn_runs, AcquisitionKind::IVRLW, 2);

  std::ostringstream os;
  os.precision(4);
  os << "static l: IVR-LW " << stat_lw << " vs IVR-IW " << stat_iw << "; dynamic l: IVR-LW "
     << dyn_lw << " vs IVR-IW " << dyn_iw;
  return Outcome{stat_lw < stat_iw && dyn_lw < dyn_iw, os.str()};
}

Outcome criterion_determinism() {
  if (g_cli_path.empty() || !fs::exists(g_cli_path)) {
    return Outcome{false, "scout CLI binary not found (pass --scout-cli)"};
  }
  const fs::path out1 = fs::temp_directory_path() / "scout_accept_det1";
  const fs::path out2 = fs::temp_directory_path() / "scout_accept_det2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  for (const auto& out : {out1, out2}) {
    const std::string cmd = g_cli_path + " bench static-uniform --replicates 2 --output " +
                            out.string() + " --data-dir " + g_data_dir + " > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return Outcome{false, "bench static-uniform exited with " + std::to_string(rc)};
  }
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out1)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), out1);
    const fs::path other = out2 / rel;
    if (!fs::exists(other)) return Outcome{false, "missing artifact " + rel.string()};
    if (sha256_file(entry.path().string()) != sha256_file(other.string())) {
      return Outcome{false, "artifact differs across runs: " + rel.string()};
    }
    ++compared;
  }
  return Outcome{compared > 0, std::to_string(compared) + " artifacts byte-identical across runs"};
}

Outcome criterion_metric_properties() {
  // (a) cumulative-min series nonincreasing in every produced trace
  int traces_checked = 0;
  for (const auto& t : produced_traces()) {
    for (int metric = 0; metric < 4; ++metric) {
      double acc = std::numeric_limits<double>::infinity();
      double prev = acc;
      for (const auto& s : t.trace) {
        acc = std::min(acc, metric_value(s.metrics, metric));
        if (acc > prev + 1e-15) return Outcome{false, "cumulative minimum increased"};
        prev = acc;
      }
    }
    ++traces_checked;
  }
  if (traces_checked == 0) return Outcome{false, "no traces produced by earlier criteria"};

  // (b) shifted-normal pdfe within 10% of the closed form
  Rng rng(71);
  const double delta = 1.0;
  Eigen::VectorXd f(100000), mu(100000);
  for (int i = 0; i < f.size(); ++i) {
    f[i] = rng.normal();
    mu[i] = f[i] + delta;
  }
  const PdfeResult res = pdfe_from_samples(f, mu);
  const double c = delta / 2;
  const double closed = delta * 0.5 * (square(res.y_hi - c) + square(c - res.y_lo));
  const double rel = std::abs(res.value - closed) / closed;
  if (rel > 0.10) {
    return Outcome{false, "pdfe off the shifted-normal closed form by " + std::to_string(rel)};
  }

  // (c) perfect surrogate zeroes the metrics
  Rng mrng(72);
  Dataset d = Dataset::empty(2);
  for (int i = 0; i < 20; ++i) d.append(Vec2(mrng.uniform(), mrng.uniform()), mrng.normal());
  KernelParams p;
  p.signal_variance = 1.0;
  p.lengthscales = Eigen::VectorXd::Constant(2, 0.25);
  p.noise_variance = 1e-3;
  GpModel m(p, d);
  EnvDescriptor desc;
  desc.name = "surrogate-mean";
  Environment env(desc, [&m](const Vec2& z) { return m.posterior_mean(z); });
  Rng prng(73);
  ProbeSet probes = ProbeSet::make(20000, prng);
  const MetricSnapshot s = compute_metrics(env, m, 0.0, probes);
  if (!(s.rmse <= 1e-12 && s.pdfe <= 1e-9 && s.dist_to_min == 0.0 && s.regret == 0.0)) {
    return Outcome{false, "perfect-surrogate metrics not zero"};
  }

  std::ostringstream os;
  os << traces_checked << " traces monotone; pdfe closed-form error " << rel
     << "; perfect-surrogate metrics zero";
  return Outcome{true, os.str()};
}

Outcome criterion_grid_trench() {
  ExperimentSpec spec;
  spec.name = "trench-desk";
  spec.environment = "grid:" + (fs::path(g_data_dir) / "trench.asc").string();
  spec.acquisitions = {AcquisitionKind::IVRLW};
  spec.replicates = 10;
  spec.seed_base = 8200;
  spec.noise_base = 0.0;
  spec.mission = MissionConfig{};
  const auto runs = run_desk_experiment(spec);
  int hits = 0;
  std::ostringstream os;
  os.precision(3);
  os << "final cum-min l per replicate:";
  for (const auto& r : runs) {
    double acc = std::numeric_limits<double>::infinity();
    for (const auto& s : r.trace) acc = std::min(acc, s.metrics.dist_to_min);
    hits += acc < 0.05 ? 1 : 0;
    os << " " << acc;
  }
  os << " -> " << hits << "/10 below 0.05";
  return Outcome{hits >= 7, os.str()};
}

struct Criterion {
  int id;
  std::string name;
  double budget_minutes;  // 0 = no budget
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--data-dir" && i + 1 < argc) g_data_dir = argv[++i];
    else if (arg == "--scout-cli" && i + 1 < argc) g_cli_path = argv[++i];
    else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "gp-dense-oracle", 10.0 / 60, criterion_gp_dense_oracle},
      {2, "mle-gradient-fd", 0, criterion_mle_gradient},
      {3, "ivr-lw-analytic-vs-quadrature", 0.5, criterion_ivr_lw_analytic},
      {4, "exploration-limit-argmax", 0, criterion_exploration_limit},
      {5, "dubins-brute-force", 0, criterion_dubins},
      {6, "benchmark-transcription", 0, criterion_transcription},
      {7, "desk-scale-uniform-prior", 30.0, criterion_desk_uniform},
      {8, "desk-scale-adversarial-prior", 45.0, criterion_desk_adversarial},
      {9, "mission-determinism", 0, criterion_determinism},
      {10, "metric-properties", 0, criterion_metric_properties},
      {11, "grid-trench-localization", 0, criterion_grid_trench},
  };

  bool all_ok = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    bool ok = out.passed;
    std::string budget_note;
    if (c.budget_minutes > 0 && minutes > c.budget_minutes) {
      ok = false;
      budget_note = " [over the " + std::to_string(c.budget_minutes) + " min budget]";
    }
    std::printf("[%s] %02d %-32s (%6.1f min) %s%s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                minutes, out.detail.c_str(), budget_note.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  std::printf(all_ok ? "ACCEPTANCE: all criteria passed\n" : "ACCEPTANCE: FAILURES present\n");
  return all_ok ? 0 : 1;
}
