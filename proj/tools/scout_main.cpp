#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "scout/experiment.hpp"
#include "scout/validate.hpp"

namespace {

//! SCOUT_OUTPUT_ROOT prefixes every relative output directory.
std::string resolve_output(const std::string& dir) {
  const char* root = std::getenv("SCOUT_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0' || std::filesystem::path(dir).is_absolute()) return dir;
  return (std::filesystem::path(root) / dir).string();
}

int cmd_run(const std::string& spec_path, const std::vector<std::string>& overrides, int jobs,
            const std::string& output_override, const std::string& data_dir) {
  scout::ExperimentSpec spec;
  try {
    std::ifstream in(spec_path);
    if (!in) throw scout::ConfigError("spec: cannot open " + spec_path);
    std::stringstream ss;
    ss << in.rdbuf();
    spec = scout::ExperimentSpec::from_json_text(
        scout::apply_spec_overrides(ss.str(), overrides));
  } catch (const scout::ConfigError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return 2;
  }
  const std::string out_dir = resolve_output(output_override.empty() ? spec.output_dir : output_override);
  try {
    const scout::RunReport report =
        scout::run_experiments({spec}, out_dir, jobs, std::cout, data_dir);
    std::cout << "manifest: " << report.manifest_path << "\n";
    return report.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << "\n";
    return 1;
  }
}

int cmd_bench(const std::string& suite, int replicates, int jobs, const std::string& output_dir,
              const std::string& data_dir) {
  std::vector<scout::ExperimentSpec> specs;
  try {
    specs = scout::bench_suite(suite, replicates, data_dir);
  } catch (const scout::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const std::string out_dir =
      resolve_output((std::filesystem::path(output_dir) / suite).string());
  try {
    const scout::RunReport report =
        scout::run_experiments(specs, out_dir, jobs, std::cout, data_dir);
    std::cout << "manifest: " << report.manifest_path << "\n";
    return report.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "bench aborted: " << e.what() << "\n";
    return 1;
  }
}

int cmd_validate() {
  const auto results = scout::validate::run_all();
  std::printf("%-32s %-6s %9s  %s\n", "check", "status", "seconds", "detail");
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("%-32s %-6s %9.2f  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds,
                r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  if (!all_ok) {
    std::printf("validation FAILED\n");
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scout: likelihood-weighted Bayesian-optimization exploration missions"};
  app.require_subcommand(1);

  std::string spec_path, output_dir, suite;
  std::string data_dir = "data";
  std::vector<std::string> overrides;
  int jobs = 0;
  int replicates = -1;

  auto* run = app.add_subcommand("run", "run an experiment spec file");
  run->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  run->add_option("--jobs,-j", jobs, "parallel missions (default: cores)");
  run->add_option("--output,-o", output_dir, "output directory (overrides the spec)");
  run->add_option("--data-dir", data_dir, "directory for bundled lattice fixtures");
  run->add_option("--set", overrides, "override a scalar spec field, e.g. mission.duration=7.5");
  run->add_option("--replicates,-r", replicates, "override the replicate count");

  auto* bench = app.add_subcommand("bench", "run a prefilled benchmark suite");
  bench
      ->add_option("suite", suite,
                   "one of: static-uniform, static-gaussian, dynamic-adversarial, grid")
      ->required();
  bench->add_option("--replicates,-r", replicates, "replicates per configuration (default 50)");
  bench->add_option("--jobs,-j", jobs, "parallel missions (default: cores)");
  bench->add_option("--output,-o", output_dir, "output root (default: out)");
  bench->add_option("--data-dir", data_dir, "directory holding trench.asc");

  auto* validate = app.add_subcommand("validate", "run the fast oracle checks");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (replicates > 0) overrides.push_back("replicates=" + std::to_string(replicates));
    return cmd_run(spec_path, overrides, jobs, output_dir, data_dir);
  }
  if (bench->parsed()) {
    return cmd_bench(suite, replicates > 0 ? replicates : 50, jobs,
                     output_dir.empty() ? "out" : output_dir, data_dir);
  }
  if (validate->parsed()) {
    return cmd_validate();
  }
  return 2;
}
