#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scout/mission.hpp"

namespace scout {

//! One experiment: an environment explored by a list of acquisitions over a
//! number of seeded replicates.  Serialized as a JSON document (see
//! docs/experiment-spec.md).
struct ExperimentSpec {
  std::string name;             // artifact file prefix
  std::string environment;      // benchmark name, or "grid:<path>"
  bool dynamic = false;
  std::vector<AcquisitionKind> acquisitions;
  std::string algorithm = "ipp";  // "ipp" | "nbv"
  MissionConfig mission;          // template; per-run seed/acquisition filled in
  int replicates = 1;
  std::uint64_t seed_base = 0;
  double noise_base = 1e-3;       // scaled by the field variance
  int noise_calib_samples = 100000;
  std::string output_dir = "out";

  static ExperimentSpec from_json_text(const std::string& text);
  static ExperimentSpec from_file(const std::string& path);
  std::string to_json_text() const;

  //! Throws ConfigError naming the offending field.
  void validate() const;

  //! Environment with calibrated noise; deterministic per spec.
  Environment build_environment(const std::string& data_dir = ".") const;
};

//! Dotted-path scalar override, e.g. "mission.duration=7.5" or
//! "replicates=10".  Applied to the JSON document before parsing.
std::string apply_spec_overrides(const std::string& json_text,
                                 const std::vector<std::string>& overrides);

struct RunReport {
  int exit_code = 0;          // 0 ok, 1 mission failure (partial artifacts kept)
  std::vector<std::string> artifacts;  // relative to output_root
  std::string manifest_path;
  std::vector<std::string> errors;
};

//! Runs every (spec, acquisition, replicate) mission, writing one trace file
//! per mission, one aggregate CSV per (spec, acquisition), and a manifest
//! with content hashes.  Replicates run in parallel up to `jobs` threads.
RunReport run_experiments(const std::vector<ExperimentSpec>& specs, const std::string& output_root,
                          int jobs, std::ostream& log, const std::string& data_dir = ".");

//! The prefilled experiment matrices behind `scout bench`:
//! static-uniform, static-gaussian, dynamic-adversarial, grid.
std::vector<ExperimentSpec> bench_suite(const std::string& suite, int replicates,
                                        const std::string& data_dir = "data");

}  // namespace scout
