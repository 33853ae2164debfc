#pragma once

// Runs a configured experiment and persists its artifacts together with a
// run record listing their SHA-256 digests.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "collusion/io/config.hpp"

namespace collusion::io {

inline constexpr const char* kEngineVersion = "1.0.0";

struct ArtifactDigest {
  std::string file;  // relative to the run directory
  std::string sha256;
};

struct RunRecord {
  std::filesystem::path directory;
  std::vector<ArtifactDigest> artifacts;  // sorted by file name, run.record excluded
  double wall_seconds = 0.0;
  int exit_code = 0;  // 1 when validation found violations
};

// Dispatches on config.command, writing artifacts into a fresh
// <output_dir>/<command>-<UTC timestamp> directory. Human-readable lines go
// to `log`. Throws ValidationError for bad inputs and other errors for
// failures while running.
RunRecord run_experiment(const ExperimentConfig& config, std::ostream& log);

// 0 success, 1 validation error, 2 runtime error.
int exit_code_for(const std::exception& error);

}  // namespace collusion::io
