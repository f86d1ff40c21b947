#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwlab/regen.hpp"

namespace gwlab {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_statistical = 2,
  exit_capacity = 3,
};

// Everything a command needs; identical configs produce byte-identical
// report bodies.
struct ExperimentConfig {
  std::string dist_spec = "const:1";
  std::vector<double> betas;  // bounds accepts several
  double beta = 0;
  double eps = 0;
  int d = 1;
  std::int64_t steps = 0;
  std::int64_t segments = 0;
  std::int64_t trials = 0;
  int replicas = 4;
  std::uint64_t seed = 1;
  RegenMode mode = RegenMode::strict;
  int margin = 0;  // 0 = default rule
  int max_len = 16;
  std::string out;            // report base path; default "<command>_report"
  std::string format = "both";  // csv | json | both
};

int cmd_bounds(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_monotonicity(const ExperimentConfig& cfg);
int cmd_lemmas(const ExperimentConfig& cfg);
int cmd_rate(const ExperimentConfig& cfg);
int cmd_enumerate(const ExperimentConfig& cfg);

// Report base path for a command under this config.
std::string report_base(const ExperimentConfig& cfg, const std::string& command);

}  // namespace gwlab
