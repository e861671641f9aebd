#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bornlab/potentials.hpp"

namespace bornlab::cli {

// Flat key=value configuration with dotted section prefixes. Unknown keys
// are rejected; cross-field constraints (Nyquist, support) checked at load.
struct ExperimentConfig {
  potentials::PotentialSpec potential;
  int grid_points = 256;
  double grid_extent = 8.0;

  int sweep_k_count = 48;
  int sweep_theta_count = 64;
  double sweep_k_margin = 0.8;  // fraction of Nyquist used for max k

  std::string cutoff_policy = "theoretical";  // or "override"
  double cutoff_c0 = 2.0;                     // used when policy = override
  double alpha = 0.0;

  double shell_base = 1.0;
  int fit_window_lo = -1;  // -1: default window
  int fit_window_hi = -1;

  uint64_t seed = 1;
  std::string out_dir = "out";

  std::string serialize() const;
  uint64_t hash() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Exit codes: 0 pass, 1 computational failure, 2 input error,
// 3 inconclusive.
int run(int argc, const char* const* argv);

}  // namespace bornlab::cli
