#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "resform/report.hpp"

namespace resform {

// Exit-code taxonomy for the CLI: configuration problems are reported before
// any simulation starts.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;  // btm | lbm | rcm_tree | rcm_fractal | homogenize | diagnostics
  std::string scheme = "gasket";
  std::vector<int> levels = {2, 3, 4};
  double alpha = 0.5;
  double kappa = 0.0;
  std::vector<double> time_grid = {0.25, 0.5, 1.0};
  int replicas = 10000;
  int samples = 200;         // homogenize sample count
  std::uint64_t seed = 1;
  std::string law = "pareto";  // conductance family for rcm: pareto | constant | lognormal
  double law_value = 1.0;      // constant value / lognormal sigma
  std::string walks = "both";  // rcm: both | vsrw | csrw
  std::uint64_t max_events = 30'000'000;  // per-replica event cap, truncations reported
  std::string output_dir = "out";

  void validate() const;  // throws ConfigError
  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

// Time rescaling for the shipped experiments. The exponents are the published
// per-level constants a_n = a1^n, b_n = b1^n; walk/clock prefactors (the tree
// factor rho = E[w^{-1}] and the trap-clock constant) are estimated from the
// configured law at run time, never hard-coded.
struct ScalingRule {
  double a1 = 1.0;
  double b1 = 1.0;
  double alpha = 0.5;
  double walk_prefactor = 1.0;   // rho for tree VSRW, 1 otherwise
  double clock_prefactor = 1.0;  // 2*rho for tree CSRW, 1 otherwise

  double vsrw_time(int level, double t) const;        // prefactor * t / (a_n b_n)
  double csrw_time(int level, double t) const;        // prefactor * t / (a_n b_n^{1/alpha})
  double trap_clock_time(int level, double t) const;  // t / (a_n b_n^{1/alpha})
};

Report run_btm(const ExperimentConfig& config);
Report run_lbm(const ExperimentConfig& config);
Report run_rcm(const ExperimentConfig& config);
Report run_homogenize_experiment(const ExperimentConfig& config);
Report run_diagnostics(const ExperimentConfig& config);

// Dispatch on config.experiment.
Report run_experiment(const ExperimentConfig& config);

}  // namespace resform
