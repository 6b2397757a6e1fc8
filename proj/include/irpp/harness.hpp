#pragma once
// Experiment presets, config plumbing, the metric-collecting runner, and the
// command-line entry point.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "irpp/digraph.hpp"
#include "irpp/engine.hpp"
#include "irpp/metrics.hpp"
#include "irpp/problems.hpp"

namespace irpp {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ExperimentConfig {
  std::string name;               // preset / problem family
  std::string topology = "ring";  // ring | line | star | random
  std::string mixing = "neighbor";  // neighbor rule | laplacian rule
  Schedule schedule;  // theta <= 0 means "derive 0.5 u^T v / m at run time"
  long iterations = 1000;
  long stride = 1;
  std::uint64_t seed = 1;
  std::string output;  // CSV path; empty derives "irpp-<name>.csv"
  double baseline_lambda = 0.1;  // fixed-regularization comparison run
  double baseline_gamma = 0.0;   // fixed step; <= 0 falls back to gamma0
  double epsilon = 0.05;         // exponent offset used by the presets
  double svm_eta = 0.05;         // margin weight for the svm instance
  double oracle_tol = 1e-5;
};

// Known names: sensor, deblur, svm, constrained-qp, least-norm.
ExperimentConfig preset(const std::string& name);

// JSON config: {"preset": <name>, ...overrides}. Throws on missing file or
// invalid fields; nothing is written in that case.
ExperimentConfig load_config(const std::string& path);

struct ExperimentSetup {
  ProblemInstance problem;
  Digraph graph;
  MixingPair mix;
  std::optional<Matrix> X0;  // instance-specific start (defaults to zero)
};

ExperimentSetup materialize(const ExperimentConfig& cfg);

// Assumption checks for the configured graph and mixing matrices.
ValidationReport validate_experiment(const ExperimentConfig& cfg);

std::string default_output_path(const ExperimentConfig& cfg);
std::string baseline_output_path(const ExperimentConfig& cfg);

// Runs the schedule-driven method, writes the CSV, returns the metric rows.
std::vector<MetricRow> run_experiment(const ExperimentConfig& cfg,
                                      std::ostream& log);

// Fixed lambda / fixed step baseline on the same instance; CSV goes next to
// the main output with a "-fixed" suffix.
std::vector<MetricRow> run_fixed_baseline(const ExperimentConfig& cfg,
                                          std::ostream& log);

// run | validate | oracle | compare. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace irpp
