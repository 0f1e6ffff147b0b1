#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ppqme/config.hpp"
#include "ppqme/polaron.hpp"
#include "ppqme/propagator.hpp"

namespace ppqme::run {

// simulate: frame -> tables -> kernel integrals -> inhomogeneous terms ->
// propagation -> trajectory CSV + run JSON.  Deterministic: identical configs
// produce byte-identical artifacts.
struct SimulateArtifacts {
  std::string csv_path;
  std::string json_path;
  Trajectory trajectory;
  PolaronFrame frame;
};
SimulateArtifacts simulate(const RunConfig& cfg, const std::string& out_dir);

// sweep: one run per parameter value (parameter is "omega_h" or "alpha"),
// plus a summary CSV (value, status, coherence metric, long-time P_1).
// Per-point failures are isolated and marked in the summary.
struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  double metric = 0.0;
  double p1_long_time = 0.0;
  std::string csv_path;
};
struct SweepResult {
  std::vector<SweepPoint> points;
  std::string summary_path;
};
SweepResult sweep(const RunConfig& base, const std::string& parameter,
                  const std::vector<double>& values, const std::string& out_dir);

// dump-correlations: tabulate K, M, C, f, h on the run grid and write one CSV
// (no propagation).  Returns the CSV path.
std::string dump_correlations(const RunConfig& cfg, const std::string& out_dir);

// validate: self-contained invariant suite (limits, symmetries, reference
// comparisons, two-state vs general assembly) with pass/fail per check.
// corrupt_w is a negative-control hook: it perturbs the Debye-Waller factor
// fed to the consistency check, which must then fail.
struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass = true;
};
ValidationReport validate(bool corrupt_w = false);
void print_report(const ValidationReport& report, std::ostream& os);

}  // namespace ppqme::run
