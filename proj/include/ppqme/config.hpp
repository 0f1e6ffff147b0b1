#pragma once

#include <string>

#include <Eigen/Dense>

#include "ppqme/bath.hpp"
#include "ppqme/correlations.hpp"
#include "ppqme/polaron.hpp"

namespace ppqme {

// Fully validated run description.  Every physical quantity carries its unit
// in the config key name (energies_cm1, t_max_fs, temperature_K, ...); site
// indices in the file are 1-based.  Parsing throws ConfigError naming the
// offending key and the reason; no computation happens before validation.
struct RunConfig {
  SiteHamiltonian system;
  SpectralDensityModel bath = SpectralDensityModel::ohmic_exponential(1, 1.0, 1.0);
  WeightingFunction weighting;

  double temperature_K = 300.0;
  double t_max_fs = 0.0;
  double dt_fs = 0.0;
  int inhom_order = 1;  // 0: none, 1: first order, 2: adds the quadratic term
  int stride = 10;
  Eigen::MatrixXcd initial;  // site-basis density matrix at t = 0

  std::string csv_path;   // empty: subcommand default
  std::string json_path;  // empty: derived from csv_path

  bool allow_divergent_alpha = false;  // set by the CLI flag, not the file

  std::string echo;  // canonical JSON echo of the parsed config

  TimeGrid grid() const;
  QuadratureScheme quadrature() const;  // defaults with t_max folded in
};

// Parse + validate a JSON config document / file.
RunConfig parse_config_text(const std::string& text, bool allow_divergent_alpha = false);
RunConfig parse_config_file(const std::string& path, bool allow_divergent_alpha = false);

}  // namespace ppqme
