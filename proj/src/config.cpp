#include "ppqme/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ppqme/errors.hpp"

namespace ppqme {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing required key");
  return *it;
}

double number_at(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_number()) fail(join(path, key), "must be a number");
  return v.get<double>();
}

double positive_at(const json& obj, const std::string& path, const char* key) {
  const double v = number_at(obj, path, key);
  if (!(v > 0.0)) fail(join(path, key), "must be > 0");
  return v;
}

int integer_at(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_number_integer()) fail(join(path, key), "must be an integer");
  return v.get<int>();
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) fail(join(path, key.c_str()), "unknown key");
  }
}

int site_index(const json& v, const std::string& key, int n_sites) {
  if (!v.is_number_integer()) fail(key, "site index must be an integer");
  const int s = v.get<int>();
  if (s < 1 || s > n_sites) {
    fail(key, "site index must be in [1, " + std::to_string(n_sites) + "] (1-based)");
  }
  return s - 1;
}

cd complex_entry(const json& v, const std::string& key) {
  if (v.is_number()) return cd{v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return cd{v[0].get<double>(), v[1].get<double>()};
  }
  fail(key, "must be a number or a [re, im] pair");
}

}  // namespace

TimeGrid RunConfig::grid() const {
  TimeGrid g;
  g.dt_fs = dt_fs;
  const double raw = t_max_fs / dt_fs;
  long long n = std::llround(raw);
  if (std::abs(raw - static_cast<double>(n)) > 1e-9 * std::max(1.0, raw)) {
    n = static_cast<long long>(std::ceil(raw - 1e-12));  // cover t_max
  }
  g.n_steps = static_cast<int>(std::max(1LL, n));
  return g;
}

QuadratureScheme RunConfig::quadrature() const {
  QuadratureScheme scheme;
  scheme.t_max_fs = std::max(t_max_fs, 1.0);
  return scheme;
}

RunConfig parse_config_text(const std::string& text, bool allow_divergent_alpha) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "", {"system", "bath", "weighting", "run", "output"});

  RunConfig cfg;
  cfg.allow_divergent_alpha = allow_divergent_alpha;

  // --- system ---------------------------------------------------------
  const json& sys = require(doc, "", "system");
  reject_unknown(sys, "system", {"n_sites", "energies_cm1", "couplings"});
  const int n = integer_at(sys, "system", "n_sites");
  if (n < 1) fail("system.n_sites", "must be >= 1");

  const json& energies = require(sys, "system", "energies_cm1");
  if (!energies.is_array() || static_cast<int>(energies.size()) != n) {
    fail("system.energies_cm1", "must be an array of n_sites numbers");
  }
  cfg.system.n_sites = n;
  cfg.system.energies.resize(n);
  for (int j = 0; j < n; ++j) {
    if (!energies[j].is_number()) fail("system.energies_cm1", "entries must be numbers");
    cfg.system.energies[j] = energies[j].get<double>();
  }

  cfg.system.couplings = Eigen::MatrixXd::Zero(n, n);
  const json& couplings = require(sys, "system", "couplings");
  if (!couplings.is_array()) fail("system.couplings", "must be an array of [j, k, J_cm1]");
  for (const json& entry : couplings) {
    if (!entry.is_array() || entry.size() != 3) {
      fail("system.couplings", "each entry must be [j, k, J_cm1]");
    }
    const int j = site_index(entry[0], "system.couplings[0]", n);
    const int k = site_index(entry[1], "system.couplings[1]", n);
    if (j == k) fail("system.couplings", "j and k must differ");
    if (!entry[2].is_number()) fail("system.couplings[2]", "must be a number (cm^-1)");
    if (cfg.system.couplings(j, k) != 0.0) fail("system.couplings", "duplicate pair");
    cfg.system.couplings(j, k) = cfg.system.couplings(k, j) = entry[2].get<double>();
  }
  cfg.system.validate();

  // --- bath ------------------------------------------------------------
  const json& bath = require(doc, "", "bath");
  reject_unknown(bath, "bath", {"family", "eta", "omega_c_cm1", "cross_pairs"});
  const json& family = require(bath, "bath", "family");
  if (!family.is_string()) fail("bath.family", "must be a string");
  const double eta = positive_at(bath, "bath", "eta");
  const double omega_c = positive_at(bath, "bath", "omega_c_cm1");
  const std::string fam = family.get<std::string>();
  if (fam == "ohmic_exponential") {
    cfg.bath = SpectralDensityModel::ohmic_exponential(n, eta, omega_c);
  } else if (fam == "superohmic3_exponential") {
    const double pref = std::numbers::pi * eta / (omega_c * omega_c);
    cfg.bath = SpectralDensityModel::from_function(
        n, [pref, omega_c](double w) { return pref * w * w * w * std::exp(-w / omega_c); },
        3.0, omega_c, eta);
  } else {
    fail("bath.family", "unknown family '" + fam +
                            "' (expected ohmic_exponential or superohmic3_exponential)");
  }
  if (bath.contains("cross_pairs")) {
    const json& cross = bath.at("cross_pairs");
    if (!cross.is_array()) fail("bath.cross_pairs", "must be an array of [j, k, c]");
    for (const json& entry : cross) {
      if (!entry.is_array() || entry.size() != 3) {
        fail("bath.cross_pairs", "each entry must be [j, k, c]");
      }
      const int j = site_index(entry[0], "bath.cross_pairs[0]", n);
      const int k = site_index(entry[1], "bath.cross_pairs[1]", n);
      if (j == k) fail("bath.cross_pairs", "j and k must differ");
      if (!entry[2].is_number()) fail("bath.cross_pairs[2]", "must be a number");
      const double c = entry[2].get<double>();
      if (std::abs(c) > 1.0) fail("bath.cross_pairs[2]", "correlation must lie in [-1, 1]");
      cfg.bath.set_cross_pair(j, k, c);
    }
  }

  // --- weighting ---------------------------------------------------------
  const json& weighting = require(doc, "", "weighting");
  reject_unknown(weighting, "weighting", {"kind", "omega_h_cm1", "alpha"});
  const json& kind = require(weighting, "weighting", "kind");
  if (!kind.is_string()) fail("weighting.kind", "must be a string");
  const std::string kn = kind.get<std::string>();
  if (kn == "unity") {
    cfg.weighting = WeightingFunction::unity();
  } else if (kn == "zero") {
    cfg.weighting = WeightingFunction::zero();
  } else if (kn == "step") {
    cfg.weighting = WeightingFunction::step(positive_at(weighting, "weighting", "omega_h_cm1"));
  } else if (kn == "smooth") {
    const double omega_h = positive_at(weighting, "weighting", "omega_h_cm1");
    const double alpha = number_at(weighting, "weighting", "alpha");
    if (!(alpha > 0.0)) fail("weighting.alpha", "must be > 0");
    cfg.weighting = WeightingFunction::smooth(omega_h, alpha);
  } else {
    fail("weighting.kind", "unknown kind '" + kn + "' (unity, zero, step, smooth)");
  }
  check_weighting_policy(cfg.bath, cfg.weighting, allow_divergent_alpha);

  // --- run -----------------------------------------------------------
  const json& run = require(doc, "", "run");
  reject_unknown(run, "run",
                 {"temperature_K", "t_max_fs", "dt_fs", "inhom_order", "initial_site",
                  "initial_matrix", "stride"});
  cfg.temperature_K = positive_at(run, "run", "temperature_K");
  cfg.t_max_fs = positive_at(run, "run", "t_max_fs");
  cfg.dt_fs = positive_at(run, "run", "dt_fs");
  if (cfg.dt_fs > cfg.t_max_fs) fail("run.dt_fs", "must not exceed t_max_fs");
  if (run.contains("inhom_order")) {
    cfg.inhom_order = integer_at(run, "run", "inhom_order");
    if (cfg.inhom_order < 0 || cfg.inhom_order > 2) {
      fail("run.inhom_order", "must be 0, 1 or 2");
    }
  }
  if (run.contains("stride")) {
    cfg.stride = integer_at(run, "run", "stride");
    if (cfg.stride < 1) fail("run.stride", "must be >= 1");
  }

  const bool has_site = run.contains("initial_site");
  const bool has_matrix = run.contains("initial_matrix");
  if (has_site == has_matrix) {
    fail("run.initial_site", "exactly one of initial_site / initial_matrix is required");
  }
  cfg.initial = Eigen::MatrixXcd::Zero(n, n);
  if (has_site) {
    const int s = site_index(run.at("initial_site"), "run.initial_site", n);
    cfg.initial(s, s) = 1.0;
  } else {
    const json& mat = run.at("initial_matrix");
    if (!mat.is_array() || static_cast<int>(mat.size()) != n) {
      fail("run.initial_matrix", "must be an n_sites x n_sites array");
    }
    for (int j = 0; j < n; ++j) {
      if (!mat[j].is_array() || static_cast<int>(mat[j].size()) != n) {
        fail("run.initial_matrix", "must be an n_sites x n_sites array");
      }
      for (int k = 0; k < n; ++k) {
        cfg.initial(j, k) = complex_entry(mat[j][k], "run.initial_matrix");
      }
    }
    if ((cfg.initial - cfg.initial.adjoint()).cwiseAbs().maxCoeff() > 1e-9) {
      fail("run.initial_matrix", "must be Hermitian");
    }
    if (std::abs(cfg.initial.trace() - cd{1.0, 0.0}) > 1e-9) {
      fail("run.initial_matrix", "trace must equal 1");
    }
  }

  // --- output (optional) ---------------------------------------------------
  if (doc.contains("output")) {
    const json& output = doc.at("output");
    reject_unknown(output, "output", {"csv_path", "json_path"});
    for (const char* key : {"csv_path", "json_path"}) {
      if (!output.contains(key)) continue;
      const json& v = output.at(key);
      if (!v.is_string()) fail(join("output", key), "must be a string");
      (key == std::string("csv_path") ? cfg.csv_path : cfg.json_path) = v.get<std::string>();
    }
  }

  cfg.echo = doc.dump(2);  // keys sorted: canonical echo
  return cfg;
}

RunConfig parse_config_file(const std::string& path, bool allow_divergent_alpha) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), allow_divergent_alpha);
}

}  // namespace ppqme
