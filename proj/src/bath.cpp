#include "ppqme/bath.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "ppqme/units.hpp"

namespace ppqme {

// ---------------------------------------------------------------------------
// SpectralDensityModel
// ---------------------------------------------------------------------------

SpectralDensityModel SpectralDensityModel::ohmic_exponential(int n_sites, double eta,
                                                             double omega_c_cm1) {
  if (n_sites < 1) throw ConfigError("spectral density: n_sites must be >= 1");
  if (!(eta > 0.0)) throw ConfigError("spectral density: eta must be > 0");
  if (!(omega_c_cm1 > 0.0)) throw ConfigError("spectral density: omega_c_cm1 must be > 0");
  SpectralDensityModel m;
  m.n_sites_ = n_sites;
  m.family_ = DensityFamily::OhmicExponential;
  m.eta_ = eta;
  m.omega_c_ = omega_c_cm1;
  m.low_freq_power_ = 1.0;
  m.cross_ = Eigen::MatrixXd::Identity(n_sites, n_sites);
  return m;
}

SpectralDensityModel SpectralDensityModel::from_function(int n_sites,
                                                         std::function<double(double)> shape,
                                                         double low_freq_power,
                                                         double omega_scale_cm1, double eta) {
  if (n_sites < 1) throw ConfigError("spectral density: n_sites must be >= 1");
  if (!shape) throw ConfigError("spectral density: shape function must be set");
  if (!(omega_scale_cm1 > 0.0)) throw ConfigError("spectral density: omega scale must be > 0");
  SpectralDensityModel m;
  m.n_sites_ = n_sites;
  m.family_ = DensityFamily::Tabulated;
  m.eta_ = eta;
  m.omega_c_ = omega_scale_cm1;
  m.low_freq_power_ = low_freq_power;
  m.shape_ = std::move(shape);
  m.cross_ = Eigen::MatrixXd::Identity(n_sites, n_sites);
  return m;
}

void SpectralDensityModel::check_indices(int j, int jp) const {
  if (j < 0 || jp < 0 || j >= n_sites_ || jp >= n_sites_) {
    throw std::domain_error("spectral density: site index out of range");
  }
}

void SpectralDensityModel::set_cross_pair(int j, int k, double c) {
  check_indices(j, k);
  if (j == k) throw ConfigError("spectral density: cross pair indices must differ");
  if (!(std::abs(c) <= 1.0)) {
    throw ConfigError("spectral density: cross correlation must lie in [-1, 1]");
  }
  cross_(j, k) = c;
  cross_(k, j) = c;
}

bool SpectralDensityModel::pair_coupled(int j, int k) const {
  check_indices(j, k);
  return cross_(j, k) != 0.0;
}

double SpectralDensityModel::density(int j, int jp, double omega) const {
  check_indices(j, jp);
  if (omega < 0.0) throw std::domain_error("spectral density: omega must be >= 0");
  const double c = cross_(j, jp);
  if (c == 0.0) return 0.0;
  double radial;
  if (family_ == DensityFamily::OhmicExponential) {
    radial = std::numbers::pi * eta_ * omega * std::exp(-omega / omega_c_);
  } else {
    radial = eta_ * shape_(omega);
  }
  return c * radial;
}

double SpectralDensityModel::aux_density_1(int j, int jp, int kp, double omega) const {
  return density(j, jp, omega) - density(j, kp, omega);
}

double SpectralDensityModel::aux_density_2(int j, int k, int jp, int kp, double omega) const {
  return density(j, jp, omega) + density(k, kp, omega) - density(j, kp, omega) -
         density(k, jp, omega);
}

// ---------------------------------------------------------------------------
// WeightingFunction
// ---------------------------------------------------------------------------

WeightingFunction WeightingFunction::unity() { return {WeightingKind::Unity, 0.0, 0.0}; }
WeightingFunction WeightingFunction::zero() { return {WeightingKind::Zero, 0.0, 0.0}; }

WeightingFunction WeightingFunction::step(double omega_h_cm1) {
  if (!(omega_h_cm1 > 0.0)) throw ConfigError("weighting: step omega_h_cm1 must be > 0");
  return {WeightingKind::Step, omega_h_cm1, 0.0};
}

WeightingFunction WeightingFunction::smooth(double omega_h_cm1, double alpha) {
  if (!(omega_h_cm1 > 0.0)) throw ConfigError("weighting: smooth omega_h_cm1 must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("weighting: smooth alpha must be > 0");
  return {WeightingKind::Smooth, omega_h_cm1, alpha};
}

double WeightingFunction::weight(double omega) const {
  if (omega < 0.0) throw std::domain_error("weighting: omega must be >= 0");
  switch (kind) {
    case WeightingKind::Unity:
      return 1.0;
    case WeightingKind::Zero:
      return 0.0;
    case WeightingKind::Step:
      return omega >= omega_h ? 1.0 : 0.0;
    case WeightingKind::Smooth:
      return -std::expm1(-std::pow(omega / omega_h, alpha));
  }
  return 0.0;
}

double WeightingFunction::one_minus(double omega) const {
  if (omega < 0.0) throw std::domain_error("weighting: omega must be >= 0");
  switch (kind) {
    case WeightingKind::Unity:
      return 0.0;
    case WeightingKind::Zero:
      return 1.0;
    case WeightingKind::Step:
      return omega >= omega_h ? 0.0 : 1.0;
    case WeightingKind::Smooth:
      return std::exp(-std::pow(omega / omega_h, alpha));
  }
  return 1.0;
}

const char* WeightingFunction::kind_name() const {
  switch (kind) {
    case WeightingKind::Unity:
      return "unity";
    case WeightingKind::Zero:
      return "zero";
    case WeightingKind::Step:
      return "step";
    case WeightingKind::Smooth:
      return "smooth";
  }
  return "?";
}

void check_weighting_policy(const SpectralDensityModel& density,
                            const WeightingFunction& weighting, bool allow_divergent_alpha) {
  if (weighting.kind != WeightingKind::Smooth) return;
  // Correlation decay t^-(s + 2 alpha - 2) must be integrable, i.e.
  // alpha > (3 - s) / 2; at or below that the relaxation kernels grow
  // without bound in time.
  const double threshold = 0.5 * (3.0 - density.low_freq_power());
  if (weighting.alpha <= threshold + 1e-12 && !allow_divergent_alpha) {
    std::ostringstream os;
    os << "weighting: smooth alpha = " << weighting.alpha << " is at or below the divergence "
       << "threshold " << threshold << " for a density with low-frequency power "
       << density.low_freq_power()
       << "; relaxation kernels do not converge in time (pass --allow-divergent-alpha to force)";
    throw ConfigError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre_reference(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

const std::pair<std::vector<double>, std::vector<double>>& gl_cached(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::pair<std::vector<double>, std::vector<double>> nw;
    gauss_legendre_reference(n, nw.first, nw.second);
    it = cache.emplace(n, std::move(nw)).first;
  }
  return it->second;
}

}  // namespace

NodeSet build_nodes(const QuadratureScheme& scheme, double omega_c,
                    std::optional<double> breakpoint) {
  if (!(omega_c > 0.0)) throw ConfigError("quadrature: omega_c must be > 0");
  if (scheme.nodes_per_panel < 2) throw ConfigError("quadrature: nodes_per_panel must be >= 2");
  const double floor = scheme.ir_floor_factor * omega_c;
  const double omega_max = scheme.omega_max_factor * omega_c;
  const double ir_top = 0.5 * omega_c;
  const double cap = scheme.phase_budget * units::hbar_cmfs / scheme.t_max_fs;

  // Geometric band edges resolving omega -> 0.
  std::vector<double> band_edges{floor};
  for (double e = floor; e * scheme.ir_ratio < ir_top; e *= scheme.ir_ratio) {
    band_edges.push_back(e * scheme.ir_ratio);
  }
  band_edges.push_back(ir_top);
  const int n_bands = static_cast<int>(band_edges.size()) - 1;

  // Full edge list: bands, then uniform panels of width <= cap up to omega_max.
  std::vector<double> edges = band_edges;
  {
    const int n_uniform = std::max(1, static_cast<int>(std::ceil((omega_max - ir_top) / cap)));
    const double width = (omega_max - ir_top) / n_uniform;
    for (int i = 1; i <= n_uniform; ++i) edges.push_back(ir_top + i * width);
  }
  if (breakpoint && *breakpoint > floor && *breakpoint < omega_max) {
    edges.push_back(*breakpoint);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [&](double a, double b) { return std::abs(a - b) < 1e-12 * omega_c; }),
              edges.end());

  // Enforce the phase cap everywhere by uniform subdivision.
  std::vector<double> final_edges{edges.front()};
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / cap)));
    for (int p = 1; p <= pieces; ++p) final_edges.push_back(a + (b - a) * p / pieces);
  }

  const auto& [xref, wref] = gl_cached(scheme.nodes_per_panel);
  NodeSet nodes;
  nodes.n_ir_bands = n_bands;
  for (size_t i = 0; i + 1 < final_edges.size(); ++i) {
    const double a = final_edges[i], b = final_edges[i + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k < scheme.nodes_per_panel; ++k) {
      const double om = mid + half * xref[k];
      nodes.omega.push_back(om);
      nodes.wq.push_back(half * wref[k]);
      int band = -1;
      if (om < ir_top) {
        const auto it = std::upper_bound(band_edges.begin(), band_edges.end(), om);
        band = static_cast<int>(it - band_edges.begin()) - 1;
        band = std::clamp(band, 0, n_bands - 1);
      }
      nodes.ir_band.push_back(band);
    }
  }
  return nodes;
}

void check_ir_convergence(const NodeSet& nodes, const std::vector<double>& profile,
                          const std::string& integral_name) {
  if (nodes.n_ir_bands < 7) return;  // not enough bands to judge
  std::vector<double> mass(nodes.n_ir_bands, 0.0);
  double total = 0.0;
  for (size_t i = 0; i < profile.size(); ++i) {
    total += std::abs(profile[i]);
    if (nodes.ir_band[i] >= 0) mass[nodes.ir_band[i]] += std::abs(profile[i]);
  }
  if (!(mass[0] > 1e-13 * total)) return;  // lowest band negligible: convergent
  constexpr int n_check = 6;
  bool divergent = true;
  for (int k = 0; k < n_check; ++k) {
    if (!(mass[k] >= 0.98 * mass[k + 1])) {
      divergent = false;
      break;
    }
  }
  if (divergent) {
    std::ostringstream os;
    os << "low-frequency panel masses fail to decay toward omega = 0 "
       << "(smallest-band mass " << mass[0] << ", next " << mass[1] << ", total " << total << ")";
    throw DivergentIntegral(integral_name, os.str());
  }
}

double integrate(const std::function<double(double)>& f, const NodeSet& nodes,
                 const std::string& integral_name) {
  std::vector<double> contrib(nodes.omega.size());
  for (size_t i = 0; i < nodes.omega.size(); ++i) {
    contrib[i] = nodes.wq[i] * f(nodes.omega[i]);
  }
  check_ir_convergence(nodes, contrib, integral_name);
  double sum = 0.0;
  for (double c : contrib) sum += c;
  return sum;
}

}  // namespace ppqme
