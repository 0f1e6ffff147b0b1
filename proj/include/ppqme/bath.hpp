#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppqme/errors.hpp"

namespace ppqme {

// ---------------------------------------------------------------------------
// Spectral densities
// ---------------------------------------------------------------------------

enum class DensityFamily { OhmicExponential, Tabulated };

// Bath spectral density table J_jj'(omega) in cm^-1.  All diagonals share one
// radial shape; cross pairs are correlation coefficients c_jk in [-1, 1] so
// that J_jk(omega) = c_jk * shape(omega).  The default is independent baths
// (c = identity), the model used throughout the two-state experiments.
class SpectralDensityModel {
 public:
  // shape(omega) = pi * eta * omega * exp(-omega/omega_c), linear at small
  // omega (low-frequency power 1).
  static SpectralDensityModel ohmic_exponential(int n_sites, double eta, double omega_c_cm1);

  // Arbitrary non-negative radial shape shared by all sites.  low_freq_power
  // is the exponent s with shape ~ omega^s as omega -> 0 (drives the
  // config-time smooth-weighting policy); omega_scale_cm1 sets the panel
  // layout scale (plays the role omega_c plays for the Ohmic family).
  static SpectralDensityModel from_function(int n_sites, std::function<double(double)> shape,
                                            double low_freq_power, double omega_scale_cm1,
                                            double eta = 1.0);

  int n_sites() const { return n_sites_; }
  DensityFamily family() const { return family_; }
  double eta() const { return eta_; }
  double omega_c() const { return omega_c_; }
  double low_freq_power() const { return low_freq_power_; }

  // Correlation coefficient between site baths; c_jj = 1.
  void set_cross_pair(int j, int k, double c);
  bool pair_coupled(int j, int k) const;  // J_jk not identically zero

  // J_jj'(omega), cm^-1.  Negative omega is a domain error.
  double density(int j, int jp, double omega) const;

  // J^(1)_{j,j'k'} = J_jj' - J_jk' (antisymmetric under j' <-> k').
  double aux_density_1(int j, int jp, int kp, double omega) const;

  // J^(2)_{jk,j'k'} = J_jj' + J_kk' - J_jk' - J_kj' (antisymmetric under
  // j <-> k and under j' <-> k'; symmetric under pair exchange).
  double aux_density_2(int j, int k, int jp, int kp, double omega) const;

 private:
  SpectralDensityModel() = default;
  void check_indices(int j, int jp) const;

  int n_sites_ = 0;
  DensityFamily family_ = DensityFamily::OhmicExponential;
  double eta_ = 1.0;
  double omega_c_ = 0.0;
  double low_freq_power_ = 1.0;
  std::function<double(double)> shape_;  // Tabulated only
  Eigen::MatrixXd cross_;                // correlation coefficients
};

// ---------------------------------------------------------------------------
// Weighting functions
// ---------------------------------------------------------------------------

enum class WeightingKind { Unity, Zero, Step, Smooth };

// Partial-transformation weight W_h(omega) in [0, 1]: the fraction of each
// bath mode's displacement that is transformed away.  Unity = full transform,
// zero = no transform, step = full above omega_h only, smooth =
// 1 - exp(-(omega/omega_h)^alpha).
struct WeightingFunction {
  WeightingKind kind = WeightingKind::Zero;
  double omega_h = 0.0;  // cm^-1 (step / smooth)
  double alpha = 0.0;    // smooth exponent

  static WeightingFunction unity();
  static WeightingFunction zero();
  static WeightingFunction step(double omega_h_cm1);
  static WeightingFunction smooth(double omega_h_cm1, double alpha);

  double weight(double omega) const;     // W(omega)
  double one_minus(double omega) const;  // 1 - W(omega), computed without cancellation
  const char* kind_name() const;
};

// Config-time policy: a smooth weighting whose alpha is at or below
// (3 - s)/ 2, with s the density's low-frequency power, produces relaxation
// kernels whose time integrals grow without bound (the correlation decay
// t^-(s + 2 alpha - 2) is no longer integrable).  For the Ohmic family the
// threshold is alpha <= 1.  Rejected unless the override flag is set.
void check_weighting_policy(const SpectralDensityModel& density, const WeightingFunction& weighting,
                            bool allow_divergent_alpha);

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// Gauss-Legendre panel layout over [ir_floor_factor * omega_c,
// omega_max_factor * omega_c]:
//   - geometric panels (ratio ir_ratio) resolve the omega -> 0 end,
//   - every panel is narrower than phase_budget * hbar / t_max_fs so that the
//     fastest phase exp(i omega t / hbar) stays resolved at the longest time,
//   - an optional breakpoint (the step discontinuity omega_h) is made an
//     exact panel edge.
struct QuadratureScheme {
  int nodes_per_panel = 20;
  double omega_max_factor = 50.0;
  // Low enough that truncating [0, floor) costs < 1e-11 relative mass even
  // for integrands that stay finite at omega -> 0.
  double ir_floor_factor = 1e-12;
  double ir_ratio = 2.0;
  double phase_budget = 20.0;  // radians across one panel at t_max
  double t_max_fs = 1000.0;
};

// Flattened node list.  ir_band[i] >= 0 marks nodes in the geometric
// low-frequency bands (band 0 is the lowest); -1 elsewhere.  The bands drive
// divergence detection: for a convergent integrand the per-band mass decays
// as the bands shrink toward omega = 0.
struct NodeSet {
  std::vector<double> omega;
  std::vector<double> wq;
  std::vector<int> ir_band;
  int n_ir_bands = 0;
};

NodeSet build_nodes(const QuadratureScheme& scheme, double omega_c,
                    std::optional<double> breakpoint);

// Throws DivergentIntegral if the per-band masses of |profile| fail to decay
// toward omega = 0.  profile[i] is the integrand's magnitude at node i times
// the quadrature weight.
void check_ir_convergence(const NodeSet& nodes, const std::vector<double>& profile,
                          const std::string& integral_name);

// Sum of wq * f(omega) over the node set, with the divergence check applied
// to |wq * f|.  integral_name feeds the DivergentIntegral diagnostic.
double integrate(const std::function<double(double)>& f, const NodeSet& nodes,
                 const std::string& integral_name);

}  // namespace ppqme
