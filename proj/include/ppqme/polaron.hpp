#pragma once

#include <Eigen/Dense>

#include "ppqme/bath.hpp"
#include "ppqme/correlations.hpp"

namespace ppqme {

// Bare electronic Hamiltonian in the site basis: diagonal site energies plus
// a symmetric, zero-diagonal coupling matrix (all in cm^-1).
struct SiteHamiltonian {
  int n_sites = 0;
  Eigen::VectorXd energies;   // E_j
  Eigen::MatrixXd couplings;  // J_jk, symmetric, zero diagonal

  static SiteHamiltonian dimer(double e1, double e2, double j12);
  void validate() const;  // throws ConfigError on shape/symmetry violations

  // Site pairs (j<k) with a nonzero electronic coupling, for table building.
  std::vector<std::pair<int, int>> coupling_pairs() const;
};

// Variationally dressed electronic frame: bath-shifted site energies,
// Debye-Waller factors, renormalized couplings, and the eigendecomposition
// of the dressed Hamiltonian H~ = diag(E~) + J~.
struct PolaronFrame {
  Eigen::VectorXd e_tilde;      // E~_j = E_j - integral shift
  Eigen::MatrixXd w;            // w_jk = exp(-K_{jk,jk}(0)/2), w_jj = 1
  Eigen::MatrixXd j_tilde;      // J~_jk = w_jk J_jk
  Eigen::VectorXd eigenvalues;  // dressed eigenvalues, ascending
  Eigen::MatrixXd u;            // u(j,p) = <site j | eigenstate p>, orthogonal
  Eigen::MatrixXd gaps;         // gaps(p,q) = eigenvalues[p] - eigenvalues[q]

  int n_sites() const { return static_cast<int>(e_tilde.size()); }
};

// Debye-Waller factor w_jk = exp(-K_{jk,jk}(0)/2) evaluated on the same
// quadrature nodes the correlation tables use, so the two agree to rounding.
double debye_waller(const SpectralDensityModel& density, const WeightingFunction& weighting,
                    const QuadratureScheme& scheme, double temperature_K, int j, int k);

// Bath-renormalized site energy
//   E~_j = E_j - (1/pi) Int dw (J_jj(w)/w) W(w) (2 - W(w)).
double renormalized_energy(const SpectralDensityModel& density,
                           const WeightingFunction& weighting, const QuadratureScheme& scheme,
                           int j, double bare_energy_cm1);

// Full dressed frame via dense symmetric eigendecomposition.  Eigenvector
// columns are sign-fixed so the largest-magnitude component is positive.
PolaronFrame build_frame(const SiteHamiltonian& hamiltonian, const SpectralDensityModel& density,
                         const WeightingFunction& weighting, const QuadratureScheme& scheme,
                         double temperature_K);

// Analytic two-state frame (rotation angle from atan2, no iterative solver);
// must reproduce build_frame exactly up to rounding.  Requires n_sites == 2.
PolaronFrame two_state_closed_form(const SiteHamiltonian& hamiltonian,
                                   const SpectralDensityModel& density,
                                   const WeightingFunction& weighting,
                                   const QuadratureScheme& scheme, double temperature_K);

}  // namespace ppqme
