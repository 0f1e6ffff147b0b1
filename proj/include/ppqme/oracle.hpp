#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ppqme/bath.hpp"
#include "ppqme/correlations.hpp"
#include "ppqme/polaron.hpp"

namespace ppqme {

// ---------------------------------------------------------------------------
// Finite-mode baths
// ---------------------------------------------------------------------------

// Explicit harmonic bath: mode frequencies omega_n (cm^-1) and dimensionless
// couplings g(n, j) of mode n to site j, with interaction
// H_I = sum_j |j><j| sum_n omega_n g_nj (b_n + b_n^dag).
struct DiscreteBath {
  Eigen::VectorXd omega;  // n_modes
  Eigen::MatrixXd g;      // n_modes x n_sites

  int n_modes() const { return static_cast<int>(omega.size()); }
  int n_sites() const { return static_cast<int>(g.cols()); }

  // Every site gets its own identical copy of the radial mode list (block
  // layout: modes [s*n, (s+1)*n) couple to site s only).
  static DiscreteBath independent_identical(const Eigen::VectorXd& radial_omega,
                                            const Eigen::VectorXd& radial_g, int n_sites);
};

// Quantile discretization of a continuum density into n_modes_per_site
// radial modes.  The combined (normalized) weighted measures J W^2/w^2,
// J W(1-W)/w and J (1-W)^2 form a single measure mu that resolves every
// correlation channel; bin edges are quantiles of mu^(1/3) (the bin density
// that minimizes total within-bin variance, the leading error of the
// discretized oscillatory integrals), each frequency sits at its bin's
// mu-centroid, and g_n^2 = (1/pi) Int_bin (J/w) dw / omega_n, which
// reproduces the reorganization sum rule exactly.  Requires independent
// identical site baths (no cross pairs).  Throws DivergentIntegral when the
// measure piles up at omega = 0.
DiscreteBath discretize(const SpectralDensityModel& density, const WeightingFunction& weighting,
                        int n_modes_per_site);

// Closed-form mode sums for every correlation function of a finite bath.
// Times are continuous (no grid); the expressions are exact, so they arbitrate
// the continuum quadrature and table interpolation.
class DiscreteCorr {
 public:
  DiscreteCorr(const DiscreteBath& bath, const WeightingFunction& weighting,
               double temperature_K);

  cd K(int j, int k, int jp, int kp, double t_fs) const;
  cd M(int j, int jp, int kp, double t_fs) const;
  cd C(int j, int jp, double t_fs) const;
  cd f(int j, int k, int kp, double t_fs) const;
  double h(int j, int kp, double t_fs) const;
  double shift(int j) const;              // sum_n w_n g_nj^2 W (2 - W)
  double debye_waller(int j, int k) const;

 private:
  DiscreteBath bath_;
  std::vector<double> w_, one_w_, coth_;
};

inline DiscreteCorr discrete_corr(const DiscreteBath& bath, const WeightingFunction& weighting,
                                  double temperature_K) {
  return DiscreteCorr(bath, weighting, temperature_K);
}

// Drop-in replacements for build_tables / build_frame backed by the exact
// finite-mode sums, so the full engine can be run against an explicit bath.
CorrelationTables build_tables_discrete(const DiscreteBath& bath,
                                        const WeightingFunction& weighting, const TimeGrid& grid,
                                        double temperature_K,
                                        const std::vector<std::pair<int, int>>& coupling_pairs,
                                        const std::vector<std::pair<int, int>>& initial_pairs = {});
PolaronFrame build_frame_discrete(const SiteHamiltonian& hamiltonian, const DiscreteBath& bath,
                                  const WeightingFunction& weighting, double temperature_K);

// ---------------------------------------------------------------------------
// Truncated Fock-space reference
// ---------------------------------------------------------------------------

// Dense site (x) Fock product space with `cutoff` levels per mode.  Supplies
// the displacement / dressed-hopping / residual-coupling operators whose
// thermal traces define the correlation functions, and the exact propagator.
class FockSpaceModel {
 public:
  FockSpaceModel(const SiteHamiltonian& system, const DiscreteBath& bath, int cutoff);

  int cutoff() const { return cutoff_; }
  int bath_dim() const { return bath_dim_; }
  int dim() const { return system_.n_sites * bath_dim_; }
  const SiteHamiltonian& system() const { return system_; }
  const DiscreteBath& bath() const { return bath_; }

  // Bath-space pieces (dimension bath_dim).
  Eigen::MatrixXd annihilation(int mode) const;
  Eigen::VectorXd bath_energies() const;  // sum_n omega_n occ_n per Fock state
  Eigen::VectorXd thermal_weights(double temperature_K) const;  // normalized diagonal
  // E_j = exp( sum_n g_nj W(omega_n) (b_n^dag - b_n) )
  Eigen::MatrixXd displacement(int j, const WeightingFunction& weighting) const;
  // op(t) = e^{i H_b t/hbar} op e^{-i H_b t/hbar} (H_b is diagonal)
  Eigen::MatrixXcd heisenberg(const Eigen::MatrixXcd& op, double t_fs) const;
  // V_jk(t): Heisenberg dressed hopping  E_j E_k^T at time t
  Eigen::MatrixXcd dressed_hop(int j, int k, const WeightingFunction& weighting,
                               double t_fs) const;
  // D_j(t): Heisenberg residual coupling sum_n w_n g_nj (1 - W)(b + b^dag)
  Eigen::MatrixXcd residual_coupling(int j, const WeightingFunction& weighting,
                                     double t_fs) const;

 private:
  SiteHamiltonian system_;
  DiscreteBath bath_;
  int cutoff_ = 0;
  int bath_dim_ = 0;
  std::vector<int> occ_;  // occ_[s * n_modes + n]: occupation of mode n in state s
};

// Numerically exact reduced dynamics by dense diagonalization of the full
// Hamiltonian.  The initial state is the untransformed product
// rho_lab(0) = sigma0 (x) rho_thermal — the same initial condition the
// master equation's initial-correlation terms are built for.  Returns the
// reduced site density matrix at each time.
std::vector<Eigen::MatrixXcd> exact_propagate(const FockSpaceModel& model,
                                              double temperature_K,
                                              const Eigen::MatrixXcd& sigma0_site,
                                              const std::vector<double>& t_fs);

// ---------------------------------------------------------------------------
// Conventional time-local master equation (untransformed reference)
// ---------------------------------------------------------------------------

// Second-order time-local relaxation tensor of the bare-coupling theory,
// with the time integrals done analytically per quadrature node:
//   Lam_j(t)_pq = sum_j' U_j'p U_j'q e^{i dE_pq t/hb} Int_0^t ds C_jj'(s) e^{-i dE_pq s/hb},
//   R S = (1/hb^2) sum_j ( [P~_j(t), Lam_j S] + [S Lam_j^dag, P~_j(t)] ).
// With the zero weighting this is what the dressed tensor must reduce to.
Eigen::MatrixXcd conventional_R(const SpectralDensityModel& density,
                                const QuadratureScheme& scheme, const PolaronFrame& frame,
                                double temperature_K, double t_fs);

}  // namespace ppqme
