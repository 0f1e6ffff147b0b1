#pragma once

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ppqme/bath.hpp"

namespace ppqme {

struct PolaronFrame;  // polaron.hpp
struct DiscreteBath;  // oracle.hpp

// Uniform half-step time grid: samples at t_m = m * dt/2, m = 0 .. 2*n_steps,
// so that a fixed-step RK4 integrator's midpoint stages land on exact samples.
struct TimeGrid {
  double dt_fs = 0.1;
  int n_steps = 10000;

  int n_samples() const { return 2 * n_steps + 1; }
  double half_step() const { return 0.5 * dt_fs; }
  double time_at(int m) const { return m * half_step(); }
  double t_max() const { return n_steps * dt_fs; }
};

using cd = std::complex<double>;

// Canonical index keys.  Pairs are stored with ascending site indices; the
// accessors restore the full index ranges through the exact symmetries
//   K_{jk,j'k'} = K_{kj,k'j'} = -K_{jk,k'j'} = K_{j'k',jk},
//   M_{j,j'k'}  = -M_{j,k'j'},   C_{jj'} = C_{j'j},
//   f_{kj,k'}   = conj(f_{jk,k'}),   h_{j,k'} = h_{k',j}.
struct KKey {
  int a1, b1, a2, b2;  // (a1<b1), (a2<b2), (a1,b1) <= (a2,b2) lexicographically
  auto operator<=>(const KKey&) const = default;
};
struct MKey {
  int j, a, b;  // a < b
  auto operator<=>(const MKey&) const = default;
};
struct CKey {
  int a, b;  // a <= b
  auto operator<=>(const CKey&) const = default;
};
struct FKey {
  int a, b, kp;  // a < b
  auto operator<=>(const FKey&) const = default;
};
struct HKey {
  int a, b;  // a <= b
  auto operator<=>(const HKey&) const = default;
};

// Sampled bath correlation functions on the half-step grid.
//
//   K_{jk,j'k'}(t) = (1/pi) Int dw J2/w^2 W^2 (coth(bw/2) cos wt/hb - i sin wt/hb)
//   M_{j,j'k'}(t)  = (1/pi) Int dw J1/w  (1-W) W (cos wt/hb - i coth(bw/2) sin wt/hb)
//   C_{jj'}(t)     = (1/pi) Int dw J    (1-W)^2 (coth(bw/2) cos wt/hb - i sin wt/hb)
//   f_{jk,k'}(t)   = exp{ (2i/pi) Int dw J1_{k',jk}/w^2 W^2 sin wt/hb }
//   h_{j,k'}(t)    = (2/pi) Int dw J_{jk'}/w (1-W) W cos wt/hb
//
// with J2 = J^(2)_{jk,j'k'}, J1 = J^(1)_{j,j'k'}; K and f are dimensionless,
// M and h are energies (cm^-1), C is energy^2 (cm^-2).
class CorrelationTables {
 public:
  const TimeGrid& grid() const { return grid_; }
  int n_sites() const { return n_sites_; }

  // Sample accessors; m is the half-grid sample index.
  cd corr_K(int j, int k, int jp, int kp, int m) const;
  cd corr_M(int j, int jp, int kp, int m) const;
  cd corr_C(int j, int jp, int m) const;
  cd phase_f(int j, int k, int kp, int m) const;
  double real_h(int j, int kp, int m) const;

  // Read-only canonical storage (dump + kernel building).
  const std::map<KKey, std::vector<cd>>& k_table() const { return K_; }
  const std::map<MKey, std::vector<cd>>& m_table() const { return M_; }
  const std::map<CKey, std::vector<cd>>& c_table() const { return C_; }
  const std::map<FKey, std::vector<cd>>& f_table() const { return F_; }
  const std::map<HKey, std::vector<double>>& h_table() const { return H_; }

  friend CorrelationTables build_tables(const SpectralDensityModel&, const WeightingFunction&,
                                        const QuadratureScheme&, const TimeGrid&, double,
                                        const std::vector<std::pair<int, int>>&,
                                        const std::vector<std::pair<int, int>>&);
  friend CorrelationTables build_tables_discrete(const DiscreteBath&, const WeightingFunction&,
                                                 const TimeGrid&, double,
                                                 const std::vector<std::pair<int, int>>&,
                                                 const std::vector<std::pair<int, int>>&);

 private:
  TimeGrid grid_;
  int n_sites_ = 0;
  std::map<KKey, std::vector<cd>> K_;
  std::map<MKey, std::vector<cd>> M_;
  std::map<CKey, std::vector<cd>> C_;
  std::map<FKey, std::vector<cd>> F_;
  std::map<HKey, std::vector<double>> H_;
};

// Builds every index combination reachable from the electronic coupling pairs
// and the initial-state coherence pairs (both lists use 0-based site indices;
// order within a pair is irrelevant).  Throws DivergentIntegral, naming the
// offending function and index pair, when a frequency integral diverges.
CorrelationTables build_tables(const SpectralDensityModel& density,
                               const WeightingFunction& weighting,
                               const QuadratureScheme& scheme, const TimeGrid& grid,
                               double temperature_K,
                               const std::vector<std::pair<int, int>>& coupling_pairs,
                               const std::vector<std::pair<int, int>>& initial_pairs = {});

// Cumulative kernel integrals on the same grid, one chain per eigen-gap
// (a, b) and index combination:
//   W^{ab}_{jk,j'k'}(t) = Jt_jk Jt_j'k' Int_0^t ds e^{i dE_ab s/hb} (e^{-K_{jk,j'k'}(s)} - 1)
//   Y^{ab}_{j,j'k'}(t)  = Jt_j'k'       Int_0^t ds e^{i dE_ab s/hb} M_{j,j'k'}(s)
//   X^{ab}_{jj'}(t)     =               Int_0^t ds e^{i dE_ab s/hb} C_{jj'}(s)
// Both signs of the K exponent are kept so the accessor can serve index
// orders whose K differs by sign (the e^{+K}-1 channel).
class KernelIntegrals {
 public:
  const TimeGrid& grid() const { return grid_; }
  int n_sites() const { return n_sites_; }

  cd W(int a, int b, int j, int k, int jp, int kp, int m) const;
  cd Y(int a, int b, int j, int jp, int kp, int m) const;
  cd X(int a, int b, int j, int jp, int m) const;

  friend KernelIntegrals kernel_integrals(const CorrelationTables&, const Eigen::VectorXd&,
                                          const Eigen::MatrixXd&);

 private:
  int gap_index(int a, int b) const { return a * n_sites_eigen_ + b; }

  TimeGrid grid_;
  int n_sites_ = 0;
  int n_sites_eigen_ = 0;
  Eigen::MatrixXd j_tilde_;
  std::map<KKey, std::vector<std::vector<cd>>> Wm_;  // e^{-K}-1 per gap
  std::map<KKey, std::vector<std::vector<cd>>> Wp_;  // e^{+K}-1 per gap
  std::map<MKey, std::vector<std::vector<cd>>> Y_;
  std::map<CKey, std::vector<std::vector<cd>>> X_;
};

KernelIntegrals kernel_integrals(const CorrelationTables& tables,
                                 const Eigen::VectorXd& eigenvalues,
                                 const Eigen::MatrixXd& j_tilde);
KernelIntegrals kernel_integrals(const CorrelationTables& tables, const PolaronFrame& frame);

// Cumulative composite-Simpson integral of complex samples on the half-step
// grid: out[m] = Int_0^{t_m} g ds, fourth-order accurate, with the odd chain
// seeded by the three-point (5, 8, -1)/12 opening rule.
std::vector<cd> cumulative_simpson(const std::vector<cd>& g, double step);

}  // namespace ppqme
