#include "ppqme/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "ppqme/errors.hpp"
#include "ppqme/units.hpp"

namespace ppqme {

// ---------------------------------------------------------------------------
// DiscreteBath
// ---------------------------------------------------------------------------

DiscreteBath DiscreteBath::independent_identical(const Eigen::VectorXd& radial_omega,
                                                 const Eigen::VectorXd& radial_g, int n_sites) {
  if (radial_omega.size() != radial_g.size()) {
    throw ConfigError("discrete bath: omega and g lists must have equal length");
  }
  if (n_sites < 1) throw ConfigError("discrete bath: n_sites must be >= 1");
  const int nm = static_cast<int>(radial_omega.size());
  DiscreteBath b;
  b.omega.resize(nm * n_sites);
  b.g = Eigen::MatrixXd::Zero(nm * n_sites, n_sites);
  for (int s = 0; s < n_sites; ++s) {
    for (int n = 0; n < nm; ++n) {
      b.omega[s * nm + n] = radial_omega[n];
      b.g(s * nm + n, s) = radial_g[n];
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// discretize
// ---------------------------------------------------------------------------

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const size_t i = it - xs.begin();
  const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + f * (ys[i] - ys[i - 1]);
}

// Inverse of a nondecreasing cumulative table (leftmost solution).
double interp_inverse(const std::vector<double>& cum, const std::vector<double>& xs, double c) {
  const auto it = std::lower_bound(cum.begin(), cum.end(), c);
  if (it == cum.begin()) return xs.front();
  if (it == cum.end()) return xs.back();
  const size_t i = it - cum.begin();
  const double dc = cum[i] - cum[i - 1];
  const double f = dc > 0.0 ? (c - cum[i - 1]) / dc : 1.0;
  return xs[i - 1] + f * (xs[i] - xs[i - 1]);
}

}  // namespace

DiscreteBath discretize(const SpectralDensityModel& density, const WeightingFunction& weighting,
                        int n_modes_per_site) {
  if (n_modes_per_site < 1) throw ConfigError("discretize: n_modes_per_site must be >= 1");
  const int n_sites = density.n_sites();
  for (int j = 0; j < n_sites; ++j) {
    for (int k = j + 1; k < n_sites; ++k) {
      if (density.pair_coupled(j, k)) {
        throw ConfigError("discretize requires independent site baths (no cross pairs)");
      }
    }
  }

  const double wc = density.omega_c();
  const double wlo = 1e-12 * wc, whi = 50.0 * wc;
  const int np = 400001;
  std::vector<double> om(np);
  const double lr = std::log(whi / wlo) / (np - 1);
  for (int i = 0; i < np; ++i) om[i] = wlo * std::exp(lr * i);

  // Channel measures: J W^2/w^2, J W (1-W)/w, J (1-W)^2, plus the coupling
  // measure (1/pi) J/w for the g allocation.
  std::vector<double> c1(np), c2(np), c3(np), cg(np);
  for (int i = 0; i < np; ++i) {
    const double w = om[i];
    const double jd = density.density(0, 0, w);
    const double wf = weighting.weight(w), ow = weighting.one_minus(w);
    c1[i] = jd * wf * wf / (w * w);
    c2[i] = jd * wf * ow / w;
    c3[i] = jd * ow * ow;
    cg[i] = jd / (std::numbers::pi * w);
  }

  const auto cumulative = [&](const std::vector<double>& f) {
    std::vector<double> cum(np, 0.0);
    for (int i = 1; i < np; ++i) {
      cum[i] = cum[i - 1] + 0.5 * (f[i] + f[i - 1]) * (om[i] - om[i - 1]);
    }
    return cum;
  };
  const auto cumg = cumulative(cg);

  // Combined normalized measure (zero-norm channels are skipped).
  std::vector<double> mu(np, 0.0);
  for (const auto* ch : {&c1, &c2, &c3}) {
    const double total = cumulative(*ch).back();
    if (total <= 0.0) continue;
    for (int i = 0; i < np; ++i) mu[i] += (*ch)[i] / total;
  }
  const auto cmu = cumulative(mu);
  const double total_mu = cmu.back();
  if (!(total_mu > 0.0)) throw ConfigError("discretize: spectral measure is identically zero");

  // Low-frequency divergence: per-decade masses must decay toward omega = 0.
  {
    const int n_dec = 12;  // decades spanning [1e-12, 1] x omega_c
    std::vector<double> mass(n_dec, 0.0);
    for (int i = 1; i < np; ++i) {
      if (om[i] > wc) break;
      int d = static_cast<int>(std::floor(std::log10(om[i] / wlo)));
      d = std::clamp(d, 0, n_dec - 1);
      mass[d] += 0.5 * (mu[i] + mu[i - 1]) * (om[i] - om[i - 1]);
    }
    bool divergent = mass[0] > 1e-13 * total_mu;
    for (int d = 0; d + 1 < n_dec - 1 && divergent; ++d) {
      if (!(mass[d] >= 0.9 * mass[d + 1])) divergent = false;
    }
    if (divergent) {
      std::ostringstream os;
      os << "mode measure accumulates at omega = 0 (lowest decade mass " << mass[0] << " of "
         << total_mu << ")";
      throw DivergentIntegral("discretization measure", os.str());
    }
  }

  // Bin edges follow quantiles of mu^(1/3): the leading discretization error
  // of an oscillatory integral is (t/hbar)^2/2 times the within-bin variance
  // of the measure, and the total variance over all bins is minimized by a
  // bin density proportional to the cube root of the measure.  Each mode then
  // sits at its bin's measure centroid, which cancels the first-order phase
  // error, and carries the bin's exact share of the coupling measure so the
  // reorganization sum rule holds to round-off for any mode count.
  std::vector<double> nu(np), wmu(np);
  for (int i = 0; i < np; ++i) {
    nu[i] = std::cbrt(mu[i]);
    wmu[i] = om[i] * mu[i];
  }
  const auto cnu = cumulative(nu);
  const auto cwm = cumulative(wmu);
  const double total_nu = cnu.back();

  Eigen::VectorXd mode_omega(n_modes_per_site), mode_g(n_modes_per_site);
  for (int n = 0; n < n_modes_per_site; ++n) {
    const double lo_c = total_nu * n / n_modes_per_site;
    const double hi_c = total_nu * (n + 1) / n_modes_per_site;
    const double e_lo = interp_inverse(cnu, om, lo_c);
    const double e_hi = interp_inverse(cnu, om, hi_c);
    const double dmass = interp(om, cmu, e_hi) - interp(om, cmu, e_lo);
    double w_n = dmass > 0.0 ? (interp(om, cwm, e_hi) - interp(om, cwm, e_lo)) / dmass
                             : 0.5 * (e_lo + e_hi);
    if (!(w_n > e_lo && w_n < e_hi)) w_n = 0.5 * (e_lo + e_hi);
    const double g2 = (interp(om, cumg, e_hi) - interp(om, cumg, e_lo)) / w_n;
    mode_omega[n] = w_n;
    mode_g[n] = std::sqrt(std::max(0.0, g2));
  }
  return DiscreteBath::independent_identical(mode_omega, mode_g, n_sites);
}

// ---------------------------------------------------------------------------
// DiscreteCorr
// ---------------------------------------------------------------------------

DiscreteCorr::DiscreteCorr(const DiscreteBath& bath, const WeightingFunction& weighting,
                           double temperature_K)
    : bath_(bath) {
  const double beta = units::beta_from_temperature(temperature_K);
  const int nm = bath_.n_modes();
  w_.resize(nm);
  one_w_.resize(nm);
  coth_.resize(nm);
  for (int n = 0; n < nm; ++n) {
    w_[n] = weighting.weight(bath_.omega[n]);
    one_w_[n] = weighting.one_minus(bath_.omega[n]);
    coth_[n] = units::thermal_coth(0.5 * beta * bath_.omega[n]);
  }
}

cd DiscreteCorr::K(int j, int k, int jp, int kp, double t_fs) const {
  cd acc{0.0, 0.0};
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double dg1 = bath_.g(n, j) - bath_.g(n, k);
    const double dg2 = bath_.g(n, jp) - bath_.g(n, kp);
    if (dg1 == 0.0 || dg2 == 0.0) continue;
    const double th = bath_.omega[n] * t_fs / units::hbar_cmfs;
    const double a = dg1 * dg2 * w_[n] * w_[n];
    acc += cd{a * coth_[n] * std::cos(th), -a * std::sin(th)};
  }
  return acc;
}

cd DiscreteCorr::M(int j, int jp, int kp, double t_fs) const {
  cd acc{0.0, 0.0};
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double dg2 = bath_.g(n, jp) - bath_.g(n, kp);
    const double a = bath_.omega[n] * bath_.g(n, j) * one_w_[n] * dg2 * w_[n];
    if (a == 0.0) continue;
    const double th = bath_.omega[n] * t_fs / units::hbar_cmfs;
    acc += cd{a * std::cos(th), -a * coth_[n] * std::sin(th)};
  }
  return acc;
}

cd DiscreteCorr::C(int j, int jp, double t_fs) const {
  cd acc{0.0, 0.0};
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double a = bath_.omega[n] * bath_.omega[n] * bath_.g(n, j) * bath_.g(n, jp) *
                     one_w_[n] * one_w_[n];
    if (a == 0.0) continue;
    const double th = bath_.omega[n] * t_fs / units::hbar_cmfs;
    acc += cd{a * coth_[n] * std::cos(th), -a * std::sin(th)};
  }
  return acc;
}

cd DiscreteCorr::f(int j, int k, int kp, double t_fs) const {
  double phase = 0.0;
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double dg1 = bath_.g(n, j) - bath_.g(n, k);
    const double a = 2.0 * bath_.g(n, kp) * dg1 * w_[n] * w_[n];
    if (a == 0.0) continue;
    phase += a * std::sin(bath_.omega[n] * t_fs / units::hbar_cmfs);
  }
  return std::polar(1.0, phase);
}

double DiscreteCorr::h(int j, int kp, double t_fs) const {
  double acc = 0.0;
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double a = 2.0 * bath_.omega[n] * bath_.g(n, j) * bath_.g(n, kp) * one_w_[n] * w_[n];
    if (a == 0.0) continue;
    acc += a * std::cos(bath_.omega[n] * t_fs / units::hbar_cmfs);
  }
  return acc;
}

double DiscreteCorr::shift(int j) const {
  double acc = 0.0;
  for (int n = 0; n < bath_.n_modes(); ++n) {
    acc += bath_.omega[n] * bath_.g(n, j) * bath_.g(n, j) * w_[n] * (2.0 - w_[n]);
  }
  return acc;
}

double DiscreteCorr::debye_waller(int j, int k) const {
  if (j == k) return 1.0;
  double ex = 0.0;
  for (int n = 0; n < bath_.n_modes(); ++n) {
    const double dg = bath_.g(n, j) - bath_.g(n, k);
    ex += dg * dg * w_[n] * w_[n] * coth_[n];
  }
  return std::exp(-0.5 * ex);
}

// ---------------------------------------------------------------------------
// Discrete-bath table / frame builders
// ---------------------------------------------------------------------------

namespace {

struct CanonPair {
  int a, b;
  int sign;
};
KKey canon_kkey(const CanonPair& p, const CanonPair& q) {
  if (std::pair{p.a, p.b} <= std::pair{q.a, q.b}) return {p.a, p.b, q.a, q.b};
  return {q.a, q.b, p.a, p.b};
}

std::vector<std::pair<int, int>> canonical_pairs(const std::vector<std::pair<int, int>>& in,
                                                 int n_sites) {
  std::set<std::pair<int, int>> seen;
  for (auto [j, k] : in) {
    if (j < 0 || k < 0 || j >= n_sites || k >= n_sites) {
      throw ConfigError("pair list: site index out of range");
    }
    if (j != k) seen.insert({std::min(j, k), std::max(j, k)});
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

CorrelationTables build_tables_discrete(const DiscreteBath& bath,
                                        const WeightingFunction& weighting, const TimeGrid& grid,
                                        double temperature_K,
                                        const std::vector<std::pair<int, int>>& coupling_pairs,
                                        const std::vector<std::pair<int, int>>& initial_pairs) {
  const int n = bath.n_sites();
  const DiscreteCorr dc(bath, weighting, temperature_K);
  const auto pj = canonical_pairs(coupling_pairs, n);
  auto pall = pj;
  for (auto p : canonical_pairs(initial_pairs, n)) {
    if (std::find(pall.begin(), pall.end(), p) == pall.end()) pall.push_back(p);
  }
  std::sort(pall.begin(), pall.end());

  CorrelationTables tab;
  tab.grid_ = grid;
  tab.n_sites_ = n;
  const int ns = grid.n_samples();
  const auto sample = [&](auto&& fn) {
    std::vector<cd> v(ns);
    for (int m = 0; m < ns; ++m) v[m] = fn(grid.time_at(m));
    return v;
  };

  for (const auto& p : pj) {
    for (const auto& q : pall) {
      const KKey key = canon_kkey({p.first, p.second, +1}, {q.first, q.second, +1});
      if (tab.K_.count(key)) continue;
      tab.K_[key] =
          sample([&](double t) { return dc.K(key.a1, key.b1, key.a2, key.b2, t); });
    }
  }
  for (int j = 0; j < n; ++j) {
    for (const auto& q : pall) {
      tab.M_[{j, q.first, q.second}] =
          sample([&](double t) { return dc.M(j, q.first, q.second, t); });
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int jp = j; jp < n; ++jp) {
      tab.C_[{j, jp}] = sample([&](double t) { return dc.C(j, jp, t); });
    }
  }
  for (const auto& p : pj) {
    for (int kp = 0; kp < n; ++kp) {
      tab.F_[{p.first, p.second, kp}] =
          sample([&](double t) { return dc.f(p.first, p.second, kp, t); });
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int kp = j; kp < n; ++kp) {
      std::vector<double> v(ns);
      for (int m = 0; m < ns; ++m) v[m] = dc.h(j, kp, grid.time_at(m));
      tab.H_[{j, kp}] = std::move(v);
    }
  }
  return tab;
}

PolaronFrame build_frame_discrete(const SiteHamiltonian& hamiltonian, const DiscreteBath& bath,
                                  const WeightingFunction& weighting, double temperature_K) {
  hamiltonian.validate();
  if (bath.n_sites() != hamiltonian.n_sites) {
    throw ConfigError("bath and system disagree on the number of sites");
  }
  const DiscreteCorr dc(bath, weighting, temperature_K);
  const int n = hamiltonian.n_sites;
  PolaronFrame frame;
  frame.e_tilde.resize(n);
  for (int j = 0; j < n; ++j) frame.e_tilde[j] = hamiltonian.energies[j] - dc.shift(j);
  frame.w = Eigen::MatrixXd::Ones(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      frame.w(j, k) = frame.w(k, j) = dc.debye_waller(j, k);
    }
  }
  frame.j_tilde = frame.w.cwiseProduct(hamiltonian.couplings);
  Eigen::MatrixXd h_dressed = frame.j_tilde;
  h_dressed.diagonal() = frame.e_tilde;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_dressed);
  frame.eigenvalues = solver.eigenvalues();
  frame.u = solver.eigenvectors();
  for (int p = 0; p < n; ++p) {
    int arg = 0;
    double best = -1.0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(frame.u(j, p)) > best) {
        best = std::abs(frame.u(j, p));
        arg = j;
      }
    }
    if (frame.u(arg, p) < 0.0) frame.u.col(p) = -frame.u.col(p);
  }
  frame.gaps.resize(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) frame.gaps(p, q) = frame.eigenvalues[p] - frame.eigenvalues[q];
  }
  return frame;
}

// ---------------------------------------------------------------------------
// FockSpaceModel
// ---------------------------------------------------------------------------

FockSpaceModel::FockSpaceModel(const SiteHamiltonian& system, const DiscreteBath& bath,
                               int cutoff)
    : system_(system), bath_(bath), cutoff_(cutoff) {
  system_.validate();
  if (bath_.n_sites() != system_.n_sites) {
    throw ConfigError("bath and system disagree on the number of sites");
  }
  if (cutoff_ < 2) throw ConfigError("Fock space: cutoff must be >= 2");
  double d = 1.0;
  for (int nmode = 0; nmode < bath_.n_modes(); ++nmode) d *= cutoff_;
  if (d * system_.n_sites > 4096.0) {
    throw ConfigError("Fock space: dimension exceeds the dense-solver budget (4096)");
  }
  bath_dim_ = static_cast<int>(d);
  occ_.resize(static_cast<size_t>(bath_dim_) * bath_.n_modes());
  for (int s = 0; s < bath_dim_; ++s) {
    int rem = s;
    for (int nmode = 0; nmode < bath_.n_modes(); ++nmode) {
      occ_[static_cast<size_t>(s) * bath_.n_modes() + nmode] = rem % cutoff_;
      rem /= cutoff_;
    }
  }
}

Eigen::MatrixXd FockSpaceModel::annihilation(int mode) const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(bath_dim_, bath_dim_);
  int stride = 1;
  for (int nmode = 0; nmode < mode; ++nmode) stride *= cutoff_;
  for (int s = 0; s < bath_dim_; ++s) {
    const int occ = occ_[static_cast<size_t>(s) * bath_.n_modes() + mode];
    if (occ >= 1) b(s - stride, s) = std::sqrt(static_cast<double>(occ));
  }
  return b;
}

Eigen::VectorXd FockSpaceModel::bath_energies() const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(bath_dim_);
  for (int s = 0; s < bath_dim_; ++s) {
    for (int nmode = 0; nmode < bath_.n_modes(); ++nmode) {
      e[s] += bath_.omega[nmode] * occ_[static_cast<size_t>(s) * bath_.n_modes() + nmode];
    }
  }
  return e;
}

Eigen::VectorXd FockSpaceModel::thermal_weights(double temperature_K) const {
  const double beta = units::beta_from_temperature(temperature_K);
  const Eigen::VectorXd e = bath_energies();
  Eigen::VectorXd w = (-beta * e.array()).exp();
  return w / w.sum();
}

Eigen::MatrixXd FockSpaceModel::displacement(int j, const WeightingFunction& weighting) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(bath_dim_, bath_dim_);
  for (int nmode = 0; nmode < bath_.n_modes(); ++nmode) {
    const double lam = bath_.g(nmode, j) * weighting.weight(bath_.omega[nmode]);
    if (lam == 0.0) continue;
    const Eigen::MatrixXd b = annihilation(nmode);
    a += lam * (b.transpose() - b);
  }
  // exp of a real antisymmetric matrix via the Hermitian form i a.
  const Eigen::MatrixXcd ia = cd{0.0, 1.0} * a.cast<cd>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ia);
  const Eigen::VectorXcd ph =
      (cd{0.0, -1.0} * es.eigenvalues().cast<cd>().array()).exp();
  const Eigen::MatrixXcd ex =
      es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return ex.real();
}

Eigen::MatrixXcd FockSpaceModel::heisenberg(const Eigen::MatrixXcd& op, double t_fs) const {
  const Eigen::VectorXd e = bath_energies();
  Eigen::MatrixXcd out(bath_dim_, bath_dim_);
  for (int a = 0; a < bath_dim_; ++a) {
    for (int b = 0; b < bath_dim_; ++b) {
      out(a, b) = op(a, b) * std::polar(1.0, (e[a] - e[b]) * t_fs / units::hbar_cmfs);
    }
  }
  return out;
}

Eigen::MatrixXcd FockSpaceModel::dressed_hop(int j, int k, const WeightingFunction& weighting,
                                             double t_fs) const {
  const Eigen::MatrixXd v =
      displacement(j, weighting) * displacement(k, weighting).transpose();
  return heisenberg(v.cast<cd>(), t_fs);
}

Eigen::MatrixXcd FockSpaceModel::residual_coupling(int j, const WeightingFunction& weighting,
                                                   double t_fs) const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(bath_dim_, bath_dim_);
  for (int nmode = 0; nmode < bath_.n_modes(); ++nmode) {
    const double a =
        bath_.omega[nmode] * bath_.g(nmode, j) * weighting.one_minus(bath_.omega[nmode]);
    if (a == 0.0) continue;
    const Eigen::MatrixXd b = annihilation(nmode);
    d += a * (b + b.transpose());
  }
  return heisenberg(d.cast<cd>(), t_fs);
}

// ---------------------------------------------------------------------------
// exact_propagate
// ---------------------------------------------------------------------------

std::vector<Eigen::MatrixXcd> exact_propagate(const FockSpaceModel& model,
                                              double temperature_K,
                                              const Eigen::MatrixXcd& sigma0_site,
                                              const std::vector<double>& t_fs) {
  const int n = model.system().n_sites;
  const int bd = model.bath_dim();
  const int dim = model.dim();
  if (sigma0_site.rows() != n || sigma0_site.cols() != n) {
    throw ConfigError("initial density matrix must be n_sites x n_sites");
  }

  // Full lab-frame Hamiltonian with the bare coupling.
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::VectorXd be = model.bath_energies();
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(bd, bd);
    blk.diagonal() = be.array() + model.system().energies[j];
    for (int nmode = 0; nmode < model.bath().n_modes(); ++nmode) {
      const double a = model.bath().omega[nmode] * model.bath().g(nmode, j);
      if (a == 0.0) continue;
      const Eigen::MatrixXd b = model.annihilation(nmode);
      blk += a * (b + b.transpose());
    }
    h.block(j * bd, j * bd, bd, bd) = blk;
    for (int k = 0; k < n; ++k) {
      if (k != j && model.system().couplings(j, k) != 0.0) {
        h.block(j * bd, k * bd, bd, bd) =
            model.system().couplings(j, k) * Eigen::MatrixXd::Identity(bd, bd);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::VectorXd& lam = es.eigenvalues();

  // rho(0) = sigma0 (x) rho_th: untransformed product of the system state
  // with the bare thermal bath.
  const Eigen::VectorXd th = model.thermal_weights(temperature_K);
  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (sigma0_site(j, k) == cd{0.0, 0.0}) continue;
      rho0.block(j * bd, k * bd, bd, bd).diagonal() =
          (sigma0_site(j, k) * th.array()).matrix().cast<cd>();
    }
  }

  const Eigen::MatrixXcd r0 = v.transpose().cast<cd>() * rho0 * v.cast<cd>();
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(t_fs.size());
  Eigen::MatrixXcd rt(dim, dim);
  for (const double t : t_fs) {
    Eigen::VectorXcd ph(dim);
    for (int a = 0; a < dim; ++a) ph[a] = std::polar(1.0, -lam[a] * t / units::hbar_cmfs);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) rt(a, b) = r0(a, b) * ph[a] * std::conj(ph[b]);
    }
    const Eigen::MatrixXcd rho_t = v.cast<cd>() * rt * v.transpose().cast<cd>();
    Eigen::MatrixXcd red(n, n);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) red(j, k) = rho_t.block(j * bd, k * bd, bd, bd).trace();
    }
    out.push_back(red);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conventional time-local reference tensor
// ---------------------------------------------------------------------------

namespace {

// Int_0^t e^{i mu s} ds, stable for small |mu t|.
cd phase_integral(double mu, double t) {
  const double x = mu * t;
  if (std::abs(x) < 1e-4) {
    return cd{t, 0.0} * (cd{1.0, 0.0} + cd{0.0, x / 2.0} + cd{-x * x / 6.0, 0.0});
  }
  return (std::polar(1.0, x) - cd{1.0, 0.0}) / cd{0.0, mu};
}

}  // namespace

Eigen::MatrixXcd conventional_R(const SpectralDensityModel& density,
                                const QuadratureScheme& scheme, const PolaronFrame& frame,
                                double temperature_K, double t_fs) {
  const int n = frame.n_sites();
  const double beta = units::beta_from_temperature(temperature_K);
  const NodeSet nodes = build_nodes(scheme, density.omega_c(), std::nullopt);
  const size_t nn = nodes.omega.size();
  std::vector<double> coth(nn);
  for (size_t i = 0; i < nn; ++i) coth[i] = units::thermal_coth(0.5 * beta * nodes.omega[i]);

  // Lam_j(t)_pq = sum_j' U_j'p U_j'q e^{i dE_pq t/hb}
  //                 Int_0^t ds C_jj'(s) e^{-i dE_pq s/hb},
  // with the node integrals done analytically:
  //   Int cos(a s) e^{i b s} = (pi(b+a) + pi(b-a)) / 2,
  //   Int sin(a s) e^{i b s} = (pi(b+a) - pi(b-a)) / 2i.
  std::vector<Eigen::MatrixXcd> lam(n, Eigen::MatrixXcd::Zero(n, n));
  for (int j = 0; j < n; ++j) {
    for (int jp = 0; jp < n; ++jp) {
      if (!density.pair_coupled(j, jp)) continue;
      Eigen::MatrixXcd integral = Eigen::MatrixXcd::Zero(n, n);
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          const double b = -frame.gaps(p, q) / units::hbar_cmfs;
          cd acc{0.0, 0.0};
          for (size_t i = 0; i < nn; ++i) {
            const double a_rate = nodes.omega[i] / units::hbar_cmfs;
            const double amp =
                nodes.wq[i] / std::numbers::pi * density.density(j, jp, nodes.omega[i]);
            const cd ic = 0.5 * (phase_integral(b + a_rate, t_fs) + phase_integral(b - a_rate, t_fs));
            const cd is = (phase_integral(b + a_rate, t_fs) - phase_integral(b - a_rate, t_fs)) /
                          cd{0.0, 2.0};
            acc += amp * (coth[i] * ic - cd{0.0, 1.0} * is);
          }
          integral(p, q) = acc;
        }
      }
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          lam[j](p, q) += frame.u(jp, p) * frame.u(jp, q) *
                          std::polar(1.0, frame.gaps(p, q) * t_fs / units::hbar_cmfs) *
                          integral(p, q);
        }
      }
    }
  }

  std::vector<Eigen::MatrixXcd> proj(n, Eigen::MatrixXcd::Zero(n, n));
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        proj[j](p, q) = frame.u(j, p) * frame.u(j, q) *
                        std::polar(1.0, frame.gaps(p, q) * t_fs / units::hbar_cmfs);
      }
    }
  }

  // Columns are the images of the unit matrices E_{p'q'}.
  Eigen::MatrixXcd r(n * n, n * n);
  const double inv_hb2 = 1.0 / (units::hbar_cmfs * units::hbar_cmfs);
  for (int pp = 0; pp < n; ++pp) {
    for (int qq = 0; qq < n; ++qq) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
      e(pp, qq) = 1.0;
      Eigen::MatrixXcd col = Eigen::MatrixXcd::Zero(n, n);
      for (int j = 0; j < n; ++j) {
        const Eigen::MatrixXcd le = lam[j] * e;
        const Eigen::MatrixXcd el = e * lam[j].adjoint();
        col += proj[j] * le - le * proj[j] + el * proj[j] - proj[j] * el;
      }
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) r(p * n + q, pp * n + qq) = inv_hb2 * col(p, q);
      }
    }
  }
  return r;
}

}  // namespace ppqme
