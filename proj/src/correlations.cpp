#include "ppqme/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ppqme/polaron.hpp"
#include "ppqme/units.hpp"

namespace ppqme {

namespace {

struct CanonPair {
  int a, b;
  int sign;
};

CanonPair canon_pair(int j, int k) {
  return j < k ? CanonPair{j, k, +1} : CanonPair{k, j, -1};
}

KKey canon_kkey(const CanonPair& p, const CanonPair& q) {
  // Pair-exchange symmetry K_{jk,j'k'} = K_{j'k',jk}: order the two pairs.
  if (std::pair{p.a, p.b} <= std::pair{q.a, q.b}) return {p.a, p.b, q.a, q.b};
  return {q.a, q.b, p.a, p.b};
}

std::string pair_name(int a, int b) {
  return std::to_string(a + 1) + std::to_string(b + 1);
}

// Per-node precomputed quantities shared by every combination.
struct NodeData {
  const NodeSet* nodes;
  std::vector<double> W, oneW, coth, cos_step, sin_step;
  double half_step_fs;
};

// Accumulates sum_i a_i * (re_factor_i cos th_im - i im_factor_i sin th_im)
// over the time grid with th_im = omega_i t_m / hbar, using a per-node phase
// rotor resynchronized every 512 samples.  Skips nodes whose |profile| is
// negligible against the largest one.
std::vector<cd> accumulate_oscillatory(const NodeData& nd, const std::vector<double>& re_amp,
                                       const std::vector<double>& im_amp, int n_samples) {
  std::vector<cd> out(n_samples, cd{0.0, 0.0});
  double max_amp = 0.0;
  for (size_t i = 0; i < re_amp.size(); ++i) {
    max_amp = std::max(max_amp, std::max(std::abs(re_amp[i]), std::abs(im_amp[i])));
  }
  const double cutoff = 1e-18 * max_amp;
  for (size_t i = 0; i < re_amp.size(); ++i) {
    const double ar = re_amp[i], ai = im_amp[i];
    if (std::abs(ar) < cutoff && std::abs(ai) < cutoff) continue;
    const double cs = nd.cos_step[i], ss = nd.sin_step[i];
    const double theta_step = nd.nodes->omega[i] * nd.half_step_fs / units::hbar_cmfs;
    double c = 1.0, s = 0.0;
    cd* o = out.data();
    for (int m = 0; m < n_samples; ++m) {
      o[m] += cd{ar * c, -ai * s};
      if ((m & 511) == 511) {
        c = std::cos(theta_step * (m + 1));
        s = std::sin(theta_step * (m + 1));
      } else {
        const double cn = c * cs - s * ss;
        s = s * cs + c * ss;
        c = cn;
      }
    }
  }
  return out;
}

// Real variants for the f exponent (sin) and for h (cos).
std::vector<double> accumulate_real(const NodeData& nd, const std::vector<double>& amp,
                                    bool use_cos, int n_samples) {
  std::vector<double> out(n_samples, 0.0);
  double max_amp = 0.0;
  for (double a : amp) max_amp = std::max(max_amp, std::abs(a));
  const double cutoff = 1e-18 * max_amp;
  for (size_t i = 0; i < amp.size(); ++i) {
    const double a = amp[i];
    if (std::abs(a) < cutoff) continue;
    const double cs = nd.cos_step[i], ss = nd.sin_step[i];
    const double theta_step = nd.nodes->omega[i] * nd.half_step_fs / units::hbar_cmfs;
    double c = 1.0, s = 0.0;
    for (int m = 0; m < n_samples; ++m) {
      out[m] += a * (use_cos ? c : s);
      if ((m & 511) == 511) {
        c = std::cos(theta_step * (m + 1));
        s = std::sin(theta_step * (m + 1));
      } else {
        const double cn = c * cs - s * ss;
        s = s * cs + c * ss;
        c = cn;
      }
    }
  }
  return out;
}

std::vector<std::pair<int, int>> canonical_pair_set(const std::vector<std::pair<int, int>>& in,
                                                    int n_sites, const char* what) {
  std::set<std::pair<int, int>> seen;
  for (auto [j, k] : in) {
    if (j < 0 || k < 0 || j >= n_sites || k >= n_sites) {
      throw ConfigError(std::string(what) + ": site index out of range");
    }
    if (j == k) continue;  // diagonal pairs carry no two-site correlation
    seen.insert({std::min(j, k), std::max(j, k)});
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// build_tables
// ---------------------------------------------------------------------------

CorrelationTables build_tables(const SpectralDensityModel& density,
                               const WeightingFunction& weighting,
                               const QuadratureScheme& scheme, const TimeGrid& grid,
                               double temperature_K,
                               const std::vector<std::pair<int, int>>& coupling_pairs,
                               const std::vector<std::pair<int, int>>& initial_pairs) {
  if (grid.n_steps < 1) throw ConfigError("time grid: n_steps must be >= 1");
  if (!(grid.dt_fs > 0.0)) throw ConfigError("time grid: dt_fs must be > 0");
  const int n = density.n_sites();
  const double beta = units::beta_from_temperature(temperature_K);

  const auto pj = canonical_pair_set(coupling_pairs, n, "coupling pairs");
  auto pall = pj;
  for (auto p : canonical_pair_set(initial_pairs, n, "initial pairs")) {
    if (std::find(pall.begin(), pall.end(), p) == pall.end()) pall.push_back(p);
  }
  std::sort(pall.begin(), pall.end());

  std::optional<double> breakpoint;
  if (weighting.kind == WeightingKind::Step || weighting.kind == WeightingKind::Smooth) {
    breakpoint = weighting.omega_h;
  }
  const NodeSet nodes = build_nodes(scheme, density.omega_c(), breakpoint);
  const size_t nn = nodes.omega.size();

  NodeData nd;
  nd.nodes = &nodes;
  nd.half_step_fs = grid.half_step();
  nd.W.resize(nn);
  nd.oneW.resize(nn);
  nd.coth.resize(nn);
  nd.cos_step.resize(nn);
  nd.sin_step.resize(nn);
  for (size_t i = 0; i < nn; ++i) {
    const double w = nodes.omega[i];
    nd.W[i] = weighting.weight(w);
    nd.oneW[i] = weighting.one_minus(w);
    nd.coth[i] = units::thermal_coth(0.5 * beta * w);
    const double th = w * nd.half_step_fs / units::hbar_cmfs;
    nd.cos_step[i] = std::cos(th);
    nd.sin_step[i] = std::sin(th);
  }

  CorrelationTables tab;
  tab.grid_ = grid;
  tab.n_sites_ = n;
  const int ns = grid.n_samples();
  const double inv_pi = 1.0 / std::numbers::pi;

  std::vector<double> amp(nn), amp2(nn), profile(nn);

  // K_{jk,j'k'}: one canonical combination per { coupling pair } x
  // { coupling or initial pair }.
  for (const auto& p : pj) {
    for (const auto& q : pall) {
      const KKey key = canon_kkey({p.first, p.second, +1}, {q.first, q.second, +1});
      if (tab.K_.count(key)) continue;
      for (size_t i = 0; i < nn; ++i) {
        const double w = nodes.omega[i];
        const double a = inv_pi * nodes.wq[i] *
                         density.aux_density_2(key.a1, key.b1, key.a2, key.b2, w) / (w * w) *
                         nd.W[i] * nd.W[i];
        amp[i] = a * nd.coth[i];
        amp2[i] = a;
        profile[i] = std::abs(amp[i]);
      }
      check_ir_convergence(nodes, profile,
                           "K_{" + pair_name(key.a1, key.b1) + "," + pair_name(key.a2, key.b2) + "}");
      tab.K_[key] = accumulate_oscillatory(nd, amp, amp2, ns);
    }
  }

  // M_{j,j'k'}: every site against every reachable pair.
  for (int j = 0; j < n; ++j) {
    for (const auto& q : pall) {
      for (size_t i = 0; i < nn; ++i) {
        const double w = nodes.omega[i];
        const double a = inv_pi * nodes.wq[i] * density.aux_density_1(j, q.first, q.second, w) /
                         w * nd.oneW[i] * nd.W[i];
        amp[i] = a;
        amp2[i] = a * nd.coth[i];
        profile[i] = std::abs(amp2[i]);
      }
      check_ir_convergence(nodes, profile,
                           "M_{" + std::to_string(j + 1) + "," + pair_name(q.first, q.second) + "}");
      tab.M_[{j, q.first, q.second}] = accumulate_oscillatory(nd, amp, amp2, ns);
    }
  }

  // C_{jj'}: all coupled site pairs (diagonals always).
  for (int j = 0; j < n; ++j) {
    for (int jp = j; jp < n; ++jp) {
      if (j != jp && !density.pair_coupled(j, jp)) continue;
      for (size_t i = 0; i < nn; ++i) {
        const double w = nodes.omega[i];
        const double a = inv_pi * nodes.wq[i] * density.density(j, jp, w) * nd.oneW[i] * nd.oneW[i];
        amp[i] = a * nd.coth[i];
        amp2[i] = a;
        profile[i] = std::abs(amp[i]);
      }
      check_ir_convergence(nodes, profile, "C_{" + std::to_string(j + 1) + std::to_string(jp + 1) + "}");
      tab.C_[{j, jp}] = accumulate_oscillatory(nd, amp, amp2, ns);
    }
  }

  // f_{jk,k'}: phase exponent from a pure sine series.
  for (const auto& p : pj) {
    for (int kp = 0; kp < n; ++kp) {
      for (size_t i = 0; i < nn; ++i) {
        const double w = nodes.omega[i];
        amp[i] = 2.0 * inv_pi * nodes.wq[i] * density.aux_density_1(kp, p.first, p.second, w) /
                 (w * w) * nd.W[i] * nd.W[i];
        profile[i] = std::abs(amp[i]);
      }
      check_ir_convergence(nodes, profile,
                           "f_{" + pair_name(p.first, p.second) + "," + std::to_string(kp + 1) + "}");
      const auto phase = accumulate_real(nd, amp, /*use_cos=*/false, ns);
      std::vector<cd> fv(ns);
      for (int m = 0; m < ns; ++m) fv[m] = std::polar(1.0, phase[m]);
      tab.F_[{p.first, p.second, kp}] = std::move(fv);
    }
  }

  // h_{j,k'}: all coupled site pairs.
  for (int j = 0; j < n; ++j) {
    for (int kp = j; kp < n; ++kp) {
      if (j != kp && !density.pair_coupled(j, kp)) continue;
      for (size_t i = 0; i < nn; ++i) {
        const double w = nodes.omega[i];
        amp[i] = 2.0 * inv_pi * nodes.wq[i] * density.density(j, kp, w) / w * nd.oneW[i] * nd.W[i];
        profile[i] = std::abs(amp[i]);
      }
      check_ir_convergence(nodes, profile,
                           "h_{" + std::to_string(j + 1) + "," + std::to_string(kp + 1) + "}");
      tab.H_[{j, kp}] = accumulate_real(nd, amp, /*use_cos=*/true, ns);
    }
  }

  return tab;
}

// ---------------------------------------------------------------------------
// CorrelationTables accessors
// ---------------------------------------------------------------------------

namespace {
[[noreturn]] void missing_combo(const char* table, const std::string& detail) {
  throw std::logic_error(std::string("correlation tables: missing ") + table + " combination " +
                         detail + " (not reachable from the configured pairs)");
}
}  // namespace

cd CorrelationTables::corr_K(int j, int k, int jp, int kp, int m) const {
  if (j == k || jp == kp) return {0.0, 0.0};
  const auto p = canon_pair(j, k);
  const auto q = canon_pair(jp, kp);
  const auto it = K_.find(canon_kkey(p, q));
  if (it == K_.end()) missing_combo("K", pair_name(j, k) + "," + pair_name(jp, kp));
  return static_cast<double>(p.sign * q.sign) * it->second[m];
}

cd CorrelationTables::corr_M(int j, int jp, int kp, int m) const {
  if (jp == kp) return {0.0, 0.0};
  const auto q = canon_pair(jp, kp);
  const auto it = M_.find({j, q.a, q.b});
  if (it == M_.end()) missing_combo("M", std::to_string(j + 1) + "," + pair_name(jp, kp));
  return static_cast<double>(q.sign) * it->second[m];
}

cd CorrelationTables::corr_C(int j, int jp, int m) const {
  const auto it = C_.find({std::min(j, jp), std::max(j, jp)});
  if (it == C_.end()) return {0.0, 0.0};  // uncoupled pair
  return it->second[m];
}

cd CorrelationTables::phase_f(int j, int k, int kp, int m) const {
  if (j == k) return {1.0, 0.0};
  const auto p = canon_pair(j, k);
  const auto it = F_.find({p.a, p.b, kp});
  if (it == F_.end()) missing_combo("f", pair_name(j, k) + "," + std::to_string(kp + 1));
  return p.sign > 0 ? it->second[m] : std::conj(it->second[m]);
}

double CorrelationTables::real_h(int j, int kp, int m) const {
  const auto it = H_.find({std::min(j, kp), std::max(j, kp)});
  if (it == H_.end()) return 0.0;  // uncoupled pair
  return it->second[m];
}

// ---------------------------------------------------------------------------
// Kernel integrals
// ---------------------------------------------------------------------------

std::vector<cd> cumulative_simpson(const std::vector<cd>& g, double step) {
  const int n = static_cast<int>(g.size());
  std::vector<cd> out(n, cd{0.0, 0.0});
  if (n >= 3) {
    out[1] = step / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2]);
  } else if (n == 2) {
    out[1] = step / 2.0 * (g[0] + g[1]);
  }
  for (int m = 2; m < n; ++m) {
    out[m] = out[m - 2] + step / 3.0 * (g[m - 2] + 4.0 * g[m - 1] + g[m]);
  }
  return out;
}

KernelIntegrals kernel_integrals(const CorrelationTables& tables,
                                 const Eigen::VectorXd& eigenvalues,
                                 const Eigen::MatrixXd& j_tilde) {
  const int n = tables.n_sites();
  if (eigenvalues.size() != n || j_tilde.rows() != n || j_tilde.cols() != n) {
    throw std::invalid_argument("kernel_integrals: dimension mismatch with tables");
  }
  KernelIntegrals ki;
  ki.grid_ = tables.grid();
  ki.n_sites_ = n;
  ki.n_sites_eigen_ = n;
  ki.j_tilde_ = j_tilde;
  const int ns = ki.grid_.n_samples();
  const double step = ki.grid_.half_step();

  // Phase factors e^{i dE_ab t_m / hbar} per ordered eigenpair.
  std::vector<std::vector<cd>> phase(n * n, std::vector<cd>(ns));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double gap = eigenvalues[a] - eigenvalues[b];
      auto& ph = phase[a * n + b];
      for (int m = 0; m < ns; ++m) {
        ph[m] = std::polar(1.0, gap * ki.grid_.time_at(m) / units::hbar_cmfs);
      }
    }
  }

  std::vector<cd> gbuf(ns);
  const auto chain_all_gaps = [&](const std::vector<cd>& integrand) {
    std::vector<std::vector<cd>> per_gap(n * n);
    for (int ab = 0; ab < n * n; ++ab) {
      const auto& ph = phase[ab];
      for (int m = 0; m < ns; ++m) gbuf[m] = ph[m] * integrand[m];
      per_gap[ab] = cumulative_simpson(gbuf, step);
    }
    return per_gap;
  };

  std::vector<cd> em(ns), ep(ns);
  for (const auto& [key, kv] : tables.k_table()) {
    for (int m = 0; m < ns; ++m) {
      em[m] = std::exp(-kv[m]) - 1.0;
      ep[m] = std::exp(kv[m]) - 1.0;
    }
    ki.Wm_[key] = chain_all_gaps(em);
    ki.Wp_[key] = chain_all_gaps(ep);
  }
  for (const auto& [key, mv] : tables.m_table()) ki.Y_[key] = chain_all_gaps(mv);
  for (const auto& [key, cv] : tables.c_table()) ki.X_[key] = chain_all_gaps(cv);
  return ki;
}

KernelIntegrals kernel_integrals(const CorrelationTables& tables, const PolaronFrame& frame) {
  return kernel_integrals(tables, frame.eigenvalues, frame.j_tilde);
}

cd KernelIntegrals::W(int a, int b, int j, int k, int jp, int kp, int m) const {
  if (j == k || jp == kp) return {0.0, 0.0};
  const double jt = j_tilde_(j, k) * j_tilde_(jp, kp);
  if (jt == 0.0) return {0.0, 0.0};
  const auto p = canon_pair(j, k);
  const auto q = canon_pair(jp, kp);
  const auto& table = (p.sign * q.sign > 0) ? Wm_ : Wp_;
  const auto it = table.find(canon_kkey(p, q));
  if (it == table.end()) missing_combo("W", pair_name(j, k) + "," + pair_name(jp, kp));
  return jt * it->second[gap_index(a, b)][m];
}

cd KernelIntegrals::Y(int a, int b, int j, int jp, int kp, int m) const {
  if (jp == kp) return {0.0, 0.0};
  const double jt = j_tilde_(jp, kp);
  if (jt == 0.0) return {0.0, 0.0};
  const auto q = canon_pair(jp, kp);
  const auto it = Y_.find({j, q.a, q.b});
  if (it == Y_.end()) missing_combo("Y", std::to_string(j + 1) + "," + pair_name(jp, kp));
  return static_cast<double>(q.sign) * jt * it->second[gap_index(a, b)][m];
}

cd KernelIntegrals::X(int a, int b, int j, int jp, int m) const {
  const auto it = X_.find({std::min(j, jp), std::max(j, jp)});
  if (it == X_.end()) return {0.0, 0.0};
  return it->second[gap_index(a, b)][m];
}

}  // namespace ppqme
