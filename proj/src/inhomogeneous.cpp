#include "ppqme/inhomogeneous.hpp"

#include <cmath>
#include <vector>

#include "ppqme/errors.hpp"
#include "ppqme/units.hpp"

namespace ppqme {

namespace {

// Ordered index pairs (j, k) contributing to a hopping sum: off-diagonal
// pairs with a nonzero coupling, plus every diagonal (j, j) for the
// displacement channel.
std::vector<std::pair<int, int>> hopping_index_set(const Eigen::MatrixXd& coupling_like) {
  const int n = static_cast<int>(coupling_like.rows());
  std::vector<std::pair<int, int>> idx;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k || coupling_like(j, k) != 0.0) idx.emplace_back(j, k);
    }
  }
  return idx;
}

std::vector<std::pair<int, int>> sigma_support(const Eigen::MatrixXcd& sigma0) {
  std::vector<std::pair<int, int>> s;
  for (int j = 0; j < sigma0.rows(); ++j) {
    for (int k = 0; k < sigma0.cols(); ++k) {
      if (sigma0(j, k) != cd{0.0, 0.0}) s.emplace_back(j, k);
    }
  }
  return s;
}

Eigen::MatrixXcd phase_matrix(const PolaronFrame& frame, double t_fs) {
  const int n = frame.n_sites();
  Eigen::MatrixXcd ph(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      ph(a, b) = std::polar(1.0, frame.gaps(a, b) * t_fs / units::hbar_cmfs);
    }
  }
  return ph;
}

void check_sigma0(const Eigen::MatrixXcd& sigma0, int n) {
  if (sigma0.rows() != n || sigma0.cols() != n) {
    throw ConfigError("initial density matrix must be n_sites x n_sites");
  }
}

}  // namespace

Eigen::MatrixXcd inhom1(const CorrelationTables& tables, const PolaronFrame& frame,
                        const Eigen::MatrixXcd& sigma0_site, int m) {
  const int n = frame.n_sites();
  check_sigma0(sigma0_site, n);
  const auto& u = frame.u;
  const double t_fs = tables.grid().time_at(m);
  const Eigen::MatrixXcd ph = phase_matrix(frame, t_fs);
  const cd minus_i_over_hb{0.0, -1.0 / units::hbar_cmfs};

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (auto [jp, kp] : sigma_support(sigma0_site)) {
    const cd s0w = sigma0_site(jp, kp) * frame.w(jp, kp);
    for (auto [j, k] : hopping_index_set(frame.j_tilde)) {
      // Phi_{jk,j'k'}(t): dressed-hopping channel for j != k, bath
      // displacement channel on the diagonal.
      cd phi;
      if (j != k) {
        phi = frame.j_tilde(j, k) * (std::exp(-tables.corr_K(j, k, jp, kp, m)) *
                                         tables.phase_f(j, k, kp, m) -
                                     1.0);
      } else {
        phi = tables.corr_M(j, jp, kp, m) + cd{tables.real_h(j, kp, m), 0.0};
      }
      if (phi == cd{0.0, 0.0}) continue;
      const cd pref = minus_i_over_hb * s0w * phi;
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          cd acc{0.0, 0.0};
          for (int r = 0; r < n; ++r) {
            acc += u(j, p) * u(k, r) * u(jp, r) * u(kp, q) * ph(p, r) -
                   u(j, r) * u(k, q) * u(jp, p) * u(kp, r) * ph(r, q);
          }
          out(p, q) += pref * acc;
        }
      }
    }
  }
  return out;
}

cd kernel_F(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int k, int jp,
            int kp, int j2, int k2, int mt, int mtau) {
  const cd a1 = tables.phase_f(j, k, k2, mt) * std::exp(-tables.corr_K(j, k, j2, k2, mt));
  const cd a2 =
      tables.phase_f(jp, kp, k2, mtau) * std::exp(-tables.corr_K(jp, kp, j2, k2, mtau));
  const cd em = std::exp(-tables.corr_K(j, k, jp, kp, mt - mtau));
  return w(j, k) * w(jp, kp) * w(j2, k2) * (em * (a1 * a2 - 1.0) - a1 - a2 + 2.0);
}

cd kernel_H1(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int jp, int kp,
             int j2, int k2, int mt, int mtau) {
  const cd a2 =
      tables.phase_f(jp, kp, k2, mtau) * std::exp(-tables.corr_K(jp, kp, j2, k2, mtau));
  return (a2 - 1.0) * w(jp, kp) * w(j2, k2) *
         (tables.corr_M(j, jp, kp, mt - mtau) + tables.corr_M(j, j2, k2, mt) +
          cd{tables.real_h(j, k2, mt), 0.0});
}

cd kernel_H2(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int k, int jp,
             int j2, int k2, int mt, int mtau) {
  const cd a1 = tables.phase_f(j, k, k2, mt) * std::exp(-tables.corr_K(j, k, j2, k2, mt));
  return (a1 - 1.0) * w(j, k) * w(j2, k2) *
         (tables.corr_M(jp, k, j, mt - mtau) + tables.corr_M(jp, j2, k2, mtau) +
          cd{tables.real_h(jp, k2, mtau), 0.0});
}

cd kernel_L(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int jp, int j2,
            int k2, int mt, int mtau) {
  return w(j2, k2) *
         (tables.corr_M(j, j2, k2, mt) + cd{tables.real_h(j, k2, mt), 0.0}) *
         (tables.corr_M(jp, j2, k2, mtau) + cd{tables.real_h(jp, k2, mtau), 0.0});
}

Eigen::MatrixXcd inhom2(const CorrelationTables& tables, const PolaronFrame& frame,
                        const Eigen::MatrixXd& bare_couplings,
                        const Eigen::MatrixXcd& sigma0_site, int m) {
  const int n = frame.n_sites();
  check_sigma0(sigma0_site, n);
  Eigen::MatrixXcd a_block = Eigen::MatrixXcd::Zero(n, n);
  if (m == 0) return a_block;

  const auto& u = frame.u;
  const auto& w = frame.w;
  const double t_fs = tables.grid().time_at(m);
  const double step = tables.grid().half_step();
  const Eigen::MatrixXcd ph = phase_matrix(frame, t_fs);
  const double inv_hb2 = 1.0 / (units::hbar_cmfs * units::hbar_cmfs);
  const auto idx = hopping_index_set(bare_couplings);

  std::vector<cd> g(m + 1), gph(m + 1);
  Eigen::MatrixXcd gt(n, n);  // gt(a, b) = Int_0^t dtau e^{i dE_ab (t - tau)/hb} G(t, tau)

  for (auto [j2, k2] : sigma_support(sigma0_site)) {
    const cd s0 = sigma0_site(j2, k2);
    for (auto [j, k] : idx) {
      for (auto [jp, kp] : idx) {
        const double cpl =
            (j != k ? bare_couplings(j, k) : 1.0) * (jp != kp ? bare_couplings(jp, kp) : 1.0);
        for (int i = 0; i <= m; ++i) {
          if (j != k && jp != kp) {
            g[i] = kernel_F(tables, w, j, k, jp, kp, j2, k2, m, i);
          } else if (j == k && jp != kp) {
            g[i] = kernel_H1(tables, w, j, jp, kp, j2, k2, m, i);
          } else if (j != k && jp == kp) {
            g[i] = kernel_H2(tables, w, j, k, jp, j2, k2, m, i);
          } else {
            g[i] = kernel_L(tables, w, j, jp, j2, k2, m, i);
          }
          g[i] *= cpl;
        }
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            const double rate = frame.gaps(a, b) / units::hbar_cmfs;
            for (int i = 0; i <= m; ++i) {
              gph[i] = std::polar(1.0, rate * (t_fs - tables.grid().time_at(i))) * g[i];
            }
            gt(a, b) = cumulative_simpson(gph, step)[m];
          }
        }
        for (int p = 0; p < n; ++p) {
          for (int q = 0; q < n; ++q) {
            cd val{0.0, 0.0};
            for (int pp = 0; pp < n; ++pp) {
              // q' = q branch, summed over the intermediate eigenstate r
              cd first{0.0, 0.0};
              for (int r = 0; r < n; ++r) {
                first += u(j, p) * u(k, r) * u(jp, r) * u(kp, pp) * gt(pp, r);
              }
              val += u(j2, pp) * u(k2, q) * ph(p, pp) * first;
              // r = p branch, summed over q'
              for (int qq = 0; qq < n; ++qq) {
                val -= u(j2, pp) * u(k2, qq) * ph(p, pp) * ph(qq, q) *
                       u(j, qq) * u(k, q) * u(jp, p) * u(kp, pp) * gt(pp, p);
              }
            }
            a_block(p, q) -= inv_hb2 * s0 * val;
          }
        }
      }
    }
  }

  Eigen::MatrixXcd out(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) out(p, q) = a_block(p, q) + std::conj(a_block(q, p));
  }
  return out;
}

InhomKernels build_inhom(const CorrelationTables& tables, const PolaronFrame& frame,
                         const Eigen::MatrixXd& bare_couplings,
                         const Eigen::MatrixXcd& sigma0_site, int order) {
  if (order < 0 || order > 2) throw ConfigError("run: inhom_order must be 0, 1, or 2");
  InhomKernels ik;
  ik.order = order;
  ik.grid = tables.grid();
  if (order == 0) return ik;
  const int ns = ik.grid.n_samples();
  ik.term.resize(ns);
  for (int m = 0; m < ns; ++m) {
    ik.term[m] = inhom1(tables, frame, sigma0_site, m);
    if (order == 2) ik.term[m] += inhom2(tables, frame, bare_couplings, sigma0_site, m);
  }
  return ik;
}

}  // namespace ppqme
