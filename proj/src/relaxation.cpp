#include "ppqme/relaxation.hpp"

#include <vector>

#include "ppqme/units.hpp"

namespace ppqme {

namespace {

// Composite kernel entering every relaxation term:
//   Q^{ab}_{jk,j'k'} = W^{ab}_{jk,j'k'} + d_jk Y^{ab}_{j,j'k'}
//                    + d_j'k' Y^{ab}_{j',kj} + d_jk d_j'k' X^{ab}_{jj'}.
// Note the reversed pair (k, j) in the third term.  The sign of the Y
// channel (residual-linear x dressed-hopping cross correlation) is pinned
// by the weak-coupling exact-reference comparison: on a resonant dimer the
// channel grows secularly and flipping it moves the propagated populations
// off the numerically exact dynamics by more than an order of magnitude
// (see the oracle-equivalence case in tests/acceptance_test.cpp).
cd q_kernel(const KernelIntegrals& ki, int a, int b, int j, int k, int jp, int kp, int m) {
  cd q = ki.W(a, b, j, k, jp, kp, m);
  if (j == k) q += ki.Y(a, b, j, jp, kp, m);
  if (jp == kp) q += ki.Y(a, b, jp, k, j, m);
  if (j == k && jp == kp) q += ki.X(a, b, j, jp, m);
  return q;
}

Eigen::MatrixXcd symmetrize_with_conjugate(const Eigen::MatrixXcd& a, int n) {
  // R_{pq}^{p'q'} = A_{pq}^{p'q'} + conj(A_{qp}^{q'p'})
  Eigen::MatrixXcd r(n * n, n * n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      for (int pp = 0; pp < n; ++pp) {
        for (int qq = 0; qq < n; ++qq) {
          r(p * n + q, pp * n + qq) =
              a(p * n + q, pp * n + qq) + std::conj(a(q * n + p, qq * n + pp));
        }
      }
    }
  }
  return r;
}

}  // namespace

RelaxationTensor assemble_R(const KernelIntegrals& ki, const PolaronFrame& frame, int m) {
  const int n = frame.n_sites();
  const auto& u = frame.u;
  const double t_fs = ki.grid().time_at(m);
  const double inv_hb2 = 1.0 / (units::hbar_cmfs * units::hbar_cmfs);

  // Cache Q^{ab}_{jk,j'k'} for all gap and site-index combinations at this
  // sample; the eigenvector contractions below then touch no maps.
  const int n2 = n * n;
  std::vector<cd> qc(static_cast<size_t>(n2) * n2 * n2);
  const auto qidx = [n, n2](int a, int b, int j, int k, int jp, int kp) {
    return ((static_cast<size_t>(a) * n + b) * n2 + (j * n + k)) * n2 + (jp * n + kp);
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int jp = 0; jp < n; ++jp)
            for (int kp = 0; kp < n; ++kp)
              qc[qidx(a, b, j, k, jp, kp)] = q_kernel(ki, a, b, j, k, jp, kp, m);

  // G(al,be,ga,de; a,b) = sum_{jk,j'k'} U_j,al U_k,be U_j',ga U_k',de Q^{ab}
  const auto contract = [&](int al, int be, int ga, int de, int a, int b) {
    cd g{0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double ujk = u(j, al) * u(k, be);
        if (ujk == 0.0) continue;
        for (int jp = 0; jp < n; ++jp) {
          for (int kp = 0; kp < n; ++kp) {
            g += ujk * u(jp, ga) * u(kp, de) * qc[qidx(a, b, j, k, jp, kp)];
          }
        }
      }
    }
    return g;
  };

  // Sink term, diagonal in (q, q'): T1(p, p') = sum_r G(p, r, r, p'; p', r).
  Eigen::MatrixXcd t1 = Eigen::MatrixXcd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int pp = 0; pp < n; ++pp) {
      for (int r = 0; r < n; ++r) t1(p, pp) += contract(p, r, r, pp, pp, r);
    }
  }

  Eigen::MatrixXcd a_block = Eigen::MatrixXcd::Zero(n2, n2);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      for (int pp = 0; pp < n; ++pp) {
        const cd phase_ppp =
            std::polar(1.0, frame.gaps(p, pp) * t_fs / units::hbar_cmfs);
        for (int qq = 0; qq < n; ++qq) {
          cd val{0.0, 0.0};
          if (qq == q) val += phase_ppp * t1(p, pp);
          const cd phase2 = std::polar(
              1.0, (frame.gaps(p, pp) - frame.gaps(q, qq)) * t_fs / units::hbar_cmfs);
          val -= phase2 * contract(qq, q, p, pp, pp, p);
          a_block(p * n + q, pp * n + qq) = inv_hb2 * val;
        }
      }
    }
  }

  return {n, t_fs, symmetrize_with_conjugate(a_block, n)};
}

RelaxationTensor assemble_R_two_state(const KernelIntegrals& ki, const PolaronFrame& frame,
                                      int m) {
  if (frame.n_sites() != 2) {
    throw ConfigError("assemble_R_two_state requires exactly two sites");
  }
  const auto& u = frame.u;
  const double t_fs = ki.grid().time_at(m);
  const double inv_hb2 = 1.0 / (units::hbar_cmfs * units::hbar_cmfs);

  // Scalar kernel chains of the dimer model, per eigen-gap (a, b):
  //   wm = Jt^2 Int e^{i dE_ab s/hb} (e^{-K(s)} - 1),   wp: e^{+K(s)} - 1,
  //   y  = Jt   Int e^{i dE_ab s/hb} M(s),   x = Int e^{i dE_ab s/hb} C(s).
  cd wm[2][2], wp[2][2], y[2][2], x[2][2];
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      wm[a][b] = ki.W(a, b, 0, 1, 0, 1, m);
      wp[a][b] = ki.W(a, b, 0, 1, 1, 0, m);
      y[a][b] = ki.Y(a, b, 0, 0, 1, m);
      x[a][b] = ki.X(a, b, 0, 0, m);
    }
  }

  // Eigenvector coefficient patterns.
  const auto ca = [&](int p, int q, int r, int s) {
    return u(0, p) * u(0, q) * u(0, r) * u(0, s) + u(1, p) * u(1, q) * u(1, r) * u(1, s);
  };
  const auto b1 = [&](int p, int q) { return u(0, p) * u(0, q) - u(1, p) * u(1, q); };
  const auto b2 = [&](int p, int q) { return u(0, p) * u(1, q) - u(1, p) * u(0, q); };
  const auto c1 = [&](int p, int q, int r, int s) {
    return u(0, p) * u(1, q) * u(0, r) * u(1, s) + u(1, p) * u(0, q) * u(1, r) * u(0, s);
  };
  const auto c2 = [&](int p, int q, int r, int s) {
    return u(0, p) * u(1, q) * u(1, r) * u(0, s) + u(1, p) * u(0, q) * u(0, r) * u(1, s);
  };

  const auto g_closed = [&](int al, int be, int ga, int de, int a, int b) {
    return ca(al, be, ga, de) * x[a][b] +
           (b1(al, be) * b2(ga, de) - b2(al, be) * b1(ga, de)) * y[a][b] +
           c1(al, be, ga, de) * wm[a][b] + c2(al, be, ga, de) * wp[a][b];
  };

  cd t1[2][2];
  for (int p = 0; p < 2; ++p) {
    for (int pp = 0; pp < 2; ++pp) {
      t1[p][pp] = g_closed(p, 0, 0, pp, pp, 0) + g_closed(p, 1, 1, pp, pp, 1);
    }
  }

  Eigen::MatrixXcd a_block = Eigen::MatrixXcd::Zero(4, 4);
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      for (int pp = 0; pp < 2; ++pp) {
        const cd phase_ppp =
            std::polar(1.0, frame.gaps(p, pp) * t_fs / units::hbar_cmfs);
        for (int qq = 0; qq < 2; ++qq) {
          cd val{0.0, 0.0};
          if (qq == q) val += phase_ppp * t1[p][pp];
          const cd phase2 = std::polar(
              1.0, (frame.gaps(p, pp) - frame.gaps(q, qq)) * t_fs / units::hbar_cmfs);
          val -= phase2 * g_closed(qq, q, p, pp, pp, p);
          a_block(p * 2 + q, pp * 2 + qq) = inv_hb2 * val;
        }
      }
    }
  }

  Eigen::MatrixXcd r(4, 4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int pp = 0; pp < 2; ++pp)
        for (int qq = 0; qq < 2; ++qq)
          r(p * 2 + q, pp * 2 + qq) =
              a_block(p * 2 + q, pp * 2 + qq) + std::conj(a_block(q * 2 + p, qq * 2 + pp));

  return {2, t_fs, std::move(r)};
}

}  // namespace ppqme
