#pragma once

#include <Eigen/Dense>

#include "ppqme/correlations.hpp"
#include "ppqme/polaron.hpp"

namespace ppqme {

// Precomputed inhomogeneous driving terms I(t_m) in the dressed eigenbasis,
// one matrix per half-grid sample.  order selects how many orders of the
// initial-correlation expansion are included (0 disables the term).
struct InhomKernels {
  int order = 1;
  TimeGrid grid;
  std::vector<Eigen::MatrixXcd> term;  // empty when order == 0

  const Eigen::MatrixXcd& at(int m) const { return term[m]; }
};

// First-order initial-correlation term at sample m.  sigma0_site is the bare
// initial density matrix in the site basis; its off-diagonal support must be
// included in the pair lists the tables were built with.
Eigen::MatrixXcd inhom1(const CorrelationTables& tables, const PolaronFrame& frame,
                        const Eigen::MatrixXcd& sigma0_site, int m);

// Two-time bath kernels entering the second-order term.  All take two sample
// indices (mt, mtau) with mtau <= mt; w is the Debye-Waller matrix.
//   F^{j2k2}_{jk,j'k'}(t,tau)   four-operator connected correlation
//   H1^{j2k2}_{j,j'k'}(t,tau)   displacement (t) x hopping (tau)
//   H2^{j2k2}_{jk,j'}(t,tau)    hopping (t) x displacement (tau)
//   L^{j2k2}_{j,j'}(t,tau)      displacement x displacement
cd kernel_F(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int k, int jp,
            int kp, int j2, int k2, int mt, int mtau);
cd kernel_H1(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int jp, int kp,
             int j2, int k2, int mt, int mtau);
cd kernel_H2(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int k, int jp,
             int j2, int k2, int mt, int mtau);
cd kernel_L(const CorrelationTables& tables, const Eigen::MatrixXd& w, int j, int jp, int j2,
            int k2, int mt, int mtau);

// Second-order initial-correlation term at sample m: integrates the two-time
// kernels over tau on the half grid (O(m) work per call).  bare_couplings is
// the undressed coupling matrix J_jk.
Eigen::MatrixXcd inhom2(const CorrelationTables& tables, const PolaronFrame& frame,
                        const Eigen::MatrixXd& bare_couplings,
                        const Eigen::MatrixXcd& sigma0_site, int m);

// Tabulates I(t_m) = I1 (+ I2 when order == 2) over the whole grid.
InhomKernels build_inhom(const CorrelationTables& tables, const PolaronFrame& frame,
                         const Eigen::MatrixXd& bare_couplings,
                         const Eigen::MatrixXcd& sigma0_site, int order);

}  // namespace ppqme
