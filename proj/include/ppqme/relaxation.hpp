#pragma once

#include <Eigen/Dense>

#include "ppqme/correlations.hpp"
#include "ppqme/polaron.hpp"

namespace ppqme {

// Time-local relaxation tensor in the dressed eigenbasis, flattened so that
// row (p*N + q), column (p'*N + q') holds R_{pq}^{p'q'}(t): the equation of
// motion reads dS_pq/dt = -sum_{p'q'} R_{pq}^{p'q'} S_{p'q'} + inhomogeneous.
struct RelaxationTensor {
  int n_sites = 0;
  double t_fs = 0.0;
  Eigen::MatrixXcd r;

  cd element(int p, int q, int pp, int qq) const {
    return r(p * n_sites + q, pp * n_sites + qq);
  }
};

// General assembly at half-grid sample m: contracts the cumulative kernel
// integrals with four eigenvector factors per term, then symmetrizes with the
// conjugate index-swapped block so that trace conservation and hermiticity
// preservation hold exactly.
RelaxationTensor assemble_R(const KernelIntegrals& ki, const PolaronFrame& frame, int m);

// Closed-form two-state assembly: the sixteen eigenvector products collapse
// into four coefficient patterns multiplying one scalar kernel chain each.
// Valid for two sites with statistically independent, identical site baths
// (the standard dimer model); must match assemble_R to rounding there.
RelaxationTensor assemble_R_two_state(const KernelIntegrals& ki, const PolaronFrame& frame,
                                      int m);

}  // namespace ppqme
