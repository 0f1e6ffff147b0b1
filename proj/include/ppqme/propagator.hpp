#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ppqme/correlations.hpp"
#include "ppqme/inhomogeneous.hpp"
#include "ppqme/polaron.hpp"

namespace ppqme {

// Stored dynamics: one record every `stride` steps plus the final one.
// s_eigen is the slow matrix S(t) in the dressed eigenbasis (interaction
// picture); sigma_site is the lab-frame site-basis density matrix.
struct Trajectory {
  int n_sites = 0;
  double dt_fs = 0.0;
  int stride = 1;
  std::vector<double> t_fs;
  std::vector<Eigen::MatrixXcd> s_eigen;
  std::vector<Eigen::MatrixXcd> sigma_site;
  std::vector<double> trace;           // Re Tr S at each record
  std::vector<double> min_eigenvalue;  // of the hermitized sigma_site

  // Run-wide diagnostics (monitored, never enforced).
  double max_trace_drift = 0.0;  // max |Tr S - 1|
  double max_herm_error = 0.0;   // max elementwise |S - S^dag|
  double min_eigenvalue_run = 0.0;

  std::vector<double> population(int j) const;  // Re sigma_site(j, j)
};

struct PropagationOptions {
  int stride = 10;
  double trace_tol = 1e-6;  // NumericalError beyond this |Tr S - 1|
};

// Fixed-step RK4 on dS/dt = -R(t) S + I(t).  The relaxation tensor is
// assembled once per half-grid sample (midpoint stages land on odd samples)
// and reused across stages.  Throws NumericalError, reporting the last
// recorded time, if the state leaves the numerical-sanity envelope.
Trajectory propagate(const KernelIntegrals& ki, const PolaronFrame& frame,
                     const InhomKernels& inhom, const Eigen::MatrixXcd& sigma0_site,
                     const PropagationOptions& options = {});

// Undoes the interaction picture and rotates to the site basis:
// sigma~_pq = e^{-i dE_pq t / hbar} S_pq,  sigma_site = U sigma~ U^T.
Eigen::MatrixXcd to_site_basis(const PolaronFrame& frame, const Eigen::MatrixXcd& s_eigen,
                               double t_fs);

// Depth of the first strict local minimum of a population trace below its
// trailing-quarter mean; 0 when the trace has no interior minimum.  Larger
// values mean the transfer overshoots and rings, i.e. stays coherent longer.
double coherence_metric(const std::vector<double>& t_fs, const std::vector<double>& population);

}  // namespace ppqme
