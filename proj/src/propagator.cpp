#include "ppqme/propagator.hpp"

#include <cmath>

#include "ppqme/errors.hpp"
#include "ppqme/relaxation.hpp"
#include "ppqme/units.hpp"

namespace ppqme {

namespace {

Eigen::VectorXcd flatten(const Eigen::MatrixXcd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXcd v(n * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) v(p * n + q) = m(p, q);
  return v;
}

Eigen::MatrixXcd unflatten(const Eigen::VectorXcd& v, int n) {
  Eigen::MatrixXcd m(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) m(p, q) = v(p * n + q);
  return m;
}

}  // namespace

std::vector<double> Trajectory::population(int j) const {
  std::vector<double> p(sigma_site.size());
  for (size_t i = 0; i < sigma_site.size(); ++i) p[i] = sigma_site[i](j, j).real();
  return p;
}

Eigen::MatrixXcd to_site_basis(const PolaronFrame& frame, const Eigen::MatrixXcd& s_eigen,
                               double t_fs) {
  const int n = frame.n_sites();
  Eigen::MatrixXcd dressed(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      dressed(p, q) =
          std::polar(1.0, -frame.gaps(p, q) * t_fs / units::hbar_cmfs) * s_eigen(p, q);
    }
  }
  const Eigen::MatrixXcd u = frame.u.cast<cd>();
  return u * dressed * u.transpose();
}

Trajectory propagate(const KernelIntegrals& ki, const PolaronFrame& frame,
                     const InhomKernels& inhom, const Eigen::MatrixXcd& sigma0_site,
                     const PropagationOptions& options) {
  const int n = frame.n_sites();
  if (sigma0_site.rows() != n || sigma0_site.cols() != n) {
    throw ConfigError("initial density matrix must be n_sites x n_sites");
  }
  if (options.stride < 1) throw ConfigError("run: stride must be >= 1");
  const TimeGrid& grid = ki.grid();
  const double dt = grid.dt_fs;
  const int n2 = n * n;
  const bool has_inhom = inhom.order > 0 && !inhom.term.empty();
  if (inhom.grid.dt_fs != grid.dt_fs || inhom.grid.n_steps != grid.n_steps ||
      (has_inhom && static_cast<int>(inhom.term.size()) != grid.n_samples())) {
    throw ConfigError("inhomogeneous terms were built on a different time grid");
  }

  Trajectory traj;
  traj.n_sites = n;
  traj.dt_fs = dt;
  traj.stride = options.stride;
  traj.min_eigenvalue_run = 1.0;

  Eigen::VectorXcd sv = flatten(frame.u.transpose().cast<cd>() * sigma0_site * frame.u.cast<cd>());
  const Eigen::VectorXcd zero_term = Eigen::VectorXcd::Zero(n2);

  const auto record = [&](int step, const Eigen::VectorXcd& v) {
    const double t = step * dt;
    const double last_good = traj.t_fs.empty() ? 0.0 : traj.t_fs.back();
    if (!v.allFinite()) {
      throw NumericalError("propagation produced a non-finite state", last_good);
    }
    const Eigen::MatrixXcd s = unflatten(v, n);
    const cd tr = s.trace();
    const double drift = std::abs(tr - cd{1.0, 0.0});
    if (drift > options.trace_tol) {
      throw NumericalError("propagation trace drift exceeded tolerance", last_good);
    }
    const double herm = (s - s.adjoint()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXcd site = to_site_basis(frame, s, t);
    const Eigen::MatrixXcd herm_site = 0.5 * (site + site.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm_site);
    const double min_eig = es.eigenvalues().minCoeff();

    traj.t_fs.push_back(t);
    traj.s_eigen.push_back(s);
    traj.sigma_site.push_back(site);
    traj.trace.push_back(tr.real());
    traj.min_eigenvalue.push_back(min_eig);
    traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
    traj.max_herm_error = std::max(traj.max_herm_error, herm);
    traj.min_eigenvalue_run = std::min(traj.min_eigenvalue_run, min_eig);
  };

  record(0, sv);

  Eigen::MatrixXcd r_lo = assemble_R(ki, frame, 0).r;
  Eigen::VectorXcd k1(n2), k2(n2), k3(n2), k4(n2);
  for (int k = 0; k < grid.n_steps; ++k) {
    const int m0 = 2 * k, m1 = 2 * k + 1, m2 = 2 * k + 2;
    const Eigen::MatrixXcd r_mid = assemble_R(ki, frame, m1).r;
    Eigen::MatrixXcd r_hi = assemble_R(ki, frame, m2).r;
    const Eigen::VectorXcd i0 = has_inhom ? flatten(inhom.term[m0]) : zero_term;
    const Eigen::VectorXcd i1 = has_inhom ? flatten(inhom.term[m1]) : zero_term;
    const Eigen::VectorXcd i2 = has_inhom ? flatten(inhom.term[m2]) : zero_term;

    k1 = -(r_lo * sv) + i0;
    k2 = -(r_mid * (sv + 0.5 * dt * k1)) + i1;
    k3 = -(r_mid * (sv + 0.5 * dt * k2)) + i1;
    k4 = -(r_hi * (sv + dt * k3)) + i2;
    sv += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    r_lo = std::move(r_hi);

    const int step = k + 1;
    if (step % options.stride == 0 || step == grid.n_steps) record(step, sv);
  }
  return traj;
}

double coherence_metric(const std::vector<double>& t_fs,
                        const std::vector<double>& population) {
  (void)t_fs;
  const size_t n = population.size();
  if (n < 4) return 0.0;
  size_t imin = 0;
  bool found = false;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (population[i] < population[i - 1] && population[i] < population[i + 1]) {
      imin = i;
      found = true;
      break;
    }
  }
  if (!found) return 0.0;
  const size_t start = (3 * n) / 4;
  double mean = 0.0;
  for (size_t i = start; i < n; ++i) mean += population[i];
  mean /= static_cast<double>(n - start);
  return std::max(0.0, mean - population[imin]);
}

}  // namespace ppqme
