#include "ppqme/polaron.hpp"

#include <cmath>
#include <numbers>

#include "ppqme/errors.hpp"
#include "ppqme/units.hpp"

namespace ppqme {

SiteHamiltonian SiteHamiltonian::dimer(double e1, double e2, double j12) {
  SiteHamiltonian h;
  h.n_sites = 2;
  h.energies = Eigen::Vector2d(e1, e2);
  h.couplings = Eigen::Matrix2d{{0.0, j12}, {j12, 0.0}};
  return h;
}

void SiteHamiltonian::validate() const {
  if (n_sites < 1) throw ConfigError("system: n_sites must be >= 1");
  if (energies.size() != n_sites) {
    throw ConfigError("system: energies_cm1 must list exactly n_sites values");
  }
  if (couplings.rows() != n_sites || couplings.cols() != n_sites) {
    throw ConfigError("system: coupling matrix must be n_sites x n_sites");
  }
  for (int j = 0; j < n_sites; ++j) {
    if (couplings(j, j) != 0.0) {
      throw ConfigError("system: couplings must have zero diagonal (site energies go in energies_cm1)");
    }
    for (int k = j + 1; k < n_sites; ++k) {
      if (couplings(j, k) != couplings(k, j)) {
        throw ConfigError("system: coupling matrix must be symmetric");
      }
    }
  }
}

std::vector<std::pair<int, int>> SiteHamiltonian::coupling_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < n_sites; ++j) {
    for (int k = j + 1; k < n_sites; ++k) {
      if (couplings(j, k) != 0.0) pairs.emplace_back(j, k);
    }
  }
  return pairs;
}

namespace {

std::optional<double> weighting_breakpoint(const WeightingFunction& weighting) {
  if (weighting.kind == WeightingKind::Step || weighting.kind == WeightingKind::Smooth) {
    return weighting.omega_h;
  }
  return std::nullopt;
}

// Deterministic eigenvector sign fix shared by the dense and the closed-form
// paths: the largest-magnitude component of each column is made positive
// (ties broken by the lowest site index).
void fix_column_signs(Eigen::MatrixXd& u) {
  for (int p = 0; p < u.cols(); ++p) {
    int arg = 0;
    double best = -1.0;
    for (int j = 0; j < u.rows(); ++j) {
      if (std::abs(u(j, p)) > best) {
        best = std::abs(u(j, p));
        arg = j;
      }
    }
    if (u(arg, p) < 0.0) u.col(p) = -u.col(p);
  }
}

PolaronFrame dress_only(const SiteHamiltonian& h, const SpectralDensityModel& density,
                        const WeightingFunction& weighting, const QuadratureScheme& scheme,
                        double temperature_K) {
  PolaronFrame frame;
  const int n = h.n_sites;
  frame.e_tilde.resize(n);
  for (int j = 0; j < n; ++j) {
    frame.e_tilde[j] = renormalized_energy(density, weighting, scheme, j, h.energies[j]);
  }
  frame.w = Eigen::MatrixXd::Ones(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      frame.w(j, k) = frame.w(k, j) = debye_waller(density, weighting, scheme, temperature_K, j, k);
    }
  }
  frame.j_tilde = frame.w.cwiseProduct(h.couplings);
  return frame;
}

void finish_frame(PolaronFrame& frame) {
  const int n = frame.n_sites();
  frame.gaps.resize(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) frame.gaps(p, q) = frame.eigenvalues[p] - frame.eigenvalues[q];
  }
}

}  // namespace

double debye_waller(const SpectralDensityModel& density, const WeightingFunction& weighting,
                    const QuadratureScheme& scheme, double temperature_K, int j, int k) {
  if (j == k) return 1.0;
  const double beta = units::beta_from_temperature(temperature_K);
  const NodeSet nodes = build_nodes(scheme, density.omega_c(), weighting_breakpoint(weighting));
  const size_t nn = nodes.omega.size();
  std::vector<double> term(nn);
  for (size_t i = 0; i < nn; ++i) {
    const double w = nodes.omega[i];
    const double wf = weighting.weight(w);
    term[i] = nodes.wq[i] / std::numbers::pi * density.aux_density_2(j, k, j, k, w) / (w * w) *
              wf * wf * units::thermal_coth(0.5 * beta * w);
  }
  std::vector<double> profile(nn);
  for (size_t i = 0; i < nn; ++i) profile[i] = std::abs(term[i]);
  check_ir_convergence(nodes, profile,
                       "w_{" + std::to_string(j + 1) + std::to_string(k + 1) + "}");
  double exponent = 0.0;
  for (double t : term) exponent += t;
  return std::exp(-0.5 * exponent);
}

double renormalized_energy(const SpectralDensityModel& density,
                           const WeightingFunction& weighting, const QuadratureScheme& scheme,
                           int j, double bare_energy_cm1) {
  const NodeSet nodes = build_nodes(scheme, density.omega_c(), weighting_breakpoint(weighting));
  const size_t nn = nodes.omega.size();
  std::vector<double> term(nn);
  for (size_t i = 0; i < nn; ++i) {
    const double w = nodes.omega[i];
    const double wf = weighting.weight(w);
    term[i] = nodes.wq[i] / std::numbers::pi * density.density(j, j, w) / w * wf * (2.0 - wf);
  }
  std::vector<double> profile(nn);
  for (size_t i = 0; i < nn; ++i) profile[i] = std::abs(term[i]);
  check_ir_convergence(nodes, profile, "shift_" + std::to_string(j + 1));
  double shift = 0.0;
  for (double t : term) shift += t;
  return bare_energy_cm1 - shift;
}

PolaronFrame build_frame(const SiteHamiltonian& hamiltonian, const SpectralDensityModel& density,
                         const WeightingFunction& weighting, const QuadratureScheme& scheme,
                         double temperature_K) {
  hamiltonian.validate();
  if (density.n_sites() != hamiltonian.n_sites) {
    throw ConfigError("bath and system disagree on the number of sites");
  }
  PolaronFrame frame = dress_only(hamiltonian, density, weighting, scheme, temperature_K);
  Eigen::MatrixXd h_dressed = frame.j_tilde;
  h_dressed.diagonal() = frame.e_tilde;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_dressed);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("dressed Hamiltonian eigendecomposition failed", 0.0);
  }
  frame.eigenvalues = solver.eigenvalues();  // ascending
  frame.u = solver.eigenvectors();
  fix_column_signs(frame.u);
  finish_frame(frame);
  return frame;
}

PolaronFrame two_state_closed_form(const SiteHamiltonian& hamiltonian,
                                   const SpectralDensityModel& density,
                                   const WeightingFunction& weighting,
                                   const QuadratureScheme& scheme, double temperature_K) {
  hamiltonian.validate();
  if (hamiltonian.n_sites != 2) {
    throw ConfigError("two_state_closed_form requires exactly two sites");
  }
  if (density.n_sites() != 2) {
    throw ConfigError("bath and system disagree on the number of sites");
  }
  PolaronFrame frame = dress_only(hamiltonian, density, weighting, scheme, temperature_K);

  // H~ = mean*1 + (delta/2) sigma_z + J~ sigma_x with delta = E~_1 - E~_2.
  const double mean = 0.5 * (frame.e_tilde[0] + frame.e_tilde[1]);
  const double half_delta = 0.5 * (frame.e_tilde[0] - frame.e_tilde[1]);
  const double jt = frame.j_tilde(0, 1);
  const double r = std::hypot(half_delta, jt);
  const double theta = 0.5 * std::atan2(jt, half_delta);  // pi/4 when degenerate

  frame.eigenvalues = Eigen::Vector2d(mean - r, mean + r);
  frame.u = Eigen::Matrix2d{{-std::sin(theta), std::cos(theta)},
                            {std::cos(theta), std::sin(theta)}};
  fix_column_signs(frame.u);
  finish_frame(frame);
  return frame;
}

}  // namespace ppqme
