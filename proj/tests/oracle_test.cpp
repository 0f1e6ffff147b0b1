#include "ppqme/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ppqme/errors.hpp"
#include "ppqme/inhomogeneous.hpp"
#include "ppqme/units.hpp"

namespace {

using namespace ppqme;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST(Discretize, ReorganizationSumRulePerSite) {
  const auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const auto bath = discretize(density, WeightingFunction::step(200.0), 64);
  ASSERT_EQ(bath.n_modes(), 128);
  ASSERT_EQ(bath.n_sites(), 2);
  for (int site = 0; site < 2; ++site) {
    double sum = 0.0;
    for (int n = 0; n < bath.n_modes(); ++n)
      sum += bath.omega(n) * bath.g(n, site) * bath.g(n, site);
    EXPECT_NEAR(sum, 200.0, 200.0 * 1e-8);
  }
  // Block layout: the first 64 modes couple to site 0 only.
  for (int n = 0; n < 64; ++n) {
    EXPECT_EQ(bath.g(n, 1), 0.0);
    EXPECT_EQ(bath.g(n + 64, 0), 0.0);
    EXPECT_GT(bath.omega(n), 0.0);
    if (n > 0) EXPECT_GT(bath.omega(n), bath.omega(n - 1));
  }
}

TEST(Discretize, RejectsUnsupportedInputs) {
  auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  // Full transform of an Ohmic bath: the displacement measure diverges.
  EXPECT_THROW(discretize(density, WeightingFunction::unity(), 32), DivergentIntegral);
  // Zero weighting only populates the bare-force measure: fine.
  EXPECT_NO_THROW(discretize(density, WeightingFunction::zero(), 32));
  // Correlated site baths have no independent per-site mode picture.
  density.set_cross_pair(0, 1, 0.5);
  EXPECT_THROW(discretize(density, WeightingFunction::step(200.0), 32), ConfigError);
}

TEST(FockSpaceModel, LadderAndThermalBasics) {
  const auto h = SiteHamiltonian::dimer(0.0, 0.0, 100.0);
  DiscreteBath bath;
  bath.omega = Eigen::Vector2d(100.0, 300.0);
  bath.g = MatrixXd::Zero(2, 2);
  bath.g(0, 0) = 0.3;
  bath.g(1, 1) = 0.2;
  const FockSpaceModel model(h, bath, 3);
  ASSERT_EQ(model.bath_dim(), 9);
  ASSERT_EQ(model.dim(), 18);

  // Little-endian occupations: state s = n0 + 3*n1.
  const VectorXd be = model.bath_energies();
  EXPECT_DOUBLE_EQ(be(0), 0.0);
  EXPECT_DOUBLE_EQ(be(1), 100.0);
  EXPECT_DOUBLE_EQ(be(2), 200.0);
  EXPECT_DOUBLE_EQ(be(3), 300.0);
  EXPECT_DOUBLE_EQ(be(5), 500.0);

  // Number operator from the ladder pair.
  for (int mode = 0; mode < 2; ++mode) {
    const MatrixXd b = model.annihilation(mode);
    const MatrixXd num = b.transpose() * b;
    for (int s = 0; s < 9; ++s) {
      const int occ = mode == 0 ? s % 3 : s / 3;
      EXPECT_NEAR(num(s, s), occ, 1e-14);
    }
  }

  const VectorXd th = model.thermal_weights(200.0);
  EXPECT_NEAR(th.sum(), 1.0, 1e-14);
  // Boltzmann ratio between the mode-0 ground and first excited state.
  EXPECT_NEAR(th(1) / th(0), std::exp(-100.0 / (units::kB_cmK * 200.0)), 1e-12);

  // Displacement operators are orthogonal (exponential of an antisymmetric
  // generator, exactly so even after truncation).
  const MatrixXd e0 = model.displacement(0, WeightingFunction::unity());
  EXPECT_NEAR((e0.transpose() * e0 - MatrixXd::Identity(9, 9)).cwiseAbs().maxCoeff(), 0.0,
              1e-12);
  // Site 1's displacement does not touch mode 0.
  const MatrixXd e1 = model.displacement(1, WeightingFunction::unity());
  const MatrixXd b0 = model.annihilation(0);
  EXPECT_NEAR((e1 * b0 - b0 * e1).cwiseAbs().maxCoeff(), 0.0, 1e-12);

  EXPECT_THROW(FockSpaceModel(h, bath, 1), ConfigError);
  DiscreteBath big;
  big.omega = VectorXd::Constant(7, 100.0);
  big.g = MatrixXd::Zero(7, 2);
  EXPECT_THROW(FockSpaceModel(h, big, 4), ConfigError);  // 2 * 4^7 states
}

// ---------------------------------------------------------------------------
// Thermal-trace identities: every correlation function the engine tabulates
// is, by definition, a trace of explicit Heisenberg bath operators against
// the thermal state.  A two-mode Fock space evaluates those traces directly.
// ---------------------------------------------------------------------------
class TraceIdentities : public ::testing::Test {
 protected:
  static constexpr double kT = 150.0;
  static constexpr double kTime = 12.0;
  static constexpr double kTau = 5.0;

  TraceIdentities()
      : h_(SiteHamiltonian::dimer(0.0, 0.0, 100.0)),
        bath_(DiscreteBath::independent_identical(VectorXd::Constant(1, 200.0),
                                                  VectorXd::Constant(1, 0.4), 2)),
        weighting_(WeightingFunction::smooth(200.0, 2.0)),
        model_(h_, bath_, 14),
        dc_(bath_, weighting_, kT) {
    rho_ = MatrixXd(model_.thermal_weights(kT).asDiagonal()).cast<cd>();
    for (int j = 0; j < 2; ++j) eop_[j] = model_.displacement(j, weighting_).cast<cd>();
  }

  // Tr{A rho} with rho the thermal bath state.
  cd tr(const MatrixXcd& a) const { return (a * rho_).trace(); }
  // The dressed initial-state deviation  E_j2 rho E_k2^T - w_j2k2 rho.
  MatrixXcd delta_rho(int j2, int k2) const {
    return eop_[j2] * rho_ * eop_[k2].transpose() - dc_.debye_waller(j2, k2) * rho_;
  }
  MatrixXcd hop(int j, int k, double t) const {
    return model_.dressed_hop(j, k, weighting_, t);
  }
  MatrixXcd res(int j, double t) const { return model_.residual_coupling(j, weighting_, t); }

  SiteHamiltonian h_;
  DiscreteBath bath_;
  WeightingFunction weighting_;
  FockSpaceModel model_;
  DiscreteCorr dc_;
  MatrixXcd rho_;
  MatrixXcd eop_[2];
};

TEST_F(TraceIdentities, DressedHopPairCorrelation) {
  const double w01 = dc_.debye_waller(0, 1);
  // Normalization: Tr{E_j rho E_k^T} = w_jk.
  EXPECT_NEAR(std::abs((eop_[0] * rho_ * eop_[1].transpose()).trace() - w01), 0.0, 1e-9);
  EXPECT_NEAR(std::abs((eop_[0] * rho_ * eop_[0].transpose()).trace() - 1.0), 0.0, 1e-9);

  // Tr{V_jk(t) V_j'k'(tau) rho} = w_jk w_j'k' exp(-K_{jk,j'k'}(t - tau)).
  const cd lhs = (hop(0, 1, kTime) * hop(0, 1, kTau) * rho_).trace();
  const cd rhs = w01 * w01 * std::exp(-dc_.K(0, 1, 0, 1, kTime - kTau));
  EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-9);

  const cd lhs2 = (hop(0, 1, kTime) * hop(1, 0, kTau) * rho_).trace();
  const cd rhs2 = w01 * w01 * std::exp(-dc_.K(0, 1, 1, 0, kTime - kTau));
  EXPECT_NEAR(std::abs(lhs2 - rhs2), 0.0, 1e-9);
}

TEST_F(TraceIdentities, DressedHopAgainstInitialState) {
  // Tr{V_jk(t) E_j' rho E_k'^T} = w_jk w_j'k' exp(-K_{jk,j'k'}(t)) f_{jk,k'}(t).
  const double w01 = dc_.debye_waller(0, 1);
  for (const auto& [jp, kp] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}) {
    const cd lhs = (hop(0, 1, kTime) * eop_[jp] * rho_ * eop_[kp].transpose()).trace();
    const cd rhs =
        w01 * w01 * std::exp(-dc_.K(0, 1, jp, kp, kTime)) * dc_.f(0, 1, kp, kTime);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-9);
  }
}

TEST_F(TraceIdentities, ResidualCouplingTraces) {
  const double w01 = dc_.debye_waller(0, 1);
  // Tr{D_j(t) E_j' rho E_k'^T} = w_j'k' (M_{j,j'k'}(t) + h_{j,k'}(t)).
  for (int j = 0; j < 2; ++j) {
    const cd lhs = (res(j, kTime) * eop_[0] * rho_ * eop_[1].transpose()).trace();
    const cd rhs = w01 * (dc_.M(j, 0, 1, kTime) + dc_.h(j, 1, kTime));
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-8 * std::max(1.0, std::abs(rhs)));
  }
  // Tr{D_j(t) V_j'k'(tau) rho} = w_j'k' M_{j,j'k'}(t - tau).
  const cd lhs_dv = (res(0, kTime) * hop(0, 1, kTau) * rho_).trace();
  const cd rhs_dv = w01 * dc_.M(0, 0, 1, kTime - kTau);
  EXPECT_NEAR(std::abs(lhs_dv - rhs_dv), 0.0, 1e-8 * std::max(1.0, std::abs(rhs_dv)));
  // Tr{V_jk(t) D_j'(tau) rho} = w_jk M_{j',kj}(t - tau).
  const cd lhs_vd = (hop(0, 1, kTime) * res(1, kTau) * rho_).trace();
  const cd rhs_vd = w01 * dc_.M(1, 1, 0, kTime - kTau);
  EXPECT_NEAR(std::abs(lhs_vd - rhs_vd), 0.0, 1e-8 * std::max(1.0, std::abs(rhs_vd)));
  // Tr{D_j(t) D_j'(tau) rho} = C_jj'(t - tau); zero across independent baths.
  const cd lhs_dd = (res(0, kTime) * res(0, kTau) * rho_).trace();
  const cd rhs_dd = dc_.C(0, 0, kTime - kTau);
  EXPECT_NEAR(std::abs(lhs_dd - rhs_dd), 0.0, 1e-8 * std::max(1.0, std::abs(rhs_dd)));
  EXPECT_NEAR(std::abs((res(0, kTime) * res(1, kTau) * rho_).trace()), 0.0, 1e-9);
}

TEST_F(TraceIdentities, TwoTimeDrivingKernels) {
  // The second-order driving kernels are connected four-operator traces
  // against the initial-state deviation delta_rho.
  TimeGrid grid;
  grid.dt_fs = 1.0;
  grid.n_steps = 15;
  const auto tables = build_tables_discrete(bath_, weighting_, grid, kT, {{0, 1}}, {{0, 1}});
  MatrixXd wmat(2, 2);
  wmat << 1.0, dc_.debye_waller(0, 1), dc_.debye_waller(1, 0), 1.0;
  const int mt = 24, mtau = 10;  // t = 12 fs, tau = 5 fs
  ASSERT_DOUBLE_EQ(grid.time_at(mt), kTime);
  ASSERT_DOUBLE_EQ(grid.time_at(mtau), kTau);

  const double w01 = dc_.debye_waller(0, 1);
  for (const auto& [j2, k2] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}) {
    const MatrixXcd drho = delta_rho(j2, k2);
    const MatrixXcd dv_t = hop(0, 1, kTime) - w01 * MatrixXcd::Identity(196, 196);
    const MatrixXcd dv_tau = hop(0, 1, kTau) - w01 * MatrixXcd::Identity(196, 196);

    const cd f_lhs = (dv_t * dv_tau * drho).trace();
    const cd f_rhs = kernel_F(tables, wmat, 0, 1, 0, 1, j2, k2, mt, mtau);
    EXPECT_NEAR(std::abs(f_lhs - f_rhs), 0.0, 1e-8 * std::max(1.0, std::abs(f_rhs)));

    const cd h1_lhs = (res(0, kTime) * dv_tau * drho).trace();
    const cd h1_rhs = kernel_H1(tables, wmat, 0, 0, 1, j2, k2, mt, mtau);
    EXPECT_NEAR(std::abs(h1_lhs - h1_rhs), 0.0, 1e-8 * std::max(1.0, std::abs(h1_rhs)));

    const cd h2_lhs = (dv_t * res(1, kTau) * drho).trace();
    const cd h2_rhs = kernel_H2(tables, wmat, 0, 1, 1, j2, k2, mt, mtau);
    EXPECT_NEAR(std::abs(h2_lhs - h2_rhs), 0.0, 1e-8 * std::max(1.0, std::abs(h2_rhs)));

    const cd l_lhs = (res(0, kTime) * res(1, kTau) * drho).trace();
    const cd l_rhs = kernel_L(tables, wmat, 0, 1, j2, k2, mt, mtau);
    EXPECT_NEAR(std::abs(l_lhs - l_rhs), 0.0, 1e-8 * std::max(1.0, std::abs(l_rhs)));
  }
}

TEST(ExactPropagate, DecoupledBathLeavesRabiOscillation) {
  const auto h = SiteHamiltonian::dimer(0.0, 0.0, 300.0);
  const auto bath = DiscreteBath::independent_identical(VectorXd::Constant(1, 300.0),
                                                        VectorXd::Zero(1), 2);
  const FockSpaceModel model(h, bath, 2);
  MatrixXcd sigma0 = MatrixXcd::Zero(2, 2);
  sigma0(0, 0) = 1.0;
  const std::vector<double> times{0.0, 10.0, 25.0, 40.0, 60.0};
  const auto reduced = exact_propagate(model, 300.0, sigma0, times);
  ASSERT_EQ(reduced.size(), times.size());
  for (size_t i = 0; i < times.size(); ++i) {
    const double c = std::cos(300.0 * times[i] / units::hbar_cmfs);
    EXPECT_NEAR(reduced[i](0, 0).real(), c * c, 1e-10);
    EXPECT_NEAR(std::abs(reduced[i].trace() - 1.0), 0.0, 1e-12);
    EXPECT_NEAR((reduced[i] - reduced[i].adjoint()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(DiscreteContinuumAgreement, TablesAndFrame) {
  // A 500-mode equal-measure discretization reproduces the continuum tables
  // and the dressed frame to a few permille.
  const auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const auto weighting = WeightingFunction::smooth(200.0, 2.0);
  const double temperature = 300.0;
  const auto bath = discretize(density, weighting, 500);
  const DiscreteCorr dc(bath, weighting, temperature);

  TimeGrid grid;
  grid.dt_fs = 1.0;
  grid.n_steps = 50;
  QuadratureScheme scheme;
  const auto tables =
      build_tables(density, weighting, scheme, grid, temperature, {{0, 1}}, {{0, 1}});
  for (const int m : {0, 40, 100}) {
    const double t = grid.time_at(m);
    EXPECT_NEAR(std::abs(tables.corr_K(0, 1, 0, 1, m) - dc.K(0, 1, 0, 1, t)), 0.0, 3e-3);
    EXPECT_NEAR(std::abs(tables.corr_M(0, 0, 1, m) - dc.M(0, 0, 1, t)), 0.0,
                3e-3 * std::abs(tables.corr_M(0, 0, 1, 0)));
    EXPECT_NEAR(std::abs(tables.corr_C(0, 0, m) - dc.C(0, 0, t)), 0.0,
                3e-3 * std::abs(tables.corr_C(0, 0, 0)));
    EXPECT_NEAR(std::abs(tables.phase_f(0, 1, 0, m) - dc.f(0, 1, 0, t)), 0.0, 3e-3);
    EXPECT_NEAR(std::abs(tables.real_h(0, 0, m) - dc.h(0, 0, t)), 0.0,
                3e-3 * std::abs(tables.real_h(0, 0, 0)));
  }

  const auto sys = SiteHamiltonian::dimer(50.0, 0.0, 300.0);
  const auto frame_c = build_frame(sys, density, weighting, scheme, temperature);
  const auto frame_d = build_frame_discrete(sys, bath, weighting, temperature);
  EXPECT_NEAR(frame_d.w(0, 1), frame_c.w(0, 1), 1e-3);
  EXPECT_NEAR(frame_d.e_tilde(0), frame_c.e_tilde(0), 0.2);
  EXPECT_NEAR(frame_d.j_tilde(0, 1), frame_c.j_tilde(0, 1), 0.5);
  EXPECT_NEAR((frame_d.eigenvalues - frame_c.eigenvalues).cwiseAbs().maxCoeff(), 0.0, 0.5);
  EXPECT_NEAR((frame_d.u - frame_c.u).cwiseAbs().maxCoeff(), 0.0, 1e-3);
}

}  // namespace
