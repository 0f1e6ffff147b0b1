#include "ppqme/relaxation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "ppqme/oracle.hpp"

namespace {

using namespace ppqme;
using std::complex;

CorrelationTables dimer_tables(const SpectralDensityModel& density,
                               const WeightingFunction& weighting, const TimeGrid& grid,
                               double temperature_K) {
  QuadratureScheme scheme;
  return build_tables(density, weighting, scheme, grid, temperature_K, {{0, 1}});
}

TEST(RelaxationTensor, VanishesAtTimeZero) {
  const auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const auto weighting = WeightingFunction::step(200.0);
  TimeGrid grid;
  grid.dt_fs = 0.5;
  grid.n_steps = 20;
  QuadratureScheme scheme;
  const auto h = SiteHamiltonian::dimer(0.0, 0.0, 300.0);
  const auto frame = build_frame(h, density, weighting, scheme, 300.0);
  const auto ki = kernel_integrals(dimer_tables(density, weighting, grid, 300.0), frame);
  const auto r0 = assemble_R(ki, frame, 0);
  EXPECT_DOUBLE_EQ(r0.t_fs, 0.0);
  EXPECT_NEAR(r0.r.cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(RelaxationTensor, TraceAndHermiticityStructure) {
  // Dense three-site system: every column of the flattened tensor must sum to
  // zero over the population rows (trace conservation), and swapping both
  // index pairs must conjugate (hermiticity preservation).
  SiteHamiltonian h;
  h.n_sites = 3;
  h.energies = Eigen::Vector3d(100.0, 0.0, -80.0);
  h.couplings = Eigen::Matrix3d::Zero();
  h.couplings(0, 1) = h.couplings(1, 0) = 120.0;
  h.couplings(1, 2) = h.couplings(2, 1) = 90.0;
  h.couplings(0, 2) = h.couplings(2, 0) = 40.0;
  h.validate();

  const auto density = SpectralDensityModel::ohmic_exponential(3, 1.0, 200.0);
  const auto weighting = WeightingFunction::step(250.0);
  TimeGrid grid;
  grid.dt_fs = 1.0;
  grid.n_steps = 20;
  QuadratureScheme scheme;
  const auto frame = build_frame(h, density, weighting, scheme, 300.0);
  const auto tables =
      build_tables(density, weighting, scheme, grid, 300.0, h.coupling_pairs());
  const auto ki = kernel_integrals(tables, frame);

  for (const int m : {7, 24, 40}) {
    const auto rt = assemble_R(ki, frame, m);
    EXPECT_DOUBLE_EQ(rt.t_fs, grid.time_at(m));
    const double scale = rt.r.cwiseAbs().maxCoeff();
    ASSERT_GT(scale, 0.0);
    for (int pp = 0; pp < 3; ++pp) {
      for (int qq = 0; qq < 3; ++qq) {
        cd col_sum = 0.0;
        for (int p = 0; p < 3; ++p) col_sum += rt.element(p, p, pp, qq);
        EXPECT_NEAR(std::abs(col_sum), 0.0, 1e-14 * scale);
      }
    }
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        for (int pp = 0; pp < 3; ++pp)
          for (int qq = 0; qq < 3; ++qq) {
            EXPECT_NEAR(std::abs(rt.element(q, p, qq, pp) - std::conj(rt.element(p, q, pp, qq))),
                        0.0, 1e-14 * scale);
          }
  }
}

// Zero weighting must reproduce the bare second-order time-local tensor.
// The 30-digit reference is for the resonant dimer (J = 300 cm^-1), Ohmic
// bath eta = 1, omega_c = 200 cm^-1, T = 300 K, at t = 50 fs.
TEST(RelaxationTensor, BareLimitAnchors) {
  const auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const auto weighting = WeightingFunction::zero();
  TimeGrid grid;
  grid.dt_fs = 0.5;
  grid.n_steps = 100;
  QuadratureScheme scheme;
  const auto h = SiteHamiltonian::dimer(0.0, 0.0, 300.0);
  const auto frame = build_frame(h, density, weighting, scheme, 300.0);
  EXPECT_DOUBLE_EQ(frame.w(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(frame.j_tilde(0, 1), 300.0);

  const auto ki = kernel_integrals(dimer_tables(density, weighting, grid, 300.0), frame);
  const int m50 = 200;
  const auto rt = assemble_R(ki, frame, m50);

  Eigen::Matrix4cd expected = Eigen::Matrix4cd::Zero();
  expected(0, 0) = -0.0016597998047874829;
  expected(0, 3) = -0.013666729948186662;
  expected(1, 1) = cd(0.0060034650716995897, -0.029020546832154809);
  expected(1, 2) = cd(0.025859057017121385, -0.014475596757635685);
  expected(2, 1) = cd(0.025859057017121385, +0.014475596757635685);
  expected(2, 2) = cd(0.0060034650716995897, +0.029020546832154809);
  expected(3, 0) = +0.0016597998047874829;
  expected(3, 3) = +0.013666729948186662;
  EXPECT_NEAR((rt.r - expected).cwiseAbs().maxCoeff(), 0.0, 1e-8);

  // Independent reference implementation with analytic time integrals.  The
  // engine integrates in time with a fourth-order rule, so the comparison
  // runs on a fine grid (half-step 0.05 fs) where that truncation is < 1e-12.
  TimeGrid fine;
  fine.dt_fs = 0.1;
  fine.n_steps = 500;
  const auto ki_fine = kernel_integrals(dimer_tables(density, weighting, fine, 300.0), frame);
  const auto rt_fine = assemble_R(ki_fine, frame, 1000);
  const Eigen::MatrixXcd ref = conventional_R(density, scheme, frame, 300.0, 50.0);
  EXPECT_NEAR((rt_fine.r - ref).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(RelaxationTensor, TwoStateClosedFormMatchesGeneral) {
  const auto density = SpectralDensityModel::ohmic_exponential(2, 1.0, 200.0);
  const auto weighting = WeightingFunction::smooth(250.0, 2.5);
  TimeGrid grid;
  grid.dt_fs = 0.5;
  grid.n_steps = 50;
  QuadratureScheme scheme;
  const auto h = SiteHamiltonian::dimer(150.0, -50.0, 200.0);
  const auto frame = build_frame(h, density, weighting, scheme, 300.0);
  const auto ki = kernel_integrals(dimer_tables(density, weighting, grid, 300.0), frame);
  for (const int m : {3, 40, 100}) {
    const auto general = assemble_R(ki, frame, m);
    const auto closed = assemble_R_two_state(ki, frame, m);
    const double scale = std::max(1e-30, general.r.cwiseAbs().maxCoeff());
    EXPECT_NEAR((general.r - closed.r).cwiseAbs().maxCoeff(), 0.0, 1e-12 * std::max(1.0, scale));
  }
}

// With the step weighting the tensor splits exactly into the transformed-hop
// part (high modes) plus the bare-force part (low modes), computed here by
// masking the density on either side of omega_h.
TEST(RelaxationTensor, StepTensorIsSumOfMaskedParts) {
  const double eta = 1.0, wc = 200.0, wh = 200.0;
  const auto full = SpectralDensityModel::ohmic_exponential(2, eta, wc);
  const auto high = SpectralDensityModel::from_function(
      2, [=](double w) { return w >= wh ? std::acos(-1.0) * eta * w * std::exp(-w / wc) : 0.0; },
      1.0, wc);
  const auto low = SpectralDensityModel::from_function(
      2, [=](double w) { return w < wh ? std::acos(-1.0) * eta * w * std::exp(-w / wc) : 0.0; },
      1.0, wc);
  const auto weighting = WeightingFunction::step(wh);
  TimeGrid grid;
  grid.dt_fs = 0.5;
  grid.n_steps = 60;
  QuadratureScheme scheme;
  const auto h = SiteHamiltonian::dimer(60.0, 0.0, 300.0);
  const auto frame = build_frame(h, full, weighting, scheme, 300.0);

  const auto ki_full = kernel_integrals(dimer_tables(full, weighting, grid, 300.0), frame);
  const auto ki_high = kernel_integrals(dimer_tables(high, weighting, grid, 300.0), frame);
  const auto ki_low = kernel_integrals(dimer_tables(low, weighting, grid, 300.0), frame);

  for (const int m : {10, 60, 120}) {
    const auto r_full = assemble_R(ki_full, frame, m);
    const auto r_high = assemble_R(ki_high, frame, m);
    const auto r_low = assemble_R(ki_low, frame, m);
    const double scale = std::max(1.0, r_full.r.cwiseAbs().maxCoeff());
    EXPECT_NEAR((r_full.r - r_high.r - r_low.r).cwiseAbs().maxCoeff(), 0.0, 1e-12 * scale);
    // The masked parts are individually nontrivial.
    EXPECT_GT(r_high.r.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(r_low.r.cwiseAbs().maxCoeff(), 1e-8);
  }
}

}  // namespace
