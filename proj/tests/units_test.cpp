#include "ppqme/units.hpp"

#include <gtest/gtest.h>

#include <stdexcept>

namespace {

using ppqme::units::beta_from_temperature;
using ppqme::units::hbar_cmfs;
using ppqme::units::kB_cmK;
using ppqme::units::thermal_coth;

TEST(Units, PhysicalConstants) {
  // hbar expressed so that exp(i * omega[cm^-1] * t[fs] / hbar) is a phase:
  // hbar = 1e15 / (2 pi c[cm/s]).
  EXPECT_NEAR(hbar_cmfs, 5308.8374588761448, 1e-9);
  // Boltzmann constant in cm^-1 per kelvin.
  EXPECT_NEAR(kB_cmK, 0.69503480048612741, 1e-13);
  // Room temperature in wavenumbers: the scale every coth argument is set by.
  EXPECT_NEAR(kB_cmK * 300.0, 208.51044014583822, 1e-10);
}

TEST(Units, BetaFromTemperature) {
  EXPECT_NEAR(beta_from_temperature(300.0), 0.0047959229250131127, 1e-17);
  EXPECT_NEAR(beta_from_temperature(300.0) * kB_cmK * 300.0, 1.0, 1e-15);
  EXPECT_THROW(beta_from_temperature(0.0), std::domain_error);
  EXPECT_THROW(beta_from_temperature(-5.0), std::domain_error);
}

TEST(Units, ThermalCothMidrange) {
  // Thermal occupation factor at 200 cm^-1 / 300 K.
  EXPECT_NEAR(thermal_coth(0.47959229250131127), 2.2425696470966322, 1e-13);
  EXPECT_NEAR(thermal_coth(2.5), 1.0135673098126085, 1e-13);
}

TEST(Units, ThermalCothSmallArgumentSeries) {
  // The series branch must join the closed form smoothly and keep full
  // precision where cosh/sinh would lose digits.
  EXPECT_NEAR(thermal_coth(1e-4), 10000.000033333333, 1e-6);
  EXPECT_NEAR(thermal_coth(1e-4) * 1e-4, 1.0000000033333333, 1e-14);
  // On either side of the branch switch the series and the closed form agree
  // at the same argument to near machine precision.
  const double just_below = 0.999e-3, just_above = 1.001e-3;
  EXPECT_NEAR(thermal_coth(just_below), 1.0 / std::tanh(just_below), 1e-12);
  EXPECT_NEAR(thermal_coth(just_above), 1.0 / std::tanh(just_above), 1e-12);
}

TEST(Units, ThermalCothSaturation) {
  // Deep quantum regime: coth -> 1 without overflow.
  EXPECT_DOUBLE_EQ(thermal_coth(25.0), 1.0);
  EXPECT_DOUBLE_EQ(thermal_coth(700.0), 1.0);
  EXPECT_THROW(thermal_coth(0.0), std::domain_error);
  EXPECT_THROW(thermal_coth(-1.0), std::domain_error);
}

}  // namespace
