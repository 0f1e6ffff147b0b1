#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

// Internal unit system: energies in cm^-1 (wavenumbers), time in fs,
// temperature in K.  Every frequency-like variable in this code base is an
// energy in cm^-1; dynamical phases are exp(i * energy * t / hbar) with hbar
// expressed in cm^-1 * fs, and thermal factors use beta in 1/cm^-1.
namespace ppqme::units {

inline constexpr double c_cm_per_s = 2.99792458e10;  // speed of light (exact)

// hbar in cm^-1 * fs: a quantum of energy E [cm^-1] oscillates with angular
// frequency E / hbar [1/fs].  Value: 1e15 / (2*pi*c) ~= 5308.8374587 cm^-1 fs.
inline constexpr double hbar_cmfs = 1.0e15 / (2.0 * std::numbers::pi * c_cm_per_s);

// Boltzmann constant in cm^-1 / K: k_B / (h*c).  ~= 0.69503480048 cm^-1/K.
inline constexpr double kB_cmK = 1.380649e-23 / (6.62607015e-34 * c_cm_per_s);

// beta = 1/(k_B T) in 1/cm^-1.
inline double beta_from_temperature(double temperature_K) {
  if (!(temperature_K > 0.0)) {
    throw std::domain_error("beta_from_temperature: temperature must be > 0 K");
  }
  return 1.0 / (kB_cmK * temperature_K);
}

// coth(x) for x > 0, numerically safe near x = 0.  Below the series threshold
// the Laurent expansion 1/x + x/3 - x^3/45 is used; both branches agree to
// better than 1e-12 relative at the switchover.
inline double thermal_coth(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("thermal_coth: argument must be > 0");
  }
  constexpr double series_threshold = 1e-3;
  if (x < series_threshold) {
    return 1.0 / x + x / 3.0 - x * x * x / 45.0;
  }
  if (x > 20.0) {
    return 1.0;  // 1 + 2e^-2x < 1 + 1e-17
  }
  return 1.0 / std::tanh(x);
}

}  // namespace ppqme::units
