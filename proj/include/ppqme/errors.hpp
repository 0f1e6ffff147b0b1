#pragma once

#include <stdexcept>
#include <string>

namespace ppqme {

// Base class for all structured engine errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration rejected before any computation (bad key, bad value, or a
// combination known to be unusable, e.g. smooth alpha <= density low-frequency
// power without the explicit override).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A frequency integral was detected to diverge at the omega -> 0 end
// (panel contributions failing to decay as panels shrink).  Carries the name
// of the offending integral for diagnostics.  This is the expected signal for
// an Ohmic density with the unity weighting (full displacement of arbitrarily
// slow modes), where the Debye-Waller factor collapses to zero.
class DivergentIntegral : public Error {
 public:
  DivergentIntegral(const std::string& integral_name, const std::string& detail)
      : Error("divergent integral [" + integral_name + "]: " + detail),
        integral_name_(integral_name) {}
  const std::string& integral_name() const { return integral_name_; }

 private:
  std::string integral_name_;
};

// Propagation failure: NaN/overflow in the state or trace drift beyond the
// hard bound.  Reports the last time (fs) at which the state was still good.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& msg, double last_good_time_fs)
      : Error(msg + " (last good time: " + std::to_string(last_good_time_fs) + " fs)"),
        last_good_time_fs_(last_good_time_fs) {}
  double last_good_time_fs() const { return last_good_time_fs_; }

 private:
  double last_good_time_fs_;
};

}  // namespace ppqme
