#pragma once

#include <stdexcept>
#include <string>

namespace mfgjd {

/// Spectral truncation rejected: the characteristic function has not decayed
/// below the required threshold at the edge of the frequency grid.
class AliasingError : public std::runtime_error {
 public:
  AliasingError(double edge_magnitude, const std::string& what)
      : std::runtime_error(what), edge_magnitude_(edge_magnitude) {}
  double edge_magnitude() const { return edge_magnitude_; }

 private:
  double edge_magnitude_;
};

/// Explicit transport step would be unstable at the requested time step.
class CflError : public std::runtime_error {
 public:
  CflError(double admissible_dt, const std::string& what)
      : std::runtime_error(what), admissible_dt_(admissible_dt) {}
  double admissible_dt() const { return admissible_dt_; }

 private:
  double admissible_dt_;
};

/// Two-point boundary problem is singular (eigen-period resonance).
class ResonanceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The terminal-expectation closed form is evaluated at a horizon where its
/// trigonometric denominator vanishes.
class SingularHorizonError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Scenario configuration failed validation; message carries the field path.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mfgjd
