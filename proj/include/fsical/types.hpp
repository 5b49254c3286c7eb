#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsical {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The recoverable material/fluid triple plus the fixed fluid density.
struct PhysicalParams {
  double c1 = 1.0;     // Helmholtz potential constant, solid stiffness is 2*c1
  double rho_s = 1.0;  // solid density
  double mu_f = 1.0;   // fluid viscosity
  double rho_f = 1.0;  // fluid density, held fixed during inversion

  static constexpr std::size_t kUnknowns = 3;

  std::array<double, kUnknowns> unknowns() const { return {c1, rho_s, mu_f}; }

  static PhysicalParams from_unknowns(const std::array<double, kUnknowns>& p,
                                      double rho_f = 1.0) {
    return {p[0], p[1], p[2], rho_f};
  }

  /// Throws std::invalid_argument unless every field is strictly positive.
  void validate() const;

  bool operator==(const PhysicalParams&) const = default;
};

/// Geometry, boundary datum and discretization of the rotating-cylinder probe.
struct SolverConfig {
  double r0 = 3.0;
  double r_interface = 4.0;
  double r1 = 5.0;
  double omega_outer = 3.0;
  int n_elements = 100;
  double dt = 0.01;
  double t_final = 5.0;

  void validate() const;

  /// Number of implicit Euler steps needed to reach t_final.
  int step_count() const;

  bool operator==(const SolverConfig&) const = default;
};

}  // namespace fsical
