#pragma once

#include "fsical/banded.hpp"
#include "fsical/mesh.hpp"
#include "fsical/types.hpp"

#include <span>
#include <vector>

namespace fsical {

using Banded = BandedMatrix<double>;

/// Weak-form operators on the full node set (no boundary rows removed).
///   mass:            integral of rho(r) r phi_i phi_j
///   stiffness_fluid: integral of mu_f r phi_i' phi_j' over fluid elements
///   stiffness_solid: integral of 2 c1 r phi_i' phi_j' over solid elements
struct FemOperators {
  Banded mass;
  Banded stiffness_fluid;
  Banded stiffness_solid;
};

/// Assemble with 3-point Gauss quadrature per element, exact for these
/// integrands. c1 may be zero (no elastic stress); all other coefficients
/// must be strictly positive.
FemOperators assemble_operators(const Mesh& mesh, const PhysicalParams& params);

/// Implicit Euler system matrix M + dt K_f + dt^2 K_s.
Banded step_matrix(const FemOperators& ops, double dt);

/// Nodal angular velocity u and displacement d at time t.
struct SolutionState {
  Vector u;
  Vector d;
  double t = 0.0;
  int step = 0;
};

/// Degree-2 interpolation of u inside the element containing r.
double evaluate_at(const SolutionState& state, const Mesh& mesh, double r);

/// Assembled and factorized solver for one (params, config) pair. Immutable
/// after construction, so a single instance can serve concurrent callers.
class ForwardSolver {
 public:
  ForwardSolver(const PhysicalParams& params, const SolverConfig& config);

  const Mesh& mesh() const { return mesh_; }
  const FemOperators& operators() const { return ops_; }
  const SolverConfig& config() const { return config_; }
  const PhysicalParams& params() const { return params_; }

  /// The system at rest: u = 0, d = 0 at t = 0.
  SolutionState initial_state() const;

  /// One implicit Euler step, with u = 0 at r0 and u = omega_outer at r1.
  SolutionState advance(const SolutionState& state) const;

  /// Snapshots at the requested times, each taken at the nearest completed
  /// step. Times must lie in [0, t_final]. Stepping stops at the last
  /// requested snapshot.
  std::vector<SolutionState> simulate(std::span<const double> times) const;

  /// Start from an arbitrary state instead of rest.
  std::vector<SolutionState> simulate_from(SolutionState state, std::span<const double> times) const;

  /// Discrete energy 1/2 u'Mu + 1/2 d'K_s d.
  double energy(const SolutionState& state) const;

  int step_index(double t) const;

 private:
  PhysicalParams params_;
  SolverConfig config_;
  Mesh mesh_;
  FemOperators ops_;
  Vector outer_coupling_;  // column of the step matrix for the r1 node
  BandedLu<double> lu_;
};

/// Convenience wrapper: build a solver and return snapshots.
std::vector<SolutionState> simulate(const PhysicalParams& params, const SolverConfig& config,
                                    std::span<const double> times);

}  // namespace fsical
