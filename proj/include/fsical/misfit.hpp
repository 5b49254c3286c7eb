#pragma once

#include "fsical/cmaes.hpp"
#include "fsical/dataset.hpp"

#include <array>
#include <string>

namespace fsical {

/// Mean squared deviation between simulated and target probe readings.
struct MisfitProblem {
  Vector targets;
  ProbeGrid grid;
  SolverConfig config;
  ParameterRanges box;

  /// Synthesize targets by running the forward solver at `truth`.
  static MisfitProblem synthetic(const PhysicalParams& truth, const ProbeGrid& grid,
                                 const SolverConfig& config, const ParameterRanges& box);

  /// One forward solve. Throws std::out_of_range if p lies outside the box.
  double loss(const PhysicalParams& p) const;
};

struct CmaesInversionConfig {
  double ftol = 1e-6;
  double stop_value = 1e-12;
  long max_evaluations = 5000;
  double sigma0 = 0.3;  // in units of the box width
  int population = 0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct CmaesInversion {
  PhysicalParams best;
  double best_loss = 0.0;
  long evaluations = 0;
  long generations = 0;
  Termination reason = Termination::None;
  std::vector<double> best_history;
};

/// Search in box-normalized coordinates [0, 1]^3 starting from the box center.
CmaesInversion cmaes_invert(const MisfitProblem& problem, const CmaesInversionConfig& config);

struct RecoveryReport {
  std::array<double, 3> absolute{};
  std::array<double, 3> relative_percent{};
};

RecoveryReport recovery_report(const PhysicalParams& estimate, const PhysicalParams& truth);

}  // namespace fsical
