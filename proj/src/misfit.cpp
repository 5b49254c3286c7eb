#include "fsical/misfit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fsical {

MisfitProblem MisfitProblem::synthetic(const PhysicalParams& truth, const ProbeGrid& grid,
                                       const SolverConfig& config, const ParameterRanges& box) {
  grid.validate(config);
  return {observe(ForwardSolver(truth, config), grid), grid, config, box};
}

double MisfitProblem::loss(const PhysicalParams& p) const {
  if (!box.contains(p)) throw std::out_of_range("MisfitProblem: parameters outside admissible box");
  if (static_cast<std::size_t>(targets.size()) != grid.size())
    throw std::invalid_argument("MisfitProblem: target length does not match grid");
  const Vector u = observe(ForwardSolver(p, config), grid);
  return (u - targets).squaredNorm() / static_cast<double>(targets.size());
}

CmaesInversion cmaes_invert(const MisfitProblem& problem, const CmaesInversionConfig& config) {
  problem.box.validate();
  const auto box = problem.box.as_array();
  Vector lo(3), width(3);
  for (int i = 0; i < 3; ++i) {
    lo(i) = box[i].lo;
    width(i) = box[i].hi - box[i].lo;
  }
  auto to_params = [&](const Vector& x) {
    std::array<double, 3> p{};
    for (int i = 0; i < 3; ++i)
      p[i] = width(i) > 0.0 ? std::clamp(lo(i) + x(i) * width(i), box[i].lo, box[i].hi) : lo(i);
    return PhysicalParams::from_unknowns(p);
  };

  CmaesInversion out;
  if ((width.array() == 0.0).all()) {
    out.best = to_params(Vector::Zero(3));
    out.best_loss = problem.loss(out.best);
    out.evaluations = 1;
    out.reason = Termination::TargetReached;
    out.best_history = {out.best_loss};
    return out;
  }

  CmaesConfig<double> cfg;
  cfg.mean0 = Vector::Constant(3, 0.5);
  cfg.sigma0 = config.sigma0;
  cfg.population = config.population;
  cfg.ftol = config.ftol;
  cfg.stop_value = config.stop_value;
  cfg.max_evaluations = config.max_evaluations;
  cfg.seed = config.seed;
  cfg.threads = config.threads;
  const Box<double> unit{Vector::Zero(3), Vector::Ones(3)};

  const auto result = cmaes_minimize<double>(
      [&](const Vector& x) { return problem.loss(to_params(x)); }, cfg, unit);
  out.best = to_params(result.best_x);
  out.best_loss = result.best_f;
  out.evaluations = result.evaluations;
  out.generations = result.generations;
  out.reason = result.reason;
  out.best_history = result.best_history;
  return out;
}

RecoveryReport recovery_report(const PhysicalParams& estimate, const PhysicalParams& truth) {
  RecoveryReport r;
  const auto e = estimate.unknowns();
  const auto t = truth.unknowns();
  for (int i = 0; i < 3; ++i) {
    r.absolute[i] = std::abs(e[i] - t[i]);
    r.relative_percent[i] = 100.0 * r.absolute[i] / t[i];
  }
  return r;
}

}  // namespace fsical
