#include "fsical/forward_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fsical {
namespace {

constexpr int kLowerBand = 2;
constexpr int kUpperBand = 2;

struct GaussRule {
  std::array<double, 3> x;
  std::array<double, 3> w;
};

// Three-point Gauss-Legendre on [0, 1].
const GaussRule& gauss3() {
  static const GaussRule rule = [] {
    const double a = 0.5 * std::sqrt(3.0 / 5.0);
    return GaussRule{{0.5 - a, 0.5, 0.5 + a}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }();
  return rule;
}

// Quadratic Lagrange basis on the reference element [0, 1] with nodes 0, 1/2, 1.
std::array<double, 3> shape(double s) {
  return {(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)};
}

std::array<double, 3> shape_derivative(double s) {
  return {4.0 * s - 3.0, 4.0 - 8.0 * s, 4.0 * s - 1.0};
}

}  // namespace

FemOperators assemble_operators(const Mesh& mesh, const PhysicalParams& params) {
  if (!(params.c1 >= 0.0) || !(params.rho_s > 0.0) || !(params.mu_f > 0.0) || !(params.rho_f > 0.0))
    throw std::invalid_argument(
        "assemble_operators: require c1 >= 0 and rho_s, mu_f, rho_f > 0");

  const Eigen::Index n = mesh.node_count();
  FemOperators ops{Banded(n, kLowerBand, kUpperBand), Banded(n, kLowerBand, kUpperBand),
                   Banded(n, kLowerBand, kUpperBand)};
  const GaussRule& rule = gauss3();

  for (int e = 0; e < mesh.element_count(); ++e) {
    const double a = mesh.vertices[e];
    const double h = mesh.vertices[e + 1] - a;
    const bool solid = mesh.element_region[e] == Region::Solid;
    const double rho = solid ? params.rho_s : params.rho_f;
    const double xi = solid ? 2.0 * params.c1 : params.mu_f;
    Banded& stiffness = solid ? ops.stiffness_solid : ops.stiffness_fluid;

    Eigen::Matrix3d me = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d ke = Eigen::Matrix3d::Zero();
    for (int q = 0; q < 3; ++q) {
      const double s = rule.x[q];
      const double r = a + h * s;
      const auto phi = shape(s);
      const auto dphi = shape_derivative(s);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          me(i, j) += rule.w[q] * h * rho * r * phi[i] * phi[j];
          ke(i, j) += rule.w[q] * xi * r * dphi[i] * dphi[j] / h;
        }
    }

    const auto idx = mesh.element_nodes(e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        ops.mass(idx[i], idx[j]) += me(i, j);
        stiffness(idx[i], idx[j]) += ke(i, j);
      }
  }
  return ops;
}

Banded step_matrix(const FemOperators& ops, double dt) {
  return ops.mass + dt * ops.stiffness_fluid + (dt * dt) * ops.stiffness_solid;
}

double evaluate_at(const SolutionState& state, const Mesh& mesh, double r) {
  if (state.u.size() != mesh.node_count())
    throw std::invalid_argument("evaluate_at: state does not match mesh");
  const int e = mesh.locate(r);
  const double a = mesh.vertices[e];
  const double b = mesh.vertices[e + 1];
  const auto idx = mesh.element_nodes(e);
  // Exact nodal values at vertices, without relying on the shape functions.
  if (r == a) return state.u(idx[0]);
  if (r == b) return state.u(idx[2]);
  if (r == mesh.nodes(idx[1])) return state.u(idx[1]);
  const double s = (r - a) / (b - a);
  const auto phi = shape(s);
  return phi[0] * state.u(idx[0]) + phi[1] * state.u(idx[1]) + phi[2] * state.u(idx[2]);
}

ForwardSolver::ForwardSolver(const PhysicalParams& params, const SolverConfig& config)
    : params_(params), config_(config), mesh_(build_mesh(config)) {
  params_.validate();
  ops_ = assemble_operators(mesh_, params_);

  Banded a = step_matrix(ops_, config_.dt);
  const Eigen::Index last = mesh_.node_count() - 1;
  // Keep the column of the outer node so its Dirichlet value can be lifted
  // to the right-hand side; the inner node carries homogeneous data.
  outer_coupling_ = Vector::Zero(mesh_.node_count());
  for (Eigen::Index i = std::max<Eigen::Index>(0, last - kLowerBand); i < last; ++i)
    outer_coupling_(i) = a(i, last);
  a.set_identity_row(0);
  a.set_identity_col(0);
  a.set_identity_row(last);
  a.set_identity_col(last);
  lu_.compute(std::move(a));
}

SolutionState ForwardSolver::initial_state() const {
  const Eigen::Index n = mesh_.node_count();
  return {Vector::Zero(n), Vector::Zero(n), 0.0, 0};
}

SolutionState ForwardSolver::advance(const SolutionState& state) const {
  const Eigen::Index last = mesh_.node_count() - 1;
  const double dt = config_.dt;
  Vector rhs = ops_.mass * state.u - dt * (ops_.stiffness_solid * state.d);
  rhs -= config_.omega_outer * outer_coupling_;
  rhs(0) = 0.0;
  rhs(last) = config_.omega_outer;

  SolutionState next;
  next.u = lu_.solve(rhs);
  if (!next.u.allFinite()) throw std::runtime_error("ForwardSolver: non-finite solution");
  next.d = state.d + dt * next.u;
  next.step = state.step + 1;
  next.t = next.step * dt;
  return next;
}

int ForwardSolver::step_index(double t) const {
  if (!(t >= 0.0) || t > config_.t_final + 0.5 * config_.dt)
    throw std::out_of_range("ForwardSolver: snapshot time " + std::to_string(t) +
                            " outside [0, t_final]");
  return static_cast<int>(std::lround(t / config_.dt));
}

std::vector<SolutionState> ForwardSolver::simulate(std::span<const double> times) const {
  return simulate_from(initial_state(), times);
}

std::vector<SolutionState> ForwardSolver::simulate_from(SolutionState state,
                                                        std::span<const double> times) const {
  std::vector<int> steps;
  steps.reserve(times.size());
  for (double t : times) {
    const int k = step_index(t);
    if (k < state.step)
      throw std::invalid_argument("ForwardSolver: snapshot time precedes the start state");
    steps.push_back(k);
  }

  std::vector<int> order(steps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return steps[a] < steps[b]; });

  std::vector<SolutionState> out(times.size());
  for (int i : order) {
    while (state.step < steps[i]) state = advance(state);
    out[i] = state;
  }
  return out;
}

double ForwardSolver::energy(const SolutionState& state) const {
  return 0.5 * state.u.dot(ops_.mass * state.u) + 0.5 * state.d.dot(ops_.stiffness_solid * state.d);
}

std::vector<SolutionState> simulate(const PhysicalParams& params, const SolverConfig& config,
                                    std::span<const double> times) {
  return ForwardSolver(params, config).simulate(times);
}

}  // namespace fsical
