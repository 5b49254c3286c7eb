#include "fsical/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fsical {

void PhysicalParams::validate() const {
  if (!(c1 > 0.0) || !(rho_s > 0.0) || !(mu_f > 0.0) || !(rho_f > 0.0))
    throw std::invalid_argument("PhysicalParams: all coefficients must be strictly positive");
}

void SolverConfig::validate() const {
  if (!(r0 < r_interface && r_interface < r1))
    throw std::invalid_argument("SolverConfig: require r0 < r_interface < r1");
  if (n_elements < 2 || n_elements % 2 != 0)
    throw std::invalid_argument("SolverConfig: n_elements must be even and >= 2, got " +
                                std::to_string(n_elements));
  if (!(dt > 0.0) || !(t_final >= dt))
    throw std::invalid_argument("SolverConfig: require dt > 0 and t_final >= dt");
  if (!std::isfinite(omega_outer))
    throw std::invalid_argument("SolverConfig: omega_outer must be finite");
}

int SolverConfig::step_count() const { return static_cast<int>(std::lround(t_final / dt)); }

int Mesh::locate(double r) const {
  if (!(r >= r0() && r <= r1()))
    throw std::out_of_range("Mesh: r = " + std::to_string(r) + " outside [" +
                            std::to_string(r0()) + ", " + std::to_string(r1()) + "]");
  auto it = std::lower_bound(vertices.begin(), vertices.end(), r);
  int e = static_cast<int>(it - vertices.begin()) - 1;
  return std::clamp(e, 0, element_count() - 1);
}

Mesh build_mesh(const SolverConfig& config) {
  config.validate();
  const int n = config.n_elements;
  const double length = config.r1 - config.r0;

  // The interface has to land on a vertex of the uniform mesh.
  const double split = (config.r_interface - config.r0) / length * n;
  const long interface_vertex = std::lround(split);
  if (std::abs(split - static_cast<double>(interface_vertex)) > 1e-9 || interface_vertex <= 0 ||
      interface_vertex >= n)
    throw std::invalid_argument("build_mesh: r_interface does not fall on a vertex for n_elements = " +
                                std::to_string(n));

  Mesh mesh;
  mesh.vertices.resize(n + 1);
  for (int i = 0; i <= n; ++i) mesh.vertices[i] = config.r0 + length * i / n;
  mesh.vertices.front() = config.r0;
  mesh.vertices.back() = config.r1;
  mesh.vertices[interface_vertex] = config.r_interface;

  mesh.nodes.resize(2 * n + 1);
  for (int e = 0; e < n; ++e) {
    mesh.nodes(2 * e) = mesh.vertices[e];
    mesh.nodes(2 * e + 1) = 0.5 * (mesh.vertices[e] + mesh.vertices[e + 1]);
  }
  mesh.nodes(2 * n) = mesh.vertices[n];

  mesh.interface_node = 2 * interface_vertex;
  mesh.element_region.resize(n);
  for (int e = 0; e < n; ++e)
    mesh.element_region[e] = e < interface_vertex ? Region::Solid : Region::Fluid;
  mesh.node_region.resize(2 * n + 1);
  for (Eigen::Index i = 0; i < mesh.nodes.size(); ++i)
    mesh.node_region[i] = i <= mesh.interface_node ? Region::Solid : Region::Fluid;
  return mesh;
}

}  // namespace fsical
