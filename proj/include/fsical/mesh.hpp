#pragma once

#include "fsical/types.hpp"

#include <array>
#include <vector>

namespace fsical {

enum class Region { Solid, Fluid };

/// Uniform degree-2 Lagrange mesh on [r0, r1]. Nodes are numbered by
/// position, so element e owns nodes 2e, 2e+1 (midpoint) and 2e+2.
struct Mesh {
  std::vector<double> vertices;  // n_elements + 1 entries
  Vector nodes;                  // 2 * n_elements + 1 entries
  std::vector<Region> node_region;
  std::vector<Region> element_region;
  Eigen::Index interface_node = 0;

  int element_count() const { return static_cast<int>(vertices.size()) - 1; }
  Eigen::Index node_count() const { return nodes.size(); }
  double r0() const { return vertices.front(); }
  double r1() const { return vertices.back(); }

  std::array<Eigen::Index, 3> element_nodes(int e) const {
    return {2 * Eigen::Index(e), 2 * Eigen::Index(e) + 1, 2 * Eigen::Index(e) + 2};
  }

  /// Index of the element containing r (the left one at shared vertices).
  int locate(double r) const;
};

Mesh build_mesh(const SolverConfig& config);

}  // namespace fsical
