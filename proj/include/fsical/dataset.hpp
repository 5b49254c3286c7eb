#pragma once

#include "fsical/forward_solver.hpp"
#include "fsical/normalization.hpp"
#include "fsical/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fsical {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Sampling box for (c1, rho_s, mu_f).
struct ParameterRanges {
  Interval c1{0.5, 1.5};
  Interval rho_s{0.9, 1.25};
  Interval mu_f{0.5, 1.5};

  std::array<Interval, PhysicalParams::kUnknowns> as_array() const { return {c1, rho_s, mu_f}; }
  /// Rejects lo <= 0 or lo > hi. A point interval lo == hi is allowed.
  void validate() const;
  bool contains(const PhysicalParams& p) const;

  bool operator==(const ParameterRanges&) const = default;
};

/// Space-time probe points (r_i, t_j); observation k = i * n_t + j.
struct ProbeGrid {
  std::vector<double> r;
  std::vector<double> t;

  std::size_t size() const { return r.size() * t.size(); }

  /// n_r points strictly inside (r0, r1) and n_t points in (0, t_final], both uniform.
  static ProbeGrid uniform(int n_r, int n_t, const SolverConfig& config);

  void validate(const SolverConfig& config) const;

  bool operator==(const ProbeGrid&) const = default;
};

/// Sample u(r_i, t_j) from a solver run. Length is grid.size().
Vector observe(const ForwardSolver& solver, const ProbeGrid& grid);

struct SampleRecord {
  PhysicalParams params;
  Vector observations;
};

struct DatasetMeta {
  ProbeGrid grid;
  SolverConfig config;
  ParameterRanges ranges;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::optional<NormalizationStats> stats;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<SampleRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  /// K x M matrix, one column of observations per record.
  Matrix feature_matrix() const;
  /// 3 x M matrix of (c1, rho_s, mu_f).
  Matrix label_matrix() const;
};

/// m independent triples, each coordinate uniform on its interval.
std::vector<PhysicalParams> sample_parameters(const ParameterRanges& ranges, std::uint64_t seed,
                                              std::size_t m);

/// One record per triple, in input order. Solves run on `threads` workers
/// (0 = hardware concurrency); the result does not depend on the count.
Dataset generate_dataset(const std::vector<PhysicalParams>& params, const ProbeGrid& grid,
                         const SolverConfig& config, unsigned threads = 0);

/// sample_parameters + generate_dataset with the sampling metadata filled in.
Dataset make_dataset(const ParameterRanges& ranges, std::uint64_t seed, std::size_t m,
                     const ProbeGrid& grid, const SolverConfig& config, unsigned threads = 0);

NormalizationStats fit_normalization(const Dataset& dataset);

/// Seeded shuffle into (train, validation) with round(M * fraction) validation records.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed);
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t m,
                                                                             double fraction,
                                                                             std::uint64_t seed);

/// JSONL records {"p": [...], "w": [...]} at `path`, metadata at meta_path(path).
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);
std::filesystem::path meta_path(const std::filesystem::path& path);

/// Stable hex digest of the metadata that determines the corpus.
std::string fingerprint(const DatasetMeta& meta);

}  // namespace fsical
