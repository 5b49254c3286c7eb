#include "fsical/dataset.hpp"

#include "fsical/json.hpp"
#include "fsical/parallel.hpp"
#include "fsical/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fsical {

void ParameterRanges::validate() const {
  const char* names[] = {"c1", "rho_s", "mu_f"};
  const auto all = as_array();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!(all[i].lo > 0.0) || !(all[i].lo <= all[i].hi) || !std::isfinite(all[i].hi))
      throw std::invalid_argument(std::string("ParameterRanges: invalid interval for ") + names[i] +
                                  " (need 0 < lo <= hi)");
  }
}

bool ParameterRanges::contains(const PhysicalParams& p) const {
  const auto v = p.unknowns();
  const auto all = as_array();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < all[i].lo || v[i] > all[i].hi) return false;
  return true;
}

ProbeGrid ProbeGrid::uniform(int n_r, int n_t, const SolverConfig& config) {
  if (n_r < 1 || n_t < 1) throw std::invalid_argument("ProbeGrid: counts must be >= 1");
  ProbeGrid grid;
  grid.r.resize(n_r);
  grid.t.resize(n_t);
  for (int i = 0; i < n_r; ++i) grid.r[i] = config.r0 + (config.r1 - config.r0) * (i + 1) / (n_r + 1);
  for (int j = 0; j < n_t; ++j) grid.t[j] = config.t_final * (j + 1) / n_t;
  return grid;
}

void ProbeGrid::validate(const SolverConfig& config) const {
  if (r.empty() || t.empty()) throw std::invalid_argument("ProbeGrid: empty grid");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > config.r0 && r[i] < config.r1))
      throw std::invalid_argument("ProbeGrid: r outside (r0, r1)");
    if (i > 0 && !(r[i] > r[i - 1])) throw std::invalid_argument("ProbeGrid: r not increasing");
  }
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!(t[j] > 0.0 && t[j] <= config.t_final + 1e-12))
      throw std::invalid_argument("ProbeGrid: t outside (0, t_final]");
    if (j > 0 && !(t[j] > t[j - 1])) throw std::invalid_argument("ProbeGrid: t not increasing");
  }
}

Vector observe(const ForwardSolver& solver, const ProbeGrid& grid) {
  const auto snapshots = solver.simulate(grid.t);
  const std::size_t nt = grid.t.size();
  Vector w(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.r.size(); ++i)
    for (std::size_t j = 0; j < nt; ++j)
      w(static_cast<Eigen::Index>(i * nt + j)) = evaluate_at(snapshots[j], solver.mesh(), grid.r[i]);
  return w;
}

Matrix Dataset::feature_matrix() const {
  const Eigen::Index k = records.empty() ? 0 : records.front().observations.size();
  Matrix x(k, static_cast<Eigen::Index>(records.size()));
  for (std::size_t m = 0; m < records.size(); ++m) {
    if (records[m].observations.size() != k)
      throw std::invalid_argument("Dataset: ragged observation vectors");
    x.col(static_cast<Eigen::Index>(m)) = records[m].observations;
  }
  return x;
}

Matrix Dataset::label_matrix() const {
  Matrix y(3, static_cast<Eigen::Index>(records.size()));
  for (std::size_t m = 0; m < records.size(); ++m) {
    const auto p = records[m].params.unknowns();
    y.col(static_cast<Eigen::Index>(m)) << p[0], p[1], p[2];
  }
  return y;
}

std::vector<PhysicalParams> sample_parameters(const ParameterRanges& ranges, std::uint64_t seed,
                                              std::size_t m) {
  ranges.validate();
  Rng rng(seed);
  const auto box = ranges.as_array();
  std::vector<PhysicalParams> out;
  out.reserve(m);
  for (std::size_t n = 0; n < m; ++n) {
    std::array<double, 3> p{};
    for (std::size_t i = 0; i < 3; ++i) {
      const double u = uniform01(rng);
      p[i] = box[i].lo == box[i].hi ? box[i].lo : box[i].lo + u * (box[i].hi - box[i].lo);
    }
    out.push_back(PhysicalParams::from_unknowns(p));
  }
  return out;
}

namespace {

std::string describe(const PhysicalParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(c1=" << p.c1 << ", rho_s=" << p.rho_s << ", mu_f=" << p.mu_f << ")";
  return os.str();
}

}  // namespace

Dataset generate_dataset(const std::vector<PhysicalParams>& params, const ProbeGrid& grid,
                         const SolverConfig& config, unsigned threads) {
  config.validate();
  grid.validate(config);
  Dataset ds;
  ds.meta.grid = grid;
  ds.meta.config = config;
  ds.meta.count = params.size();
  ds.records.resize(params.size());
  parallel_for(
      params.size(),
      [&](std::size_t i) {
        try {
          ForwardSolver solver(params[i], config);
          ds.records[i] = {params[i], observe(solver, grid)};
        } catch (const std::exception& e) {
          throw std::runtime_error("generate_dataset: sample " + std::to_string(i) + " " +
                                   describe(params[i]) + " failed: " + e.what());
        }
      },
      threads);
  return ds;
}

Dataset make_dataset(const ParameterRanges& ranges, std::uint64_t seed, std::size_t m,
                     const ProbeGrid& grid, const SolverConfig& config, unsigned threads) {
  Dataset ds = generate_dataset(sample_parameters(ranges, seed, m), grid, config, threads);
  ds.meta.ranges = ranges;
  ds.meta.seed = seed;
  return ds;
}

NormalizationStats fit_normalization(const Dataset& dataset) {
  if (dataset.empty()) throw std::invalid_argument("fit_normalization: empty dataset");
  return {AffineScaling::fit(dataset.feature_matrix()), AffineScaling::fit(dataset.label_matrix())};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t m,
                                                                             double fraction,
                                                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  // Explicit Fisher-Yates so the permutation does not depend on the std::shuffle implementation.
  for (std::size_t i = m; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(m) * fraction));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return {std::move(train), std::move(val)};
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  auto [train_idx, val_idx] = split_indices(dataset.size(), fraction, seed);
  auto take = [&](const std::vector<std::size_t>& idx) {
    Dataset part;
    part.meta = dataset.meta;
    part.meta.count = idx.size();
    part.records.reserve(idx.size());
    for (std::size_t i : idx) part.records.push_back(dataset.records[i]);
    return part;
  };
  return {take(train_idx), take(val_idx)};
}

std::filesystem::path meta_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".meta.json";
  return p;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path.string());
  for (const auto& rec : dataset.records) {
    const auto p = rec.params.unknowns();
    Json line{{"p", Json::array({p[0], p[1], p[2]})}, {"w", to_std(rec.observations)}};
    out << line.dump() << '\n';
  }
  DatasetMeta meta = dataset.meta;
  meta.count = dataset.size();
  Json j = meta;
  j["fingerprint"] = fingerprint(meta);
  std::ofstream meta_out(meta_path(path));
  if (!meta_out) throw std::runtime_error("write_dataset: cannot open " + meta_path(path).string());
  meta_out << j.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) {
  Dataset ds;
  {
    std::ifstream in(meta_path(path));
    if (!in) throw std::runtime_error("read_dataset: missing metadata " + meta_path(path).string());
    try {
      ds.meta = Json::parse(in).get<DatasetMeta>();
    } catch (const Json::exception& e) {
      throw std::runtime_error("read_dataset: malformed metadata: " + std::string(e.what()));
    }
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset: cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      const auto p = j.at("p").get<std::vector<double>>();
      if (p.size() != 3) throw std::invalid_argument("\"p\" must have 3 entries");
      const auto w = j.at("w").get<std::vector<double>>();
      if (w.size() != ds.meta.grid.size())
        throw std::invalid_argument("\"w\" length does not match probe grid");
      ds.records.push_back({PhysicalParams::from_unknowns({p[0], p[1], p[2]}), to_vector(w)});
    } catch (const std::exception& e) {
      throw std::runtime_error("read_dataset: " + path.string() + ":" + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  if (ds.records.size() != ds.meta.count)
    throw std::runtime_error("read_dataset: record count " + std::to_string(ds.records.size()) +
                             " does not match metadata count " + std::to_string(ds.meta.count));
  return ds;
}

std::string fingerprint(const DatasetMeta& meta) {
  DatasetMeta core = meta;
  core.stats.reset();
  const std::string text = Json(core).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fsical
