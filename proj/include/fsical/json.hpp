#pragma once

// nlohmann::json conversions for the persisted types.

#include "fsical/dataset.hpp"
#include "fsical/normalization.hpp"
#include "fsical/types.hpp"

#include <json.hpp>

#include <vector>

namespace fsical {

using Json = nlohmann::json;

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void to_json(Json& j, const PhysicalParams& p) {
  j = Json{{"c1", p.c1}, {"rho_s", p.rho_s}, {"mu_f", p.mu_f}, {"rho_f", p.rho_f}};
}
inline void from_json(const Json& j, PhysicalParams& p) {
  p.c1 = j.at("c1").get<double>();
  p.rho_s = j.at("rho_s").get<double>();
  p.mu_f = j.at("mu_f").get<double>();
  p.rho_f = j.value("rho_f", 1.0);
}

inline void to_json(Json& j, const SolverConfig& c) {
  j = Json{{"r0", c.r0},
           {"r_interface", c.r_interface},
           {"r1", c.r1},
           {"omega_outer", c.omega_outer},
           {"n_elements", c.n_elements},
           {"dt", c.dt},
           {"t_final", c.t_final}};
}
inline void from_json(const Json& j, SolverConfig& c) {
  c.r0 = j.at("r0").get<double>();
  c.r_interface = j.at("r_interface").get<double>();
  c.r1 = j.at("r1").get<double>();
  c.omega_outer = j.at("omega_outer").get<double>();
  c.n_elements = j.at("n_elements").get<int>();
  c.dt = j.at("dt").get<double>();
  c.t_final = j.at("t_final").get<double>();
}

inline void to_json(Json& j, const Interval& i) { j = Json::array({i.lo, i.hi}); }
inline void from_json(const Json& j, Interval& i) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("interval must be [lo, hi]");
  i.lo = j[0].get<double>();
  i.hi = j[1].get<double>();
}

inline void to_json(Json& j, const ParameterRanges& r) {
  j = Json{{"c1", r.c1}, {"rho_s", r.rho_s}, {"mu_f", r.mu_f}};
}
inline void from_json(const Json& j, ParameterRanges& r) {
  r.c1 = j.at("c1").get<Interval>();
  r.rho_s = j.at("rho_s").get<Interval>();
  r.mu_f = j.at("mu_f").get<Interval>();
}

inline void to_json(Json& j, const ProbeGrid& g) { j = Json{{"r", g.r}, {"t", g.t}}; }
inline void from_json(const Json& j, ProbeGrid& g) {
  g.r = j.at("r").get<std::vector<double>>();
  g.t = j.at("t").get<std::vector<double>>();
}

inline void to_json(Json& j, const AffineScaling& s) {
  j = Json{{"min", to_std(s.min)}, {"max", to_std(s.max)}};
}
inline void from_json(const Json& j, AffineScaling& s) {
  s.min = to_vector(j.at("min").get<std::vector<double>>());
  s.max = to_vector(j.at("max").get<std::vector<double>>());
  if (s.min.size() != s.max.size()) throw std::invalid_argument("scaling min/max length mismatch");
}

inline void to_json(Json& j, const NormalizationStats& s) {
  j = Json{{"features", s.features}, {"labels", s.labels}};
}
inline void from_json(const Json& j, NormalizationStats& s) {
  s.features = j.at("features").get<AffineScaling>();
  s.labels = j.at("labels").get<AffineScaling>();
}

inline void to_json(Json& j, const DatasetMeta& m) {
  j = Json{{"grid", m.grid},     {"config", m.config}, {"ranges", m.ranges},
           {"seed", m.seed},     {"count", m.count}};
  if (m.stats) j["stats"] = *m.stats;
}
inline void from_json(const Json& j, DatasetMeta& m) {
  m.grid = j.at("grid").get<ProbeGrid>();
  m.config = j.at("config").get<SolverConfig>();
  m.ranges = j.at("ranges").get<ParameterRanges>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.count = j.at("count").get<std::size_t>();
  if (j.contains("stats")) m.stats = j.at("stats").get<NormalizationStats>();
}

}  // namespace fsical
