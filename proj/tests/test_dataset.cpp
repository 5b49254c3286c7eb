#include "fsical/dataset.hpp"
#include "fsical/study.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace fsical;

namespace {

SolverConfig small_config() {
  SolverConfig c;
  c.n_elements = 20;
  c.dt = 0.05;
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fsical_test_dataset_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(SampleParameters, PointMassGivesConstantTriples) {
  ParameterRanges r{{1, 1}, {1, 1}, {1, 1}};
  for (const auto& p : sample_parameters(r, 5, 20)) EXPECT_EQ(p, (PhysicalParams{1, 1, 1, 1}));
}

TEST(SampleParameters, DeterministicAndSeedSensitive) {
  const ParameterRanges r;
  const auto a = sample_parameters(r, 42, 50);
  const auto b = sample_parameters(r, 42, 50);
  const auto c = sample_parameters(r, 43, 50);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SampleParameters, StaysInsideRangesAndCoversThem) {
  const ParameterRanges r;
  const auto s = sample_parameters(r, 7, 4000);
  ASSERT_EQ(s.size(), 4000u);
  double mean_c1 = 0;
  for (const auto& p : s) {
    EXPECT_TRUE(r.contains(p));
    mean_c1 += p.c1 / s.size();
  }
  EXPECT_NEAR(mean_c1, 1.0, 0.03);
}

TEST(SampleParameters, RejectsBadIntervals) {
  EXPECT_THROW(sample_parameters({{1.5, 0.5}, {0.9, 1.25}, {0.5, 1.5}}, 1, 3), std::invalid_argument);
  EXPECT_THROW(sample_parameters({{0.0, 1.0}, {0.9, 1.25}, {0.5, 1.5}}, 1, 3), std::invalid_argument);
  EXPECT_THROW(sample_parameters({{0.5, 1.5}, {-1.0, 1.25}, {0.5, 1.5}}, 1, 3), std::invalid_argument);
}

TEST(SampleParameters, ReferenceTruthsInsideDefaultRanges) {
  const ParameterRanges r;
  const auto truths = reference_truths();
  ASSERT_EQ(truths.size(), 5u);
  for (const auto& p : truths) EXPECT_TRUE(r.contains(p));
  EXPECT_DOUBLE_EQ(truths[2].c1, 0.611026);
  EXPECT_DOUBLE_EQ(truths[2].rho_s, 1.10804);
  EXPECT_DOUBLE_EQ(truths[2].mu_f, 1.46802);
}

TEST(ProbeGrid, UniformInteriorAndFinalTime) {
  const SolverConfig c;
  const auto g = ProbeGrid::uniform(10, 5, c);
  ASSERT_EQ(g.r.size(), 10u);
  ASSERT_EQ(g.t.size(), 5u);
  EXPECT_EQ(g.size(), 50u);
  EXPECT_NEAR(g.r.front(), 3.0 + 2.0 / 11.0, 1e-14);
  EXPECT_NEAR(g.r.back(), 5.0 - 2.0 / 11.0, 1e-14);
  EXPECT_DOUBLE_EQ(g.t.front(), 1.0);
  EXPECT_DOUBLE_EQ(g.t.back(), 5.0);
  EXPECT_NO_THROW(g.validate(c));
  // both regions are probed
  EXPECT_LT(g.r.front(), c.r_interface);
  EXPECT_GT(g.r.back(), c.r_interface);
}

TEST(ProbeGrid, ValidationErrors) {
  const SolverConfig c;
  EXPECT_THROW(ProbeGrid::uniform(0, 5, c), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{3.0}, {1.0}}.validate(c)), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{4.5}, {0.0}}.validate(c)), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{4.5}, {5.5}}.validate(c)), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{4.5, 4.0}, {1.0}}.validate(c)), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{4.5}, {2.0, 2.0}}.validate(c)), std::invalid_argument);
  EXPECT_THROW((ProbeGrid{{}, {1.0}}.validate(c)), std::invalid_argument);
}

TEST(GenerateDataset, SinglePointReachesSteadyValue) {
  SolverConfig c;
  c.t_final = 60.0;
  c.dt = 0.05;
  const ProbeGrid g{{4.5}, {60.0}};
  const auto ds = generate_dataset({PhysicalParams{0.7, 1.2, 0.9, 1.0}}, g, c, 1);
  ASSERT_EQ(ds.size(), 1u);
  ASSERT_EQ(ds.records[0].observations.size(), 1);
  EXPECT_NEAR(ds.records[0].observations(0), 3.0 * std::log(1.125) / std::log(1.25), 1e-4);
  EXPECT_NEAR(ds.records[0].observations(0), 1.5835, 1e-4);
}

TEST(GenerateDataset, EmptyListGivesEmptyDatasetWithMeta) {
  const SolverConfig c;
  const auto g = ProbeGrid::uniform(10, 5, c);
  const auto ds = make_dataset(ParameterRanges{}, 3, 0, g, c);
  EXPECT_TRUE(ds.empty());
  EXPECT_EQ(ds.meta.count, 0u);
  EXPECT_EQ(ds.meta.grid, g);
  EXPECT_EQ(ds.meta.seed, 3u);
  EXPECT_EQ(ds.feature_matrix().cols(), 0);
  EXPECT_THROW(fit_normalization(ds), std::invalid_argument);
}

TEST(GenerateDataset, ShapeAndOrdering) {
  const SolverConfig c = small_config();
  const auto g = ProbeGrid::uniform(10, 5, c);
  const auto params = sample_parameters(ParameterRanges{}, 11, 40);
  const auto ds = generate_dataset(params, g, c, 2);
  ASSERT_EQ(ds.size(), 40u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(ds.records[i].params, params[i]);
    EXPECT_EQ(ds.records[i].observations.size(), 50);
    EXPECT_TRUE(ds.records[i].observations.allFinite());
  }
  const Matrix x = ds.feature_matrix();
  const Matrix y = ds.label_matrix();
  EXPECT_EQ(x.rows(), 50);
  EXPECT_EQ(x.cols(), 40);
  EXPECT_EQ(y.rows(), 3);
  EXPECT_EQ(y(1, 7), params[7].rho_s);
  EXPECT_EQ(x.col(9), ds.records[9].observations);
}

TEST(GenerateDataset, DefaultGridThousandSamples) {
  const SolverConfig c;
  const auto ds = make_dataset(ParameterRanges{}, 1, 1000, ProbeGrid::uniform(10, 5, c), c);
  ASSERT_EQ(ds.size(), 1000u);
  EXPECT_EQ(ds.feature_matrix().rows(), 50);
  EXPECT_TRUE(ds.feature_matrix().allFinite());
}

TEST(GenerateDataset, ThreadCountDoesNotChangeResult) {
  const SolverConfig c = small_config();
  const auto g = ProbeGrid::uniform(5, 5, c);
  const auto a = make_dataset(ParameterRanges{}, 9, 30, g, c, 1);
  const auto b = make_dataset(ParameterRanges{}, 9, 30, g, c, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.records[i].params, b.records[i].params);
    EXPECT_EQ(a.records[i].observations, b.records[i].observations);
  }
  EXPECT_EQ(fingerprint(a.meta), fingerprint(b.meta));
}

TEST(GenerateDataset, RecordsMatchFreshSolves) {
  const SolverConfig c = small_config();
  const auto g = ProbeGrid::uniform(10, 5, c);
  const auto ds = make_dataset(ParameterRanges{}, 21, 25, g, c);
  std::mt19937_64 pick(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto& rec = ds.records[pick() % ds.size()];
    const ForwardSolver solver(rec.params, c);
    const auto snaps = solver.simulate(g.t);
    for (std::size_t i = 0; i < g.r.size(); ++i)
      for (std::size_t j = 0; j < g.t.size(); ++j)
        EXPECT_EQ(rec.observations(i * g.t.size() + j), evaluate_at(snaps[j], solver.mesh(), g.r[i]));
  }
}

TEST(GenerateDataset, FailureNamesTheSample) {
  const SolverConfig c = small_config();
  const auto g = ProbeGrid::uniform(2, 2, c);
  std::vector<PhysicalParams> params{{1, 1, 1, 1}, {1, -2, 1, 1}};
  try {
    generate_dataset(params, g, c, 1);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("sample 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("rho_s=-2"), std::string::npos) << msg;
  }
}

TEST(Normalization, EndpointsAndConstantFeature) {
  Matrix x(2, 3);
  x << 2, 4, 3,
       3, 3, 3;
  const auto s = AffineScaling::fit(x);
  const Matrix y = s.apply(x);
  EXPECT_DOUBLE_EQ(y(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(y(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(y(0, 2), 0.0);
  EXPECT_EQ(y.row(1), Eigen::RowVector3d::Zero());
  EXPECT_EQ(s.invert(y).row(1), x.row(1));
}

TEST(Normalization, RoundTripAndRange) {
  const SolverConfig c = small_config();
  const auto ds = make_dataset(ParameterRanges{}, 4, 60, ProbeGrid::uniform(10, 5, c), c);
  const auto stats = fit_normalization(ds);
  for (const auto& [scale, data] :
       {std::pair{stats.features, ds.feature_matrix()}, std::pair{stats.labels, ds.label_matrix()}}) {
    const Matrix y = scale.apply(data);
    EXPECT_LE(y.maxCoeff(), 1.0);
    EXPECT_GE(y.minCoeff(), -1.0);
    const Matrix back = scale.invert(y);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      const double ref = std::max(std::abs(data(i)), 1e-300);
      EXPECT_LE(std::abs(back(i) - data(i)) / ref, 1e-12);
    }
    for (Eigen::Index j = 0; j < data.cols(); ++j) EXPECT_EQ(scale.apply(Vector(data.col(j))), y.col(j));
  }
}

TEST(Normalization, SizeMismatchThrows) {
  Matrix x = Matrix::Random(3, 4);
  const auto s = AffineScaling::fit(x);
  EXPECT_THROW(s.apply(Vector(Vector::Zero(2))), std::invalid_argument);
  EXPECT_THROW(s.invert(Matrix(Matrix::Zero(4, 1))), std::invalid_argument);
}

TEST(Split, SizesAndPartition) {
  const auto [train, val] = split_indices(10, 0.2, 5);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(val.size(), 2u);
  std::set<std::size_t> all(train.begin(), train.end());
  for (auto v : val) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9u);

  const auto [t2, v2] = split_indices(1000, 0.2, 5);
  EXPECT_EQ(v2.size(), 200u);
  const auto [t3, v3] = split_indices(7, 0.25, 5);
  EXPECT_EQ(v3.size(), 2u);
}

TEST(Split, DeterministicGivenSeed) {
  EXPECT_EQ(split_indices(100, 0.3, 8), split_indices(100, 0.3, 8));
  EXPECT_NE(split_indices(100, 0.3, 8), split_indices(100, 0.3, 9));
}

TEST(Split, RejectsFractionOutsideUnitInterval) {
  EXPECT_THROW(split_indices(10, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split_indices(10, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(split_indices(10, -0.5, 1), std::invalid_argument);
}

TEST(Split, DatasetRecordsFollowIndices) {
  const SolverConfig c = small_config();
  const auto ds = make_dataset(ParameterRanges{}, 2, 10, ProbeGrid::uniform(2, 2, c), c);
  const auto [train, val] = split(ds, 0.2, 6);
  const auto [ti, vi] = split_indices(10, 0.2, 6);
  ASSERT_EQ(train.size(), 8u);
  ASSERT_EQ(val.size(), 2u);
  for (std::size_t k = 0; k < ti.size(); ++k) EXPECT_EQ(train.records[k].params, ds.records[ti[k]].params);
  for (std::size_t k = 0; k < vi.size(); ++k) EXPECT_EQ(val.records[k].params, ds.records[vi[k]].params);
  EXPECT_EQ(train.meta.grid, ds.meta.grid);
}

TEST(Persistence, RoundTripIsExact) {
  const auto dir = scratch_dir("roundtrip");
  const SolverConfig c = small_config();
  auto ds = make_dataset(ParameterRanges{}, 12, 15, ProbeGrid::uniform(10, 5, c), c);
  ds.meta.stats = fit_normalization(ds);
  write_dataset(dir / "d.jsonl", ds);
  EXPECT_TRUE(std::filesystem::exists(meta_path(dir / "d.jsonl")));
  const auto back = read_dataset(dir / "d.jsonl");
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.records[i].params, ds.records[i].params);
    EXPECT_EQ(back.records[i].observations, ds.records[i].observations);
  }
  EXPECT_EQ(back.meta.grid, ds.meta.grid);
  EXPECT_EQ(back.meta.ranges, ds.meta.ranges);
  EXPECT_EQ(back.meta.seed, ds.meta.seed);
  ASSERT_TRUE(back.meta.stats.has_value());
  EXPECT_EQ(*back.meta.stats, *ds.meta.stats);
  EXPECT_EQ(fingerprint(back.meta), fingerprint(ds.meta));
}

TEST(Persistence, RecordLineFormat) {
  const auto dir = scratch_dir("format");
  const SolverConfig c = small_config();
  const auto ds = make_dataset(ParameterRanges{}, 12, 2, ProbeGrid::uniform(2, 1, c), c);
  write_dataset(dir / "d.jsonl", ds);
  std::ifstream in(dir / "d.jsonl");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("{\"p\":[", 0), 0u) << line;
  EXPECT_NE(line.find("\"w\":["), std::string::npos);
}

TEST(Persistence, SameSeedGivesIdenticalBytes) {
  const auto dir = scratch_dir("bytes");
  const SolverConfig c = small_config();
  const auto g = ProbeGrid::uniform(5, 2, c);
  write_dataset(dir / "a.jsonl", make_dataset(ParameterRanges{}, 77, 12, g, c, 1));
  write_dataset(dir / "b.jsonl", make_dataset(ParameterRanges{}, 77, 12, g, c, 3));
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_EQ(slurp(meta_path(dir / "a.jsonl")), slurp(meta_path(dir / "b.jsonl")));
}

TEST(Persistence, MalformedInputsAreReported) {
  const auto dir = scratch_dir("bad");
  const SolverConfig c = small_config();
  const auto ds = make_dataset(ParameterRanges{}, 1, 3, ProbeGrid::uniform(2, 2, c), c);
  write_dataset(dir / "d.jsonl", ds);
  const std::string good = slurp(dir / "d.jsonl");

  auto expect_error = [&](const std::string& body, const std::string& needle) {
    std::ofstream(dir / "d.jsonl", std::ios::binary) << body;
    try {
      read_dataset(dir / "d.jsonl");
      ADD_FAILURE() << "no error for " << needle;
    } catch (const std::runtime_error& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(good.substr(0, good.size() / 2), ":2:");
  expect_error("{\"p\":[1,1],\"w\":[0,0,0,0]}\n" + good, ":1:");
  expect_error("{\"p\":[1,1,1],\"w\":[0,0]}\n", ":1:");
  expect_error(good + "{\"p\":[1,1,1],\"w\":[0,0,0,0]}\n", "count");

  std::filesystem::remove(meta_path(dir / "d.jsonl"));
  EXPECT_THROW(read_dataset(dir / "d.jsonl"), std::runtime_error);
}

TEST(Fingerprint, DependsOnCorpusDefinitionOnly) {
  const SolverConfig c;
  DatasetMeta a;
  a.grid = ProbeGrid::uniform(10, 5, c);
  a.config = c;
  a.seed = 1;
  a.count = 100;
  DatasetMeta b = a;
  b.stats = NormalizationStats{};
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_EQ(fingerprint(a).size(), 16u);
  b.seed = 2;
  EXPECT_NE(fingerprint(a), fingerprint(b));
  b = a;
  b.grid = ProbeGrid::uniform(5, 5, c);
  EXPECT_NE(fingerprint(a), fingerprint(b));
  b = a;
  b.ranges.mu_f.hi = 2.0;
  EXPECT_NE(fingerprint(a), fingerprint(b));
}
