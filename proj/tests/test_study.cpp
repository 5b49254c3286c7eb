#include "fsical/study.hpp"

#include "fsical/json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fsical;

namespace {

StudySpec small_spec(StudyKind kind) {
  StudySpec s;
  s.kind = kind;
  s.solver.n_elements = 20;
  s.solver.dt = 0.05;
  s.sample_counts = {60};
  s.samples = 60;
  s.grids = {{5, 2}};
  s.grid = {5, 2};
  s.architectures = {{12}, {6, 6}};
  s.hidden = {12};
  s.seeds = {1, 2};
  s.test_size = 20;
  s.train.max_epochs = 15;
  return s;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fsical_test_study_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// numeric rows of a .dat file, skipping comments
std::vector<std::vector<double>> read_table(const std::filesystem::path& p, std::string& header) {
  std::ifstream in(p);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      header += line + "\n";
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    EXPECT_TRUE(ss.eof()) << "non-numeric entry in: " << line;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(StudySpec, Defaults) {
  const StudySpec s;
  EXPECT_EQ(s.sample_counts, (std::vector<std::size_t>{250, 500, 1000, 2000}));
  ASSERT_EQ(s.grids.size(), 4u);
  EXPECT_EQ(s.grids.front().label(), "5x2");
  EXPECT_EQ(s.grids.back().label(), "10x5");
  EXPECT_EQ(s.architectures.size(), 6u);
  EXPECT_EQ(s.test_size, 200u);
  EXPECT_EQ(s.seeds.size(), 3u);
  EXPECT_EQ(s.hidden, std::vector<int>{100});
  EXPECT_NO_THROW(s.validate());
}

TEST(StudySpec, Validation) {
  StudySpec s;
  s.seeds = {1, 1};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.seeds = {};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = StudySpec{};
  s.sample_counts.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = StudySpec{};
  s.kind = StudyKind::Probes;
  s.grids.clear();
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Corpora, IndependentStreams) {
  const StudySpec s = small_spec(StudyKind::Samples);
  const auto a = training_corpus(s.grid, 10, 1, s);
  const auto b = training_corpus(s.grid, 20, 1, s);
  const auto c = training_corpus(s.grid, 10, 2, s);
  const auto t = test_corpus(s.grid, 1, s);
  EXPECT_EQ(a.size(), 10u);
  EXPECT_EQ(t.size(), 20u);
  EXPECT_NE(a.records[0].params, b.records[0].params);
  EXPECT_NE(a.records[0].params, c.records[0].params);
  EXPECT_NE(a.records[0].params, t.records[0].params);
  EXPECT_NE(fingerprint(a.meta), fingerprint(t.meta));
  EXPECT_EQ(training_corpus(s.grid, 10, 1, s).records[3].observations, a.records[3].observations);
}

TEST(EvaluateModel, ErrorsAndLoss) {
  const StudySpec s = small_spec(StudyKind::Samples);
  const auto train = training_corpus(s.grid, 40, 1, s);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  const auto model = fit_inverter(train, {8}, cfg).model;
  const auto m = evaluate_model(model, train);
  double manual = 0.0;
  for (const auto& rec : train.records)
    manual += recovery_report(predict(model, rec.observations), rec.params).relative_percent[1] / 40.0;
  EXPECT_NEAR(m.mean_relative_percent[1], manual, 1e-12);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(m.mean_absolute[i], 0.0);
    EXPECT_GE(m.mean_relative_percent[i], 0.0);
  }
  EXPECT_GT(m.test_loss, 0.0);
  EXPECT_THROW(evaluate_model(model, Dataset{}), std::invalid_argument);
}

TEST(StudySamples, SingleValueSweepWritesValidFiles) {
  const auto dir = scratch_dir("samples");
  const auto r = study_samples(small_spec(StudyKind::Samples));
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].label, "M=60");
  EXPECT_EQ(r.cells[0].repetitions.size(), 2u);
  write_study(r, dir);

  std::string header;
  const auto rows = read_table(dir / "samples.dat", header);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].size(), 10u);
  EXPECT_EQ(rows[0][0], 60.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(rows[0][1 + i], r.cells[0].mean_relative_percent[i], 1e-8);
  EXPECT_NE(header.find("# M rel_c1 rel_rho_s rel_mu_f"), std::string::npos) << header;
  EXPECT_NE(header.find("# seeds 1 2"), std::string::npos);

  std::ifstream in(dir / "samples.json");
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("study"), "samples");
  EXPECT_EQ(j.at("spec").at("seeds"), Json::array({1, 2}));
  const auto& reps = j.at("cells").at(0).at("repetitions");
  ASSERT_EQ(reps.size(), 2u);
  EXPECT_EQ(reps.at(0).at("train_fingerprint"), r.cells[0].repetitions[0].train_fingerprint);
  EXPECT_EQ(reps.at(0).at("train_fingerprint").get<std::string>().size(), 16u);
  EXPECT_FALSE(std::filesystem::exists(dir / "failures.json"));
}

TEST(StudySamples, FingerprintTracesToRegenerableCorpus) {
  const StudySpec s = small_spec(StudyKind::Samples);
  const auto r = study_samples(s);
  const auto corpus = training_corpus(s.grid, 60, s.seeds[1], s);
  EXPECT_EQ(r.cells[0].repetitions[1].train_fingerprint, fingerprint(corpus.meta));
  EXPECT_EQ(r.cells[0].repetitions[1].test_fingerprint, fingerprint(test_corpus(s.grid, s.seeds[1], s).meta));
}

TEST(StudyProbes, OneRowPerGrid) {
  auto s = small_spec(StudyKind::Probes);
  s.grids = {{5, 2}, {2, 2}};
  s.seeds = {4};
  const auto r = study_probes(s);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_EQ(r.cells[0].label, "5x2");
  EXPECT_EQ(r.cells[0].value, 10.0);
  EXPECT_EQ(r.cells[1].value, 4.0);
}

TEST(StudyArchitecture, RerunIsIdentical) {
  const auto dir = scratch_dir("arch");
  const auto s = small_spec(StudyKind::Architecture);
  const auto a = study_architecture(s);
  const auto b = study_architecture(s);
  ASSERT_EQ(a.cells.size(), 2u);
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    EXPECT_EQ(a.cells[c].mean_relative_percent, b.cells[c].mean_relative_percent);
    EXPECT_EQ(a.cells[c].mean_best_validation_loss, b.cells[c].mean_best_validation_loss);
    EXPECT_LE(a.cells[c].mean_epochs, s.train.max_epochs);
  }
  EXPECT_EQ(a.cells[1].label, "6,6");
  write_study(a, dir / "a");
  write_study(b, dir / "b");
  auto slurp = [](const std::filesystem::path& p) {
    std::ostringstream os;
    os << std::ifstream(p).rdbuf();
    return os.str();
  };
  EXPECT_EQ(slurp(dir / "a" / "arch.dat"), slurp(dir / "b" / "arch.dat"));
  EXPECT_EQ(slurp(dir / "a" / "arch.json"), slurp(dir / "b" / "arch.json"));
}

TEST(StudyFailures, FailedCellIsRecordedAndManifestWritten) {
  const auto dir = scratch_dir("failures");
  auto s = small_spec(StudyKind::Samples);
  s.sample_counts = {0, 60};
  s.seeds = {1};
  const auto r = study_samples(s);
  EXPECT_FALSE(r.ok());
  ASSERT_EQ(r.cells.size(), 2u);
  EXPECT_TRUE(r.cells[0].failure.has_value());
  EXPECT_FALSE(r.cells[1].failure.has_value());
  ASSERT_EQ(r.failures().size(), 1u);
  EXPECT_EQ(r.failures()[0].rfind("M=0", 0), 0u);

  write_study(r, dir);
  ASSERT_TRUE(std::filesystem::exists(dir / "failures.json"));
  std::ifstream in(dir / "failures.json");
  const Json j = Json::parse(in);
  EXPECT_EQ(j.at("failures").size(), 1u);
  std::string header;
  EXPECT_EQ(read_table(dir / "samples.dat", header).size(), 1u);
  EXPECT_NE(format_table(r).find("FAILED"), std::string::npos);
}

TEST(CmaesBaseline, DnnInferenceFarCheaperThanSearch) {
  const auto dir = scratch_dir("baseline");
  auto s = small_spec(StudyKind::CmaesBaseline);
  s.grids = {{5, 2}};
  s.truths = {{1.0, 1.075, 1.0, 1.0}, reference_truths()[2]};
  s.train.max_epochs = 40;
  s.cmaes.ftol = 1e-14;
  const auto r = cmaes_baseline(s);
  ASSERT_TRUE(r.ok()) << r.failures().front();
  ASSERT_EQ(r.baseline.size(), 2u);
  for (const auto& row : r.baseline) {
    EXPECT_EQ(row.grid, "5x2");
    EXPECT_GT(row.cmaes_evaluations, 20);
    EXPECT_LT(row.dnn_seconds * 100.0, row.cmaes_seconds);
    for (double e : row.cmaes_errors.relative_percent) EXPECT_LT(e, 1.0);
    for (double e : row.dnn_errors.relative_percent) EXPECT_LT(e, 50.0);
  }
  write_study(r, dir);
  std::string header;
  const auto rows = read_table(dir / "baseline.dat", header);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].size(), 11u);
  EXPECT_EQ(rows[0][0], 10.0);
  EXPECT_NE(format_table(r).find("CMA-ES"), std::string::npos);
}

TEST(RunStudy, DispatchesOnKind) {
  auto s = small_spec(StudyKind::Probes);
  s.seeds = {9};
  EXPECT_EQ(run_study(s).kind, StudyKind::Probes);
  EXPECT_EQ(to_string(StudyKind::Architecture), "arch");
  EXPECT_EQ(to_string(StudyKind::CmaesBaseline), "baseline");
}
