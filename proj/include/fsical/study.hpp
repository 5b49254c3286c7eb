#pragma once

#include "fsical/dataset.hpp"
#include "fsical/misfit.hpp"
#include "fsical/mlp.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fsical {

enum class StudyKind { Samples, Probes, Architecture, CmaesBaseline };

std::string to_string(StudyKind kind);

struct GridSize {
  int n_r = 10;
  int n_t = 5;
  std::string label() const { return std::to_string(n_r) + "x" + std::to_string(n_t); }
  bool operator==(const GridSize&) const = default;
};

/// Settings shared by every sweep. Each entry of `seeds` is one repetition.
struct StudySpec {
  StudyKind kind = StudyKind::Samples;
  std::vector<std::size_t> sample_counts{250, 500, 1000, 2000};
  std::vector<GridSize> grids{{5, 2}, {10, 2}, {5, 5}, {10, 5}};
  std::vector<std::vector<int>> architectures{{1000}, {100, 100}, {100}, {50, 50}, {34, 34, 34}, {50, 10, 50}};
  std::vector<PhysicalParams> truths;  // cmaes baseline targets
  std::size_t samples = 1000;          // fixed M for probes/architecture/baseline
  GridSize grid{10, 5};                // fixed grid for samples/architecture
  std::vector<int> hidden{100};        // fixed network for samples/probes/baseline
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t test_size = 200;
  ParameterRanges ranges;
  SolverConfig solver;
  TrainConfig train;
  CmaesInversionConfig cmaes;
  unsigned threads = 0;

  void validate() const;
};

/// The five true triples listed with the paper-style DNN example table.
std::vector<PhysicalParams> reference_truths();

/// Error summary of one trained inverter on its test set.
struct TestMetrics {
  std::array<double, 3> mean_absolute{};
  std::array<double, 3> mean_relative_percent{};
  double test_loss = 0.0;  // normalized-label MSE
};

struct RepetitionResult {
  std::uint64_t seed = 0;
  TestMetrics metrics;
  TrainReport report;
  std::string train_fingerprint;
  std::string test_fingerprint;
};

/// One swept value, averaged over repetitions.
struct StudyCell {
  std::string label;
  double value = 0.0;  // M for the samples sweep, K for probes, index otherwise
  std::vector<RepetitionResult> repetitions;
  std::array<double, 3> mean_absolute{};
  std::array<double, 3> mean_relative_percent{};
  double mean_epochs = 0.0;
  double mean_best_validation_loss = 0.0;
  double mean_final_train_loss = 0.0;
  double mean_test_loss = 0.0;
  std::optional<std::string> failure;
};

struct BaselineRow {
  std::string grid;
  PhysicalParams truth;
  PhysicalParams cmaes_estimate;
  RecoveryReport cmaes_errors;
  long cmaes_evaluations = 0;
  double cmaes_loss = 0.0;
  double cmaes_seconds = 0.0;
  PhysicalParams dnn_estimate;
  RecoveryReport dnn_errors;
  double dnn_seconds = 0.0;
  std::string dnn_train_fingerprint;
};

struct StudyResult {
  StudyKind kind = StudyKind::Samples;
  StudySpec spec;
  std::vector<StudyCell> cells;
  std::vector<BaselineRow> baseline;

  bool ok() const;
  std::vector<std::string> failures() const;
};

/// Training corpus for one repetition; independent streams per (seed, M).
Dataset training_corpus(const GridSize& grid, std::size_t samples, std::uint64_t seed, const StudySpec& spec);
/// Test corpus for one repetition, from a stream disjoint from every training corpus.
Dataset test_corpus(const GridSize& grid, std::uint64_t seed, const StudySpec& spec);

/// Train one inverter and score it on the held-out test set.
RepetitionResult run_repetition(const Dataset& train, const Dataset& test, const std::vector<int>& hidden,
                                std::uint64_t seed, const StudySpec& spec);

/// Evaluate a model on a corpus (denormalized errors, normalized loss).
TestMetrics evaluate_model(const InverterModel& model, const Dataset& test);

StudyResult study_samples(const StudySpec& spec);
StudyResult study_probes(const StudySpec& spec);
StudyResult study_architecture(const StudySpec& spec);
StudyResult cmaes_baseline(const StudySpec& spec);
StudyResult run_study(const StudySpec& spec);

/// Writes <kind>.json, <kind>.dat and, when cells failed, failures.json.
void write_study(const StudyResult& result, const std::filesystem::path& out_dir);

/// Human-readable table.
std::string format_table(const StudyResult& result);

}  // namespace fsical
