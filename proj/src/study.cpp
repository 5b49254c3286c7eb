#include "fsical/study.hpp"

#include "fsical/json.hpp"
#include "fsical/rng.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fsical {

namespace {

constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kTestStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kCmaesStream = 3;

const char* const kParamNames[3] = {"c1", "rho_s", "mu_f"};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hidden_label(const std::vector<int>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
  return s;
}

void summarize(StudyCell& cell) {
  const double n = static_cast<double>(cell.repetitions.size());
  if (n == 0) return;
  for (const auto& rep : cell.repetitions) {
    for (int i = 0; i < 3; ++i) {
      cell.mean_absolute[i] += rep.metrics.mean_absolute[i] / n;
      cell.mean_relative_percent[i] += rep.metrics.mean_relative_percent[i] / n;
    }
    cell.mean_epochs += rep.report.epochs_run / n;
    cell.mean_best_validation_loss += rep.report.best_validation_loss / n;
    cell.mean_final_train_loss += rep.report.final_train_loss / n;
    cell.mean_test_loss += rep.metrics.test_loss / n;
  }
}

// Runs every repetition of a cell; a failure is recorded, not propagated.
template <typename Body>
StudyCell run_cell(std::string label, double value, const StudySpec& spec, Body&& body) {
  StudyCell cell;
  cell.label = std::move(label);
  cell.value = value;
  try {
    for (std::uint64_t seed : spec.seeds) cell.repetitions.push_back(body(seed));
    summarize(cell);
  } catch (const std::exception& e) {
    cell.failure = e.what();
  }
  return cell;
}

}  // namespace

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::Samples: return "samples";
    case StudyKind::Probes: return "probes";
    case StudyKind::Architecture: return "arch";
    case StudyKind::CmaesBaseline: return "baseline";
  }
  return "unknown";
}

void StudySpec::validate() const {
  if (seeds.empty()) throw std::invalid_argument("StudySpec: at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw std::invalid_argument("StudySpec: seeds must be distinct");
  if (test_size < 1) throw std::invalid_argument("StudySpec: test_size must be >= 1");
  switch (kind) {
    case StudyKind::Samples:
      if (sample_counts.empty()) throw std::invalid_argument("StudySpec: empty sample-count list");
      break;
    case StudyKind::Probes:
      if (grids.empty()) throw std::invalid_argument("StudySpec: empty grid list");
      break;
    case StudyKind::Architecture:
      if (architectures.empty()) throw std::invalid_argument("StudySpec: empty architecture list");
      break;
    case StudyKind::CmaesBaseline:
      if (grids.empty()) throw std::invalid_argument("StudySpec: empty grid list");
      break;
  }
  ranges.validate();
  solver.validate();
  train.validate();
}

std::vector<PhysicalParams> reference_truths() {
  return {{1.42379, 1.04122, 1.15782},
          {0.620108, 0.905501, 1.42252},
          {0.611026, 1.10804, 1.46802},
          {0.751256, 1.14957, 0.505141},
          {0.705757, 1.13354, 1.37266}};
}

bool StudyResult::ok() const { return failures().empty(); }

std::vector<std::string> StudyResult::failures() const {
  std::vector<std::string> out;
  for (const auto& c : cells)
    if (c.failure) out.push_back(c.label + ": " + *c.failure);
  return out;
}

Dataset training_corpus(const GridSize& grid, std::size_t samples, std::uint64_t seed,
                        const StudySpec& spec) {
  const auto data_seed = derive_seed(derive_seed(seed, kTrainStream), samples);
  return make_dataset(spec.ranges, data_seed, samples, ProbeGrid::uniform(grid.n_r, grid.n_t, spec.solver),
                      spec.solver, spec.threads);
}

Dataset test_corpus(const GridSize& grid, std::uint64_t seed, const StudySpec& spec) {
  return make_dataset(spec.ranges, derive_seed(seed, kTestStream), spec.test_size,
                      ProbeGrid::uniform(grid.n_r, grid.n_t, spec.solver), spec.solver, spec.threads);
}

TestMetrics evaluate_model(const InverterModel& model, const Dataset& test) {
  if (test.empty()) throw std::invalid_argument("evaluate_model: empty test set");
  TestMetrics m;
  const double n = static_cast<double>(test.size());
  double loss = 0.0;
  for (const auto& rec : test.records) {
    const PhysicalParams p = predict(model, rec.observations);
    const RecoveryReport r = recovery_report(p, rec.params);
    for (int i = 0; i < 3; ++i) {
      m.mean_absolute[i] += r.absolute[i] / n;
      m.mean_relative_percent[i] += r.relative_percent[i] / n;
    }
    const auto truth = rec.params.unknowns();
    const auto est = p.unknowns();
    const Vector yt = model.stats.labels.apply(Vector{{truth[0], truth[1], truth[2]}});
    const Vector ye = model.stats.labels.apply(Vector{{est[0], est[1], est[2]}});
    loss += (ye - yt).squaredNorm() / 3.0;
  }
  m.test_loss = loss / n;
  return m;
}

RepetitionResult run_repetition(const Dataset& train, const Dataset& test, const std::vector<int>& hidden,
                                std::uint64_t seed, const StudySpec& spec) {
  TrainConfig tc = spec.train;
  tc.seed = derive_seed(seed, kFitStream);
  auto fit = fit_inverter(train, hidden, tc);
  return {seed, evaluate_model(fit.model, test), std::move(fit.report), fingerprint(train.meta),
          fingerprint(test.meta)};
}

StudyResult study_samples(const StudySpec& in) {
  StudySpec spec = in;
  spec.kind = StudyKind::Samples;
  spec.validate();
  StudyResult result{spec.kind, spec, {}, {}};
  std::vector<Dataset> tests;
  for (std::uint64_t seed : spec.seeds) tests.push_back(test_corpus(spec.grid, seed, spec));
  for (std::size_t m : spec.sample_counts) {
    std::size_t rep = 0;
    result.cells.push_back(run_cell("M=" + std::to_string(m), static_cast<double>(m), spec,
                                    [&](std::uint64_t seed) {
                                      const Dataset train = training_corpus(spec.grid, m, seed, spec);
                                      return run_repetition(train, tests[rep++], spec.hidden, seed, spec);
                                    }));
  }
  return result;
}

StudyResult study_probes(const StudySpec& in) {
  StudySpec spec = in;
  spec.kind = StudyKind::Probes;
  spec.validate();
  StudyResult result{spec.kind, spec, {}, {}};
  for (const GridSize& g : spec.grids) {
    result.cells.push_back(run_cell(g.label(), static_cast<double>(g.n_r * g.n_t), spec, [&](std::uint64_t seed) {
      const Dataset train = training_corpus(g, spec.samples, seed, spec);
      const Dataset test = test_corpus(g, seed, spec);
      return run_repetition(train, test, spec.hidden, seed, spec);
    }));
  }
  return result;
}

StudyResult study_architecture(const StudySpec& in) {
  StudySpec spec = in;
  spec.kind = StudyKind::Architecture;
  spec.validate();
  StudyResult result{spec.kind, spec, {}, {}};
  std::vector<Dataset> trains, tests;
  for (std::uint64_t seed : spec.seeds) {
    trains.push_back(training_corpus(spec.grid, spec.samples, seed, spec));
    tests.push_back(test_corpus(spec.grid, seed, spec));
  }
  for (std::size_t a = 0; a < spec.architectures.size(); ++a) {
    std::size_t rep = 0;
    const auto& hidden = spec.architectures[a];
    result.cells.push_back(run_cell(hidden_label(hidden), static_cast<double>(a), spec, [&](std::uint64_t seed) {
      const std::size_t r = rep++;
      return run_repetition(trains[r], tests[r], hidden, seed, spec);
    }));
  }
  return result;
}

StudyResult cmaes_baseline(const StudySpec& in) {
  StudySpec spec = in;
  spec.kind = StudyKind::CmaesBaseline;
  if (spec.truths.empty()) spec.truths = reference_truths();
  spec.validate();
  StudyResult result{spec.kind, spec, {}, {}};
  const std::uint64_t seed = spec.seeds.front();
  for (const GridSize& g : spec.grids) {
    StudyCell cell;
    cell.label = g.label();
    cell.value = g.n_r * g.n_t;
    try {
      const Dataset train = training_corpus(g, spec.samples, seed, spec);
      TrainConfig tc = spec.train;
      tc.seed = derive_seed(seed, kFitStream);
      const auto fit = fit_inverter(train, spec.hidden, tc);
      const ProbeGrid grid = ProbeGrid::uniform(g.n_r, g.n_t, spec.solver);
      for (std::size_t k = 0; k < spec.truths.size(); ++k) {
        const PhysicalParams& truth = spec.truths[k];
        const MisfitProblem problem = MisfitProblem::synthetic(truth, grid, spec.solver, spec.ranges);
        BaselineRow row;
        row.grid = g.label();
        row.truth = truth;

        CmaesInversionConfig cc = spec.cmaes;
        cc.seed = derive_seed(derive_seed(seed, kCmaesStream), k);
        cc.threads = spec.threads;
        auto t0 = Clock::now();
        const auto inv = cmaes_invert(problem, cc);
        row.cmaes_seconds = seconds_since(t0);
        row.cmaes_estimate = inv.best;
        row.cmaes_errors = recovery_report(inv.best, truth);
        row.cmaes_evaluations = inv.evaluations;
        row.cmaes_loss = inv.best_loss;

        t0 = Clock::now();
        row.dnn_estimate = predict(fit.model, problem.targets);
        row.dnn_seconds = seconds_since(t0);
        row.dnn_errors = recovery_report(row.dnn_estimate, truth);
        row.dnn_train_fingerprint = fit.model.dataset_fingerprint;
        result.baseline.push_back(row);
      }
    } catch (const std::exception& e) {
      cell.failure = e.what();
    }
    result.cells.push_back(std::move(cell));
  }
  return result;
}

StudyResult run_study(const StudySpec& spec) {
  switch (spec.kind) {
    case StudyKind::Samples: return study_samples(spec);
    case StudyKind::Probes: return study_probes(spec);
    case StudyKind::Architecture: return study_architecture(spec);
    case StudyKind::CmaesBaseline: return cmaes_baseline(spec);
  }
  throw std::invalid_argument("run_study: unknown study kind");
}

namespace {

Json triple(const std::array<double, 3>& a) { return Json::array({a[0], a[1], a[2]}); }

Json spec_json(const StudySpec& s) {
  Json grids = Json::array();
  for (const auto& g : s.grids) grids.push_back(g.label());
  Json truths = Json::array();
  for (const auto& t : s.truths) truths.push_back(t);
  return Json{{"kind", to_string(s.kind)},
              {"sample_counts", s.sample_counts},
              {"grids", grids},
              {"architectures", s.architectures},
              {"truths", truths},
              {"samples", s.samples},
              {"grid", s.grid.label()},
              {"hidden", s.hidden},
              {"seeds", s.seeds},
              {"test_size", s.test_size},
              {"ranges", s.ranges},
              {"solver", s.solver},
              {"train",
               {{"learning_rate", s.train.learning_rate},
                {"batch_size", s.train.batch_size},
                {"max_epochs", s.train.max_epochs},
                {"patience", s.train.patience},
                {"min_delta", s.train.min_delta},
                {"validation_fraction", s.train.validation_fraction}}},
              {"relative_error_metric", "mean over test samples of |p_hat - p| / p, percent"}};
}

Json result_json(const StudyResult& r) {
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json reps = Json::array();
    for (const auto& rep : c.repetitions)
      reps.push_back({{"seed", rep.seed},
                      {"mean_absolute", triple(rep.metrics.mean_absolute)},
                      {"mean_relative_percent", triple(rep.metrics.mean_relative_percent)},
                      {"test_loss", rep.metrics.test_loss},
                      {"epochs", rep.report.epochs_run},
                      {"best_epoch", rep.report.best_epoch},
                      {"best_validation_loss", rep.report.best_validation_loss},
                      {"final_train_loss", rep.report.final_train_loss},
                      {"train_fingerprint", rep.train_fingerprint},
                      {"test_fingerprint", rep.test_fingerprint}});
    Json cj{{"label", c.label},
            {"value", c.value},
            {"mean_absolute", triple(c.mean_absolute)},
            {"mean_relative_percent", triple(c.mean_relative_percent)},
            {"mean_epochs", c.mean_epochs},
            {"mean_best_validation_loss", c.mean_best_validation_loss},
            {"mean_final_train_loss", c.mean_final_train_loss},
            {"mean_test_loss", c.mean_test_loss},
            {"repetitions", reps}};
    if (c.failure) cj["failure"] = *c.failure;
    cells.push_back(cj);
  }
  Json rows = Json::array();
  for (const auto& b : r.baseline)
    rows.push_back({{"grid", b.grid},
                    {"truth", b.truth},
                    {"cmaes_estimate", b.cmaes_estimate},
                    {"cmaes_relative_percent", triple(b.cmaes_errors.relative_percent)},
                    {"cmaes_evaluations", b.cmaes_evaluations},
                    {"cmaes_loss", b.cmaes_loss},
                    {"cmaes_seconds", b.cmaes_seconds},
                    {"dnn_estimate", b.dnn_estimate},
                    {"dnn_relative_percent", triple(b.dnn_errors.relative_percent)},
                    {"dnn_seconds", b.dnn_seconds},
                    {"dnn_train_fingerprint", b.dnn_train_fingerprint}});
  Json j{{"study", to_string(r.kind)}, {"spec", spec_json(r.spec)}, {"cells", cells}};
  if (!rows.empty()) j["baseline"] = rows;
  return j;
}

}  // namespace

void write_study(const StudyResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = to_string(result.kind);
  {
    std::ofstream out(out_dir / (stem + ".json"));
    if (!out) throw std::runtime_error("write_study: cannot write to " + out_dir.string());
    out << result_json(result).dump(2) << '\n';
  }

  std::ofstream dat(out_dir / (stem + ".dat"));
  dat << std::setprecision(10);
  dat << "# study " << stem << "\n# seeds";
  for (auto s : result.spec.seeds) dat << ' ' << s;
  dat << "\n# relative errors in percent: mean over test samples of |p_hat - p| / p\n";
  if (result.kind == StudyKind::CmaesBaseline) {
    dat << "# K row cmaes_c1 cmaes_rho_s cmaes_mu_f cmaes_evals cmaes_seconds dnn_c1 dnn_rho_s dnn_mu_f "
           "dnn_seconds\n";
    int row = 0;
    for (const auto& b : result.baseline) {
      const auto at = b.grid.find('x');
      const int k = std::stoi(b.grid.substr(0, at)) * std::stoi(b.grid.substr(at + 1));
      dat << k << ' ' << row++;
      for (double e : b.cmaes_errors.relative_percent) dat << ' ' << e;
      dat << ' ' << b.cmaes_evaluations << ' ' << b.cmaes_seconds;
      for (double e : b.dnn_errors.relative_percent) dat << ' ' << e;
      dat << ' ' << b.dnn_seconds << '\n';
    }
  } else {
    const char* x = result.kind == StudyKind::Samples ? "M" : result.kind == StudyKind::Probes ? "K" : "arch_index";
    dat << "# " << x << " rel_c1 rel_rho_s rel_mu_f abs_c1 abs_rho_s abs_mu_f epochs best_val_loss test_loss\n";
    for (const auto& c : result.cells) {
      if (c.failure) continue;
      dat << c.value;
      for (double e : c.mean_relative_percent) dat << ' ' << e;
      for (double e : c.mean_absolute) dat << ' ' << e;
      dat << ' ' << c.mean_epochs << ' ' << c.mean_best_validation_loss << ' ' << c.mean_test_loss << '\n';
    }
  }

  const auto failures = result.failures();
  const auto manifest = out_dir / "failures.json";
  if (!failures.empty()) {
    std::ofstream out(manifest);
    out << Json{{"study", stem}, {"failures", failures}}.dump(2) << '\n';
  } else if (std::filesystem::exists(manifest)) {
    std::filesystem::remove(manifest);
  }
}

std::string format_table(const StudyResult& result) {
  std::ostringstream os;
  os << std::fixed;
  if (result.kind == StudyKind::CmaesBaseline) {
    os << std::left << std::setw(6) << "grid" << std::setw(34) << "truth (c1, rho_s, mu_f)"
       << std::setw(28) << "CMA-ES rel err %" << std::setw(7) << "evals" << std::setw(10) << "time s"
       << std::setw(28) << "DNN rel err %" << "time s\n";
    for (const auto& b : result.baseline) {
      std::ostringstream t, c, d;
      t << std::setprecision(6) << "(" << b.truth.c1 << ", " << b.truth.rho_s << ", " << b.truth.mu_f << ")";
      c << std::fixed << std::setprecision(3) << b.cmaes_errors.relative_percent[0] << " "
        << b.cmaes_errors.relative_percent[1] << " " << b.cmaes_errors.relative_percent[2];
      d << std::fixed << std::setprecision(3) << b.dnn_errors.relative_percent[0] << " "
        << b.dnn_errors.relative_percent[1] << " " << b.dnn_errors.relative_percent[2];
      os << std::setw(6) << b.grid << std::setw(34) << t.str() << std::setw(28) << c.str() << std::setw(7)
         << b.cmaes_evaluations << std::setw(10) << std::setprecision(3) << b.cmaes_seconds << std::setw(28)
         << d.str() << std::scientific << std::setprecision(2) << b.dnn_seconds << std::fixed << '\n';
    }
  } else {
    os << std::left << std::setw(14) << "cell";
    for (const char* n : kParamNames) os << std::setw(12) << (std::string("abs ") + n);
    for (const char* n : kParamNames) os << std::setw(12) << (std::string("rel% ") + n);
    os << std::setw(9) << "epochs" << std::setw(12) << "val loss" << "test loss\n";
    for (const auto& c : result.cells) {
      os << std::setw(14) << c.label;
      if (c.failure) {
        os << "FAILED: " << *c.failure << '\n';
        continue;
      }
      os << std::setprecision(5);
      for (double e : c.mean_absolute) os << std::setw(12) << e;
      os << std::setprecision(3);
      for (double e : c.mean_relative_percent) os << std::setw(12) << e;
      os << std::setprecision(1) << std::setw(9) << c.mean_epochs << std::scientific << std::setprecision(3)
         << std::setw(12) << c.mean_best_validation_loss << c.mean_test_loss << std::fixed << '\n';
    }
  }
  return os.str();
}

}  // namespace fsical
