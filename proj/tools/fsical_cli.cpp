// Command-line front end: forward simulation, corpus generation, CMA-ES and
// neural-network inversion, and the benchmark studies.

#include "fsical/dataset.hpp"
#include "fsical/forward_solver.hpp"
#include "fsical/json.hpp"
#include "fsical/misfit.hpp"
#include "fsical/mlp.hpp"
#include "fsical/study.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fsical;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ',' || c == '\n' || c == '\t' || c == ';') c = ' ';
  std::istringstream is(normalized);
  std::string tok;
  while (is >> tok) {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

Interval parse_interval(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 2) throw std::invalid_argument("interval must be 'lo,hi', got '" + text + "'");
  return {v[0], v[1]};
}

PhysicalParams parse_triple(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 3) throw std::invalid_argument("expected 'c1,rho_s,mu_f', got '" + text + "'");
  return PhysicalParams::from_unknowns({v[0], v[1], v[2]});
}

struct SolverFlags {
  SolverConfig config;
  void add(CLI::App* app) {
    app->add_option("--n-elements", config.n_elements, "Element count on [r0, r1] (even)")->capture_default_str();
    app->add_option("--dt", config.dt, "Time step")->capture_default_str();
    app->add_option("--t-final", config.t_final, "Final time")->capture_default_str();
    app->add_option("--omega-outer", config.omega_outer, "Outer boundary velocity")->capture_default_str();
  }
};

struct RangeFlags {
  std::string c1 = "0.5,1.5", rho_s = "0.9,1.25", mu_f = "0.5,1.5";
  void add(CLI::App* app) {
    app->add_option("--c1-range", c1, "lo,hi")->capture_default_str();
    app->add_option("--rho-s-range", rho_s, "lo,hi")->capture_default_str();
    app->add_option("--mu-f-range", mu_f, "lo,hi")->capture_default_str();
  }
  ParameterRanges get() const { return {parse_interval(c1), parse_interval(rho_s), parse_interval(mu_f)}; }
};

Json params_json(const PhysicalParams& p) { return Json::array({p.c1, p.rho_s, p.mu_f}); }

void print_report(const RecoveryReport& r) {
  std::cout << std::fixed << std::setprecision(6);
  const char* names[3] = {"c1", "rho_s", "mu_f"};
  std::cout << std::left << std::setw(8) << "param" << std::setw(16) << "abs error" << "rel error %\n";
  for (int i = 0; i < 3; ++i)
    std::cout << std::setw(8) << names[i] << std::setw(16) << r.absolute[i] << r.relative_percent[i] << '\n';
}

Json report_json(const TrainReport& r) {
  Json hist = Json::array();
  for (const auto& e : r.history) hist.push_back({e.train_loss, e.validation_loss});
  return Json{{"epochs_run", r.epochs_run},
              {"best_epoch", r.best_epoch},
              {"best_validation_loss", r.best_validation_loss},
              {"best_train_loss", r.best_train_loss},
              {"final_train_loss", r.final_train_loss},
              {"history", hist}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid-structure probe: forward solver and parameter inversion"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run the forward solver and print u(r) at snapshot times");
  PhysicalParams sim_params;
  SolverFlags sim_solver;
  std::string sim_times = "0.25,1.25,2.5,5";
  std::string sim_out;
  sim->add_option("--c1", sim_params.c1)->capture_default_str();
  sim->add_option("--rho-s", sim_params.rho_s)->capture_default_str();
  sim->add_option("--mu-f", sim_params.mu_f)->capture_default_str();
  sim->add_option("--times", sim_times, "Comma-separated snapshot times")->capture_default_str();
  sim->add_option("-o,--out", sim_out, "Output file (default stdout)");
  sim_solver.add(sim);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a training corpus (JSONL + meta sidecar)");
  std::size_t gen_m = 1000;
  std::uint64_t gen_seed = 1;
  int gen_nr = 10, gen_nt = 5;
  unsigned gen_threads = 0;
  std::string gen_out;
  RangeFlags gen_ranges;
  SolverFlags gen_solver;
  gen->add_option("-m,--samples", gen_m, "Sample count M")->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--n-r", gen_nr)->capture_default_str();
  gen->add_option("--n-t", gen_nt)->capture_default_str();
  gen->add_option("--threads", gen_threads, "0 = all cores")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output .jsonl path")->required();
  gen_ranges.add(gen);
  gen_solver.add(gen);

  // cmaes
  auto* cma = app.add_subcommand("cmaes", "Invert observations with CMA-ES");
  std::string cma_truth, cma_targets;
  std::size_t cma_record = 0;
  int cma_nr = 10, cma_nt = 5;
  RangeFlags cma_ranges;
  SolverFlags cma_solver;
  CmaesInversionConfig cma_cfg;
  cma->add_option("--truth", cma_truth, "Synthesize targets at c1,rho_s,mu_f");
  cma->add_option("--targets", cma_targets, "Dataset .jsonl; uses its grid, solver config and one record");
  cma->add_option("--record", cma_record, "Record index in --targets")->capture_default_str();
  cma->add_option("--n-r", cma_nr)->capture_default_str();
  cma->add_option("--n-t", cma_nt)->capture_default_str();
  cma->add_option("--seed", cma_cfg.seed)->capture_default_str();
  cma->add_option("--tol", cma_cfg.ftol, "Generation function-value spread tolerance")->capture_default_str();
  cma->add_option("--max-evals", cma_cfg.max_evaluations)->capture_default_str();
  cma->add_option("--threads", cma_cfg.threads, "0 = all cores")->capture_default_str();
  cma_ranges.add(cma);
  cma_solver.add(cma);

  // train
  auto* trn = app.add_subcommand("train", "Train a neural-network inverter on a corpus");
  std::string trn_data, trn_hidden = "100", trn_out;
  TrainConfig trn_cfg;
  trn->add_option("--data", trn_data, "Dataset .jsonl")->required();
  trn->add_option("--hidden", trn_hidden, "Hidden widths, e.g. 100 or 50,10,50")->capture_default_str();
  trn->add_option("--lr", trn_cfg.learning_rate)->capture_default_str();
  trn->add_option("--batch", trn_cfg.batch_size)->capture_default_str();
  trn->add_option("--max-epochs", trn_cfg.max_epochs)->capture_default_str();
  trn->add_option("--patience", trn_cfg.patience)->capture_default_str();
  trn->add_option("--min-delta", trn_cfg.min_delta)->capture_default_str();
  trn->add_option("--val-fraction", trn_cfg.validation_fraction)->capture_default_str();
  trn->add_option("--seed", trn_cfg.seed)->capture_default_str();
  trn->add_option("-o,--out", trn_out, "Model output path (.json)")->required();

  // infer
  auto* inf = app.add_subcommand("infer", "Predict (c1, rho_s, mu_f) from observations");
  std::string inf_model, inf_obs, inf_obs_file, inf_data;
  inf->add_option("--model", inf_model)->required();
  inf->add_option("--obs", inf_obs, "Comma-separated observation vector");
  inf->add_option("--obs-file", inf_obs_file, "File of whitespace/comma separated observations");
  inf->add_option("--data", inf_data, "Dataset .jsonl: predict every record and report errors");

  // study
  auto* std_cmd = app.add_subcommand("study", "Benchmark studies");
  std_cmd->require_subcommand(1);
  StudySpec spec;
  std::string out_dir = "results";
  std::vector<std::uint64_t> seeds;
  int reps = 0;
  std::string samples_list, arch_list, grid_list;
  int max_epochs = spec.train.max_epochs;
  auto add_common = [&](CLI::App* s) {
    s->add_option("--out-dir", out_dir)->capture_default_str();
    s->add_option("--seeds", seeds, "One seed per repetition");
    s->add_option("--reps", reps, "Repetitions with seeds 1..reps (default 3)");
    s->add_option("--test-size", spec.test_size)->capture_default_str();
    s->add_option("--threads", spec.threads, "0 = all cores")->capture_default_str();
    s->add_option("--max-epochs", max_epochs)->capture_default_str();
    s->add_option("--samples", spec.samples, "Fixed M where not swept")->capture_default_str();
  };
  auto* st_samples = std_cmd->add_subcommand("samples", "Precision versus number of samples");
  auto* st_probes = std_cmd->add_subcommand("probes", "Precision versus probe grid");
  auto* st_arch = std_cmd->add_subcommand("arch", "Network architecture comparison");
  auto* st_base = std_cmd->add_subcommand("baseline", "CMA-ES versus trained network");
  for (auto* s : {st_samples, st_probes, st_arch, st_base}) add_common(s);
  st_samples->add_option("--m-list", samples_list, "Comma-separated sample counts (default 250,500,1000,2000)");
  st_probes->add_option("--grids", grid_list, "e.g. 5x2,10x2,5x5,10x5");
  st_arch->add_option("--archs", arch_list, "Semicolon-separated architectures, e.g. '100;100,100'");
  st_base->add_option("--grids", grid_list, "e.g. 10x5,5x5");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto times = parse_list(sim_times);
      sim_solver.config.t_final = std::max(sim_solver.config.t_final, times.empty() ? 0.0 : *std::max_element(times.begin(), times.end()));
      ForwardSolver solver(sim_params, sim_solver.config);
      const auto snaps = solver.simulate(times);
      std::ofstream file;
      if (!sim_out.empty()) file.open(sim_out);
      std::ostream& os = sim_out.empty() ? std::cout : file;
      os << "# r";
      for (const auto& s : snaps) os << " t=" << s.t;
      os << '\n' << std::setprecision(10);
      for (Eigen::Index i = 0; i < solver.mesh().node_count(); ++i) {
        os << solver.mesh().nodes(i);
        for (const auto& s : snaps) os << ' ' << s.u(i);
        os << '\n';
      }
      return 0;
    }

    if (*gen) {
      const auto grid = ProbeGrid::uniform(gen_nr, gen_nt, gen_solver.config);
      const auto t0 = std::chrono::steady_clock::now();
      const Dataset ds = make_dataset(gen_ranges.get(), gen_seed, gen_m, grid, gen_solver.config, gen_threads);
      write_dataset(gen_out, ds);
      std::cout << Json{{"path", gen_out},
                        {"meta", meta_path(gen_out).string()},
                        {"samples", ds.size()},
                        {"K", grid.size()},
                        {"fingerprint", fingerprint(ds.meta)},
                        {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*cma) {
      MisfitProblem problem;
      std::optional<PhysicalParams> truth;
      if (!cma_targets.empty()) {
        const Dataset ds = read_dataset(cma_targets);
        if (cma_record >= ds.size()) throw std::invalid_argument("--record out of range");
        problem = {ds.records[cma_record].observations, ds.meta.grid, ds.meta.config, cma_ranges.get()};
        truth = ds.records[cma_record].params;
      } else if (!cma_truth.empty()) {
        truth = parse_triple(cma_truth);
        problem = MisfitProblem::synthetic(*truth, ProbeGrid::uniform(cma_nr, cma_nt, cma_solver.config),
                                           cma_solver.config, cma_ranges.get());
      } else {
        throw std::invalid_argument("cmaes: pass --truth or --targets");
      }
      const auto t0 = std::chrono::steady_clock::now();
      const auto inv = cmaes_invert(problem, cma_cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      Json line{{"best", params_json(inv.best)},
                {"best_loss", inv.best_loss},
                {"evaluations", inv.evaluations},
                {"generations", inv.generations},
                {"termination", to_string(inv.reason)},
                {"seconds", secs}};
      RecoveryReport rep;
      if (truth) {
        rep = recovery_report(inv.best, *truth);
        line["truth"] = params_json(*truth);
        line["absolute_error"] = rep.absolute;
        line["relative_error_percent"] = rep.relative_percent;
      }
      std::cout << line.dump() << '\n';
      std::cout << std::setprecision(8) << "best (c1, rho_s, mu_f) = (" << inv.best.c1 << ", " << inv.best.rho_s
                << ", " << inv.best.mu_f << ")  loss = " << inv.best_loss << "  evaluations = " << inv.evaluations
                << "  termination = " << to_string(inv.reason) << '\n';
      if (truth) print_report(rep);
      return 0;
    }

    if (*trn) {
      const Dataset ds = read_dataset(trn_data);
      const auto fit = fit_inverter(ds, MlpArchitecture::parse_hidden(trn_hidden), trn_cfg);
      save_model(trn_out, fit.model);
      Json line = report_json(fit.report);
      line["model"] = trn_out;
      std::cout << line.dump() << '\n';
      return 0;
    }

    if (*inf) {
      const InverterModel model = load_model(inf_model);
      if (!inf_data.empty()) {
        const Dataset ds = read_dataset(inf_data);
        for (const auto& rec : ds.records) {
          const auto p = predict(model, rec.observations);
          std::cout << Json{{"prediction", params_json(p)},
                            {"truth", params_json(rec.params)},
                            {"relative_error_percent", recovery_report(p, rec.params).relative_percent}}
                           .dump()
                    << '\n';
        }
        return 0;
      }
      std::vector<double> obs;
      if (!inf_obs.empty()) {
        obs = parse_list(inf_obs);
      } else if (!inf_obs_file.empty()) {
        std::ifstream in(inf_obs_file);
        if (!in) throw std::runtime_error("cannot open " + inf_obs_file);
        std::stringstream buf;
        buf << in.rdbuf();
        obs = parse_list(buf.str());
      } else {
        throw std::invalid_argument("infer: pass --obs, --obs-file or --data");
      }
      const auto p = predict(model, to_vector(obs));
      std::cout << Json{{"c1", p.c1}, {"rho_s", p.rho_s}, {"mu_f", p.mu_f}}.dump() << '\n';
      return 0;
    }

    if (*std_cmd) {
      if (!seeds.empty()) {
        spec.seeds = seeds;
      } else if (reps > 0) {
        spec.seeds.clear();
        for (int r = 1; r <= reps; ++r) spec.seeds.push_back(static_cast<std::uint64_t>(r));
      }
      spec.train.max_epochs = max_epochs;
      if (*st_samples) {
        spec.kind = StudyKind::Samples;
        if (!samples_list.empty()) {
          spec.sample_counts.clear();
          for (double v : parse_list(samples_list)) spec.sample_counts.push_back(static_cast<std::size_t>(v));
        }
      } else if (*st_probes || *st_base) {
        spec.kind = *st_probes ? StudyKind::Probes : StudyKind::CmaesBaseline;
        if (*st_base) spec.grids = {{10, 5}, {5, 5}};
        if (!grid_list.empty()) {
          spec.grids.clear();
          std::stringstream ss(grid_list);
          std::string item;
          while (std::getline(ss, item, ',')) {
            const auto x = item.find('x');
            if (x == std::string::npos) throw std::invalid_argument("grid must look like 10x5");
            spec.grids.push_back({std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1))});
          }
        }
      } else {
        spec.kind = StudyKind::Architecture;
        if (!arch_list.empty()) {
          spec.architectures.clear();
          std::stringstream ss(arch_list);
          std::string item;
          while (std::getline(ss, item, ';')) spec.architectures.push_back(MlpArchitecture::parse_hidden(item));
        }
      }
      const StudyResult result = run_study(spec);
      write_study(result, out_dir);
      std::cout << format_table(result);
      std::cout << "results written to " << out_dir << '\n';
      if (!result.ok()) {
        for (const auto& f : result.failures()) std::cerr << "failed: " << f << '\n';
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
