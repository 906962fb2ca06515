// Experiment runner for Newton-type methods on generalized equations.
//
//   genewton solve --problem scalar-eq --algorithm newton
//   genewton sweep --problem scalar-eq --algorithm alm --rho-grid 2,5,10
//   genewton probe --problem affine-probe --samples 100
//   genewton list-problems
//
// Exit codes: 0 success, 1 solver failure, 2 configuration error.

#include "genewton/experiment.hpp"
#include "genewton/isslab.hpp"
#include "genewton/problems.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

namespace {

using namespace genewton;

struct CommonFlags {
  std::string config_path;
  std::string problem, algorithm, disturbance, channel, inner, out, label;
  std::optional<double> tol, rho, alpha, alm_tol;
  std::optional<int> max_iter, workers;
  bool oracle = false;
  std::string rho_grid, delta_grid, seeds;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "key = value config file");
  cmd->add_option("--problem", f.problem, "registry name or 'inline'");
  cmd->add_option("--algorithm", f.algorithm,
                  "newton | quasi-newton | sqp | sqp-bfgs | sqp-dfp | "
                  "seq-convex | pgd | alm | multistep");
  cmd->add_option("--disturbance", f.disturbance,
                  "zero | constant:C | decaying:C:RATE | random:D[:seed=N]");
  cmd->add_option("--channel", f.channel, "f | g | grad_h | gradient");
  cmd->add_option("--tol", f.tol, "stopping tolerance on the residual");
  cmd->add_option("--max-iter", f.max_iter, "iteration budget");
  cmd->add_option("--rho", f.rho, "ALM penalty");
  cmd->add_option("--alpha", f.alpha, "projected-gradient stepsize");
  cmd->add_option("--alm-tol", f.alm_tol, "ALM stopping tolerance");
  cmd->add_option("--inner", f.inner, "exact | steps:N | noise:SIGMA");
  cmd->add_flag("--oracle", f.oracle, "cross-check steps by enumeration");
  cmd->add_option("--out", f.out,
                  "output directory (default $GENEWTON_OUT, else no files)");
  cmd->add_option("--label", f.label, "output file prefix");
  cmd->add_option("--rho-grid", f.rho_grid, "sweep axis, comma separated");
  cmd->add_option("--delta-grid", f.delta_grid, "sweep axis, comma separated");
  cmd->add_option("--seeds", f.seeds, "sweep axis, comma separated");
  cmd->add_option("--workers", f.workers, "parallel sweep workers");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) cfg = parse_config_file(f.config_path);
  if (!f.problem.empty()) apply_config_line(cfg, "problem", f.problem);
  if (!f.algorithm.empty()) apply_config_line(cfg, "algorithm", f.algorithm);
  if (!f.disturbance.empty()) apply_config_line(cfg, "disturbance", f.disturbance);
  if (!f.channel.empty()) apply_config_line(cfg, "channel", f.channel);
  if (f.tol) cfg.tol = *f.tol;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
  if (f.rho) cfg.rho = *f.rho;
  if (f.alpha) cfg.pgd_alpha = *f.alpha;
  if (f.alm_tol) cfg.alm_tol = *f.alm_tol;
  if (!f.inner.empty()) apply_config_line(cfg, "inner", f.inner);
  if (f.oracle) cfg.enable_oracle = true;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.label.empty()) cfg.label = f.label;
  if (!f.rho_grid.empty()) apply_config_line(cfg, "rho_grid", f.rho_grid);
  if (!f.delta_grid.empty()) apply_config_line(cfg, "delta_grid", f.delta_grid);
  if (!f.seeds.empty()) apply_config_line(cfg, "seeds", f.seeds);
  if (f.workers) cfg.workers = *f.workers;

  if (cfg.out_dir.empty()) {
    if (const char* env = std::getenv("GENEWTON_OUT")) cfg.out_dir = env;
  }
  return cfg;
}

int cmd_solve(const CommonFlags& flags) {
  const ExperimentConfig cfg = build_config(flags);
  const RunResult res = run_experiment(cfg);
  if (!cfg.out_dir.empty()) {
    const std::string csv = write_run_outputs(res, cfg, cfg.out_dir);
    std::printf("wrote %s\n", csv.c_str());
  }
  std::printf("%s\n", res.summary_json.c_str());
  return res.solver_failed ? 1 : 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const ExperimentConfig cfg = build_config(flags);
  const SweepResult sweep = run_sweep(cfg);
  if (!cfg.out_dir.empty()) {
    const std::string path = write_sweep_csv(sweep, cfg, cfg.out_dir);
    std::printf("wrote %s\n", path.c_str());
  } else {
    std::fputs(sweep.csv.c_str(), stdout);
  }
  for (const auto& row : sweep.rows) {
    if (!row.empty() && row[5].rfind("error", 0) == 0) return 1;
  }
  return 0;
}

int cmd_probe(const CommonFlags& flags, double radius, int samples,
              std::uint64_t seed) {
  const ExperimentConfig cfg = build_config(flags);
  const ParametrizedDefinition* def = find_parametrized(cfg.problem);
  if (!def) {
    std::string names;
    for (const auto& p : parametrized_registry()) names += p.name + " ";
    throw ConfigError("unknown parametrized problem '" + cfg.problem +
                      "'; valid: " + names);
  }
  ProbeOptions opts;
  opts.radius = radius;
  opts.samples = samples;
  opts.seed = seed;
  const SolutionMapProbe probe = probe_solution_map(def->make(), opts);
  const std::string json = probe_to_json(def->name, probe, opts);
  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const fs::path path = fs::path(cfg.out_dir) / (def->name + "_probe.json");
    std::ofstream out(path);
    out << json << "\n";
    std::printf("wrote %s\n", path.string().c_str());
  }
  std::printf("%s\n", json.c_str());
  return probe.bound_ok ? 0 : 1;
}

int cmd_list_problems() {
  std::printf("problems:\n");
  for (const auto& p : problem_registry()) {
    std::printf("  %-18s %s (dim_x=%d, m=%d)\n", p.name.c_str(),
                p.description.c_str(), p.dim_x, p.dim_g);
  }
  std::printf("parametrized (probe):\n");
  for (const auto& p : parametrized_registry()) {
    std::printf("  %-18s %s\n", p.name.c_str(), p.description.c_str());
  }
  std::printf("algorithms:\n  ");
  for (const auto& a : algorithm_names()) std::printf("%s ", a.c_str());
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton-type methods for generalized equations under "
               "disturbances, with empirical ISS estimation"};
  app.require_subcommand(1);

  CommonFlags flags;
  double probe_radius = 1e-2;
  int probe_samples = 100;
  std::uint64_t probe_seed = 0;

  CLI::App* solve = app.add_subcommand("solve", "run one experiment");
  add_common(solve, flags);

  CLI::App* sweep = app.add_subcommand("sweep", "cross product of sweep axes");
  add_common(sweep, flags);

  CLI::App* probe = app.add_subcommand("probe", "solution-map probing");
  add_common(probe, flags);
  probe->add_option("--radius", probe_radius, "parameter sampling radius");
  probe->add_option("--samples", probe_samples, "samples per axis");
  probe->add_option("--seed", probe_seed, "sampling seed");

  CLI::App* list = app.add_subcommand("list-problems", "print the registry");
  (void)list;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (probe->parsed()) return cmd_probe(flags, probe_radius, probe_samples, probe_seed);
    if (list->parsed()) return cmd_list_problems();
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "solver failure: %s\n", err.what());
    return 1;
  }
  return 2;
}
