// Command-line front end: one-shot static solves, single episodes, and the
// three experiment sweeps. Exit codes: 0 ok, 1 config error, 2 infeasible
// instance, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "netlife/errors.hpp"
#include "netlife/harness.hpp"
#include "netlife/lp.hpp"
#include "netlife/model.hpp"
#include "netlife/online.hpp"
#include "netlife/static_opt.hpp"

using namespace netlife;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double theta = -1.0;
  double alpha = -1.0;
  double radius = -1.0;
  int nodes = -1;
  int max_slots = -1;
  std::string policy = "mlia";
};

ExperimentConfig resolve_config(const CommonOpts& opt) {
  ExperimentConfig cfg = opt.config_path.empty()
                             ? parse_config_text("")
                             : load_config(opt.config_path);
  if (opt.seed_set) cfg.seed0 = opt.seed;
  if (opt.theta >= 0.0) cfg.theta = opt.theta;
  if (opt.alpha > 0.0) cfg.alpha = opt.alpha;
  if (opt.radius > 0.0) cfg.radius = opt.radius;
  if (opt.nodes > 0) cfg.n = opt.nodes;
  if (opt.max_slots > 0) cfg.max_slots = opt.max_slots;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts* opt) {
  cmd->add_option("--config", opt->config_path, "config file path");
  cmd->add_option("--out", opt->out_dir, "output directory");
  cmd->add_option("--seed", opt->seed, "base seed")
      ->each([opt](const std::string&) { opt->seed_set = true; });
  cmd->add_option("--theta", opt->theta, "tradeoff weight in [0,1]");
  cmd->add_option("--alpha", opt->alpha, "dual step size");
  cmd->add_option("--radius", opt->radius, "connectivity radius");
  cmd->add_option("--nodes", opt->nodes, "node count");
  cmd->add_option("--max-slots", opt->max_slots, "episode horizon");
}

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int run_static(const CommonOpts& opt, const std::string& dump_topology,
               const std::string& dump_lp_path) {
  const ExperimentConfig cfg = resolve_config(opt);
  const Instance instance = make_instance(cfg, cfg.radius, cfg.seed0);
  if (!dump_topology.empty()) {
    std::ofstream out(dump_topology, std::ios::binary);
    out << export_edge_list(instance);
  }
  if (!dump_lp_path.empty()) {
    const auto prog =
        build_static_program(instance, {.theta = cfg.theta, .groups = {}});
    std::ofstream out(dump_lp_path, std::ios::binary);
    out << dump_lp(prog.lp);
  }
  std::printf("seed,radius,theta,lifetime_s,weighted_mAP,objective,status\n");
  try {
    const StaticSolution sol =
        solve_static(instance, {.theta = cfg.theta, .groups = {}});
    std::printf("%llu,%s,%s,%s,%s,%s,optimal\n",
                static_cast<unsigned long long>(cfg.seed0),
                csv_double(cfg.radius).c_str(), csv_double(cfg.theta).c_str(),
                csv_double(sol.lifetime).c_str(),
                csv_double(sol.weighted_map).c_str(),
                csv_double(sol.objective).c_str());
  } catch (const InfeasibleError&) {
    std::printf("%llu,%s,%s,nan,nan,nan,infeasible\n",
                static_cast<unsigned long long>(cfg.seed0),
                csv_double(cfg.radius).c_str(), csv_double(cfg.theta).c_str());
    return 2;
  }
  return 0;
}

int run_simulate(const CommonOpts& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const PolicyKind kind = parse_policy(opt.policy);
  const Instance instance = make_instance(cfg, cfg.radius, cfg.seed0);
  const StaticSolution ref =
      solve_static(instance, {.theta = cfg.theta, .groups = {}});

  EpisodeConfig e;
  e.static_cfg.theta = cfg.theta;
  e.stoch = cfg.stochastic();
  e.alpha = cfg.alpha;
  e.policy = kind;
  e.max_slots = cfg.max_slots;
  e.f_star = ref.objective;
  const EpisodeTrace trace = run_episode(instance, e, cfg.seed0);
  const TheoremDiagnostics diag = theorem_diagnostics(instance, e, trace);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string name = "episode_" + policy_name(kind) + "_s" +
                             std::to_string(cfg.seed0) + ".csv";
    write_trace_csv(trace, policy_name(kind),
                    (std::filesystem::path(cfg.out_dir) / name).string());
  }

  json summary;
  summary["seed"] = cfg.seed0;
  summary["policy"] = policy_name(kind);
  summary["alpha"] = e.alpha;
  summary["theta"] = cfg.theta;
  summary["lifetime_slots"] = trace.lifetime_slots;
  summary["death_node"] = trace.death_node;
  summary["static_lifetime_s"] = ref.lifetime;
  summary["avg_gap"] = diag.avg_gap;
  summary["feas_residual"] = diag.feas_residual;
  summary["telescoping_ok"] = diag.telescoping_exact;
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

int run_sweep_sensitivity(const CommonOpts& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const SweepResult result = run_sensitivity(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_sweep_csv(result,
                  (std::filesystem::path(cfg.out_dir) / "sensitivity.csv").string());
  write_manifest(cfg,
                 (std::filesystem::path(cfg.out_dir) / "manifest.txt").string());
  std::printf("sensitivity: %zu rows -> %s/sensitivity.csv\n",
              result.rows.size(), cfg.out_dir.c_str());
  return 0;
}

int run_sweep_convergence(const CommonOpts& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const ConvergenceResult result = run_convergence(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_sweep_csv(result.sweep,
                  (std::filesystem::path(cfg.out_dir) / "convergence.csv").string());
  {
    std::ofstream out(
        (std::filesystem::path(cfg.out_dir) / "convergence_metrics.csv").string(),
        std::ios::binary);
    out << "seed,alpha,lifetime_slots,horizon,static_lifetime_s,steady_gap,"
           "transient_slots,congestion_slope,avg_gap,eps1_max,eps2,"
           "feas_residual,bound_holds,telescoping_ok\n";
    for (const auto& c : result.cells)
      out << c.seed << ',' << csv_double(c.alpha) << ',' << c.lifetime_slots
          << ',' << c.max_slots << ',' << csv_double(c.static_lifetime) << ','
          << csv_double(c.steady_gap) << ',' << c.transient_slots << ','
          << csv_double(c.congestion_slope) << ','
          << csv_double(c.diagnostics.avg_gap) << ','
          << csv_double(c.diagnostics.eps1_max) << ','
          << csv_double(c.diagnostics.eps2) << ','
          << csv_double(c.diagnostics.feas_residual) << ','
          << (c.diagnostics.gap_bound_holds ? 1 : 0) << ','
          << (c.diagnostics.telescoping_exact ? 1 : 0) << '\n';
  }
  write_manifest(cfg,
                 (std::filesystem::path(cfg.out_dir) / "manifest.txt").string());
  std::printf("convergence: %zu cells -> %s/convergence_metrics.csv\n",
              result.cells.size(), cfg.out_dir.c_str());
  return 0;
}

int run_compare(const CommonOpts& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const ComparisonResult result = run_comparison(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_sweep_csv(result.sweep,
                  (std::filesystem::path(cfg.out_dir) / "compare.csv").string());
  write_manifest(cfg,
                 (std::filesystem::path(cfg.out_dir) / "manifest.txt").string());
  json summary;
  summary["theta_star"] = result.theta_star;
  summary["min_energy_weight"] = result.weight_star;
  summary["median_ratio_vs_min_energy"] = result.median_ratio_min_energy;
  summary["median_ratio_vs_max_flow"] = result.median_ratio_max_flow;
  summary["seeds"] = result.cells.size();
  std::printf("%s\n", summary.dump().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-constrained network lifetime/analytics toolkit"};
  app.require_subcommand(1);

  CommonOpts opt;
  std::string dump_topology, dump_lp_path;

  CLI::App* cmd_static = app.add_subcommand("static", "one static solve");
  add_common(cmd_static, &opt);
  cmd_static->add_option("--dump-topology", dump_topology,
                         "write the edge list to this file");
  cmd_static->add_option("--dump-lp", dump_lp_path,
                         "write the assembled program to this file");

  CLI::App* cmd_sim = app.add_subcommand("simulate", "one online episode");
  add_common(cmd_sim, &opt);
  cmd_sim->add_option("--policy", opt.policy, "mlia|min-energy|max-flow");

  CLI::App* cmd_sens =
      app.add_subcommand("sweep-sensitivity", "radius x theta static sweep");
  add_common(cmd_sens, &opt);
  CLI::App* cmd_conv =
      app.add_subcommand("sweep-convergence", "per-alpha episode sweep");
  add_common(cmd_conv, &opt);
  CLI::App* cmd_cmp =
      app.add_subcommand("compare", "policy comparison at fixed reward");
  add_common(cmd_cmp, &opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_static->parsed()) return run_static(opt, dump_topology, dump_lp_path);
    if (cmd_sim->parsed()) return run_simulate(opt);
    if (cmd_sens->parsed()) return run_sweep_sensitivity(opt);
    if (cmd_conv->parsed()) return run_sweep_convergence(opt);
    if (cmd_cmp->parsed()) return run_compare(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
