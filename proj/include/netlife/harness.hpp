#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netlife/model.hpp"
#include "netlife/online.hpp"
#include "netlife/static_opt.hpp"

namespace netlife {

// Flat `section.key = value` configuration with measured defaults: 24 Mbit/s
// links, 0.4 W radio, 2.1 W processing, 2500 J batteries, 0.5 MB frames at
// 1 frame/s, per-frame processing times of 3 s (node) and 0.1 s (gateway),
// detector scores 33.1 (node) and 57.9 (gateway).
struct ExperimentConfig {
  // network.*
  int n = 20;
  double radius = 0.25;
  std::vector<double> radius_grid;
  double capacity = 24e6;  // bit/s
  int seeds = 50;
  std::uint64_t seed0 = 1;

  // app.*
  double frame_bytes = 500e3;
  double frame_rate = 1.0;  // frames per second per source
  double map_node = 33.1;
  double map_gateway = 57.9;
  double beta = 1e-3;
  double source_probability = 0.5;

  // energy.*
  double battery = 2500.0;  // J
  double p_tx = 0.4, p_rx = 0.4, p_proc = 2.1;  // W
  double t_frame_node = 3.0, t_frame_gateway = 0.1;  // s

  // sweep.*
  double theta = 1e-5;
  std::vector<double> theta_grid;
  double alpha = 1e-3;
  std::vector<double> alpha_grid;
  double delta = 0.25;       // capacity jitter
  double eta_noise = 0.20;   // utility noise
  int max_slots = 20000;
  double compare_reward = 40.0;  // flat score of the comparison experiment

  // out.*
  std::string out_dir = "out";

  double frame_bits() const { return frame_bytes * 8.0; }
  double mean_arrival() const { return frame_rate * frame_bits(); }
  double e_tx() const { return p_tx / capacity; }
  double e_rx() const { return p_rx / capacity; }
  double node_rho() const { return frame_bits() / t_frame_node; }
  double gateway_rho() const { return frame_bits() / t_frame_gateway; }
  double node_epr() const { return p_proc * t_frame_node / frame_bits(); }
  double gateway_epr() const { return p_proc * t_frame_gateway / frame_bits(); }

  StochasticConfig stochastic() const;
  void validate() const;
};

// Parses the config file; unknown keys, non-numeric values, and violated
// invariants raise ConfigError naming the key. An empty file yields the
// defaults above. Numbers accept k/M/G suffixes; grids are comma-separated.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical text form (used for the output manifest hash).
std::string dump_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Random-geometric instance with the config's parameters; sources drawn
// per node with source_probability from a dedicated sub-stream (redrawn, on
// a fresh sub-stream, in the zero-source corner case). `map_override > 0`
// pins every node's score (the comparison experiment's flat reward).
Instance make_instance(const ExperimentConfig& cfg, double radius,
                       std::uint64_t seed, double map_override = -1.0);

struct SweepRow {
  std::string experiment;
  std::uint64_t seed = 0;
  double radius = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  std::string policy = "static";
  std::string status = "optimal";
  double lifetime = 0.0;  // seconds for static rows, slots for episodes
  double weighted_map = 0.0;
  double objective = 0.0;
  std::string series_ref;  // per-slot series file, when one was written
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Sensitivity sweep: (radius x theta x seed) static solves. Cells whose
// topology is disconnected or whose capacity region is empty are recorded
// with the corresponding status and skipped in the averages.
SweepResult run_sensitivity(const ExperimentConfig& cfg);

struct ConvergenceCell {
  std::uint64_t seed = 0;
  double alpha = 0.0;
  int lifetime_slots = 0;
  int max_slots = 0;            // horizon the episode ran under
  double static_lifetime = 0.0; // seconds
  double steady_gap = 0.0;      // median normalized gap, last half
  int transient_slots = 0;      // first sustained entry into the gap band
  double congestion_slope = 0.0;
  TheoremDiagnostics diagnostics;
};

struct ConvergenceResult {
  SweepResult sweep;
  std::vector<ConvergenceCell> cells;
};

// Step-size study: per feasible seed, one static reference and one
// MLIA episode per step size on identical realization streams.
ConvergenceResult run_convergence(const ExperimentConfig& cfg);

struct ComparisonCell {
  std::uint64_t seed = 0;
  int life_mlia = 0, life_min_energy = 0, life_max_flow = 0;
  double processed_mlia = 0.0, processed_min_energy = 0.0,
         processed_max_flow = 0.0;  // mean bits per slot
};

struct ComparisonResult {
  SweepResult sweep;
  std::vector<ComparisonCell> cells;
  double theta_star = 0.0;   // calibrated MLIA weight
  double weight_star = 0.0;  // calibrated min-energy weight
  double median_ratio_min_energy = 0.0;
  double median_ratio_max_flow = 0.0;
};

// Policy comparison experiment with the flat processing reward: calibrates the
// two weighted policies to equal processed volume (bisection, 2% band),
// then runs the three policies on identical realization streams per seed.
ComparisonResult run_comparison(const ExperimentConfig& cfg);

// CSV writers. All output is deterministic for a fixed config.
void write_sweep_csv(const SweepResult& result, const std::string& path);
void write_trace_csv(const EpisodeTrace& trace, const std::string& policy,
                     const std::string& path);
void write_manifest(const ExperimentConfig& cfg, const std::string& path);

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

}  // namespace netlife
