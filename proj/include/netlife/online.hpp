#pragma once

#include <cstdint>
#include <vector>

#include "netlife/model.hpp"
#include "netlife/rng.hpp"
#include "netlife/static_opt.hpp"

namespace netlife {

enum class ArrivalModel { Poisson, Deterministic };

// Per-slot randomness. Arrivals are Poisson frame counts by default;
// capacities jitter uniformly around their means; the utility estimate is a
// multiplicative factor per (node, slot).
struct StochasticConfig {
  double frame_bits = 4e6;
  double slot_seconds = 1.0;
  double capacity_jitter = 0.25;  // mu[t] ~ U[(1-d)mu, (1+d)mu]
  double rho_jitter = 0.0;        // processing capacity is constant by default
  double utility_noise = 0.20;    // omega~ = u[t]*omega, u ~ U[1-eta, 1+eta]
  ArrivalModel arrivals = ArrivalModel::Poisson;
  // Rate unit of the dual dynamics: multipliers track flow residuals in
  // units of rate_scale bit/s. The step sizes alpha ~ 1e-2..1e-4 only
  // balance the dual pressure against the power and utility terms when
  // rates are of order one, so experiment configs set this to frame_bits
  // (residuals in frames per slot). 1.0 keeps raw bit/s arithmetic.
  double rate_scale = 1.0;
};

// Lagrange multipliers of the relaxed flow-conservation constraints, one per
// (non-gateway node, app); gateway entries stay zero. Sign-unrestricted.
struct DualState {
  std::vector<double> nu;  // flattened [node * num_apps + app]
  double alpha = 1e-3;
  long t = 1;
};

DualState make_dual_state(const Instance& instance, double alpha);

struct SlotRealization {
  std::vector<double> arrival_bits;    // per (node, app), bits this slot
  std::vector<double> capacity;        // per link, bit/s
  std::vector<double> proc_capacity;   // per node, bit/s
  std::vector<double> utility_factor;  // per node
};

// Draws one slot in a fixed order (arrivals, capacities, processing
// capacities, utility factors) so that all policies sharing a stream see
// identical realizations.
SlotRealization sample_slot(const Instance& instance,
                            const StochasticConfig& cfg, Stream& rng);

enum class PolicyKind { Mlia, MinEnergy, MaxFlow };

struct SlotAction {
  std::vector<double> x;        // per (link, app), bit/s; zero off the set
  std::vector<double> y;        // per (node, app), bit/s
  std::vector<int> active_set;  // candidate link set the action ran on
  double lagrangian = 0.0;      // value of the per-slot program
};

// Precomputed scheduling structure: the enumerated maximal independent sets,
// or the overflow flag that switches the per-slot optimizer to the greedy
// admission fallback.
struct ScheduleContext {
  MisResult mis;
  static ScheduleContext build(const Instance& instance, int cap = 4096);
};

// One step-2 minimization of Algorithm-for-the-slot: for each candidate
// maximal independent set, minimize the noisy Lagrangian over rates capped
// by the realized capacities; returns the (set, x, y) with the smallest
// value, ties to the lowest-index set. kind == MaxFlow drops the power and
// utility terms from the objective.
SlotAction slot_action(const Instance& instance, const StaticConfig& cfg,
                       const StochasticConfig& stoch,
                       const ScheduleContext& sched, const DualState& dual,
                       const SlotRealization& slot,
                       PolicyKind kind = PolicyKind::Mlia);

// nu_i += alpha * (inflow - outflow + (beta-1) y + lambda[t]/T_slot).
void dual_update(const Instance& instance, const StochasticConfig& stoch,
                 const SlotRealization& slot, const SlotAction& action,
                 DualState* dual);

struct EpisodeConfig {
  StaticConfig static_cfg;
  StochasticConfig stoch;
  double alpha = 1e-3;
  PolicyKind policy = PolicyKind::Mlia;
  int max_slots = 20000;
  double f_star = 0.0;            // static optimum, for the gap series
  double min_energy_weight = -1;  // <0: use static_cfg.theta
};

struct EpisodeTrace {
  // Per-slot series.
  std::vector<double> objective;       // f(x[t], y[t]) with the true omega
  std::vector<double> gap_norm;        // (f - f_star)/theta
  std::vector<double> congestion;      // sum of nu after the slot's update
  std::vector<double> min_battery;     // J across non-gateway nodes
  std::vector<int> active_links;       // links carrying positive rate
  std::vector<double> processed_bits;
  std::vector<double> forwarded_bits;
  std::vector<double> reward;          // sum omega(y[t])
  std::vector<double> sigma;           // ||g + lambda[t]||^2

  // Terminal.
  int lifetime_slots = 0;
  int death_node = -1;  // -1 when max_slots was reached
  // With configured groups: slot at which each group lost its first member
  // (-1 when censored; the episode itself ends at the first death anywhere).
  std::vector<int> group_death_slots;
  std::vector<double> final_batteries;
  std::vector<double> final_nu;
  std::vector<double> mean_residual;   // (1/T) sum_t (g + lambda[t])
  double telescoping_max_err = 0.0;    // worst checkpoint error, scaled
  double residual_scale = 1.0;         // max_t ||g + lambda[t]||_inf
};

// Runs one episode: sample realization, compute the policy's action, burn
// batteries, update duals (MLIA and MaxFlow only). The episode ends when a
// node cannot afford its slot (that slot is not executed) or at max_slots.
// The telescoping identity (mean residual vs nu/(alpha T)) is checked every
// 100 slots and its worst error recorded.
EpisodeTrace run_episode(const Instance& instance, const EpisodeConfig& cfg,
                         std::uint64_t seed);

struct TheoremDiagnostics {
  double avg_gap = 0.0;       // (1/T) sum f(x[t],y[t]) - f_star
  double eps1_max = 0.0;      // 0.5 * max_t sigma[t]
  double eps1_mean = 0.0;     // 0.5 * mean_t sigma[t]
  double eps2 = 0.0;          // theta * sum_i eta * omega_i(rho-cap)
  double feas_residual = 0.0; // ||nu[T+1]/(alpha T)||_inf
  double telescoping_max_err = 0.0;
  bool gap_bound_holds = false;   // avg_gap <= alpha*eps1_max + eps2 + 1e-6
  bool telescoping_exact = false; // scaled error <= 1e-9
};

TheoremDiagnostics theorem_diagnostics(const Instance& instance,
                                       const EpisodeConfig& cfg,
                                       const EpisodeTrace& trace);

// Offline plan for the min-energy benchmark: the scalarized LP with total
// power replacing the max-power epigraph.
struct MinEnergyPlan {
  Policy plan;
  double objective = 0.0;
};

MinEnergyPlan build_min_energy_plan(const Instance& instance, double weight);

}  // namespace netlife
