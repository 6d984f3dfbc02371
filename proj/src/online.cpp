#include "netlife/online.hpp"

#include <algorithm>
#include <cmath>

#include "netlife/errors.hpp"
#include "netlife/lp.hpp"

namespace netlife {

namespace {
constexpr std::uint64_t kEpisodePurpose = 0x45504953;
}

DualState make_dual_state(const Instance& instance, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("step size alpha must be positive");
  DualState d;
  d.nu.assign(instance.num_nodes() * instance.num_apps(), 0.0);
  d.alpha = alpha;
  d.t = 1;
  return d;
}

SlotRealization sample_slot(const Instance& instance,
                            const StochasticConfig& cfg, Stream& rng) {
  if (!(cfg.rate_scale > 0.0) || !(cfg.slot_seconds > 0.0) ||
      !(cfg.frame_bits > 0.0))
    throw ConfigError("stochastic config: scales must be positive");
  const int n = instance.num_nodes();
  const int nc = instance.num_apps();
  SlotRealization slot;
  slot.arrival_bits.assign(n * nc, 0.0);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < n; ++i) {
      const double rate = instance.apps()[c].mean_arrival[i];
      if (rate <= 0.0) continue;
      if (cfg.arrivals == ArrivalModel::Deterministic) {
        slot.arrival_bits[i * nc + c] = rate * cfg.slot_seconds;
      } else {
        const double mean_frames = rate * cfg.slot_seconds / cfg.frame_bits;
        slot.arrival_bits[i * nc + c] =
            static_cast<double>(rng.poisson(mean_frames)) * cfg.frame_bits;
      }
    }
  slot.capacity.assign(instance.num_links(), 0.0);
  for (int l = 0; l < instance.num_links(); ++l) {
    const double mu = instance.links()[l].mean_capacity;
    slot.capacity[l] =
        cfg.capacity_jitter > 0.0
            ? mu * rng.uniform(1.0 - cfg.capacity_jitter,
                               1.0 + cfg.capacity_jitter)
            : mu;
  }
  slot.proc_capacity.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double rho = instance.nodes()[i].proc_capacity;
    slot.proc_capacity[i] =
        cfg.rho_jitter > 0.0
            ? rho * rng.uniform(1.0 - cfg.rho_jitter, 1.0 + cfg.rho_jitter)
            : rho;
  }
  slot.utility_factor.assign(n, 1.0);
  if (cfg.utility_noise > 0.0)
    for (int i = 0; i < n; ++i)
      slot.utility_factor[i] =
          rng.uniform(1.0 - cfg.utility_noise, 1.0 + cfg.utility_noise);
  return slot;
}

ScheduleContext ScheduleContext::build(const Instance& instance, int cap) {
  return {maximal_independent_sets(instance.conflict(), cap)};
}

namespace {

std::vector<StaticConfig::Group> effective_groups(const Instance& instance,
                                                  const StaticConfig& cfg) {
  if (!cfg.groups.empty()) return cfg.groups;
  StaticConfig::Group all;
  for (int i = 0; i < instance.num_nodes(); ++i)
    if (i != instance.gateway()) all.members.push_back(i);
  return {all};
}

// Objective coefficient (per bit/s) of a routing variable coming from the
// dual terms: transmitting i->j charges nu_i (outflow) and credits nu_j
// (inflow). The multipliers price flow residuals in rate_scale units.
double dual_coeff_x(const Instance& instance, const StochasticConfig& stoch,
                    const DualState& dual, int link, int app) {
  const int nc = instance.num_apps();
  const LinkSpec& l = instance.links()[link];
  double coef = 0.0;
  if (l.src != instance.gateway())
    coef -= dual.alpha * dual.nu[l.src * nc + app];
  if (l.dst != instance.gateway())
    coef += dual.alpha * dual.nu[l.dst * nc + app];
  return coef / stoch.rate_scale;
}

// Builds and solves the per-slot program restricted to the candidate link
// set. Utility terms use the noisy per-slot estimate; single-segment
// utilities fold into the objective directly (exact), longer ones get the
// epigraph encoding.
SlotAction solve_on_set(const Instance& instance, const StaticConfig& cfg,
                        const StochasticConfig& stoch, const DualState& dual,
                        const SlotRealization& slot,
                        const std::vector<int>& set, PolicyKind kind) {
  const int n = instance.num_nodes();
  const int nc = instance.num_apps();
  const int gw = instance.gateway();
  const bool with_objective = kind != PolicyKind::MaxFlow;

  LinearProgram lp;
  std::vector<int> xvar(set.size() * nc);
  for (std::size_t si = 0; si < set.size(); ++si)
    for (int c = 0; c < nc; ++c)
      xvar[si * nc + c] = lp.add_variable(
          "x", 0.0, slot.capacity[set[si]],
          dual_coeff_x(instance, stoch, dual, set[si], c));
  std::vector<int> yvar(n * nc);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c) {
      const double gamma = instance.apps()[c].proc_demand[i];
      const double cap = slot.proc_capacity[i] / gamma;
      double coef = 0.0;
      if (i != gw)
        coef += dual.alpha * dual.nu[i * nc + c] *
                (instance.apps()[c].flow_reduction[i] - 1.0) /
                stoch.rate_scale;
      yvar[i * nc + c] = lp.add_variable("y", 0.0, cap, coef);
    }

  std::vector<int> svar;
  if (with_objective) {
    const auto groups = effective_groups(instance, cfg);
    for (std::size_t k = 0; k < groups.size(); ++k)
      svar.push_back(lp.add_variable("s", 0.0, kInf,
                                     (1.0 - cfg.theta) * groups[k].weight));
    // Utility of processing, with the slot's noise factor. The gateway is
    // excluded: its processing is not a dual-priced decision here (it has no
    // multiplier and follows the automatic greedy rule after the solve), and
    // pricing it would subsidise transmitting traffic that does not exist.
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < nc; ++c) {
        if (i == gw) continue;
        const PiecewiseLinearConcave& u = instance.apps()[c].utility[i];
        if (u.is_constant()) continue;
        const double factor = slot.utility_factor[i];
        if (u.is_single_segment()) {
          lp.add_cost(yvar[i * nc + c],
                      -cfg.theta * factor * u.slope_at_zero());
        } else {
          double cap = lp.upper()[yvar[i * nc + c]];
          if (!std::isfinite(cap)) cap = slot.proc_capacity[i] + 1.0;
          const int uv = encode_pwl_utility(u.scaled(factor),
                                            yvar[i * nc + c], cap, &lp);
          lp.set_cost(uv, -cfg.theta);
        }
      }
    // Group epigraph rows over the set's links only.
    for (std::size_t k = 0; k < groups.size(); ++k)
      for (int i : groups[k].members) {
        const double e = instance.nodes()[i].energy_budget;
        std::vector<std::pair<int, double>> row;
        for (std::size_t si = 0; si < set.size(); ++si) {
          const LinkSpec& l = instance.links()[set[si]];
          if (l.src == i)
            for (int c = 0; c < nc; ++c)
              row.push_back({xvar[si * nc + c], l.e_tx / e});
          if (l.dst == i)
            for (int c = 0; c < nc; ++c)
              row.push_back({xvar[si * nc + c], l.e_rx / e});
        }
        for (int c = 0; c < nc; ++c)
          row.push_back({yvar[i * nc + c], instance.nodes()[i].proc_energy / e});
        row.push_back({svar[k], -1.0});
        lp.add_row(row, Relation::LessEq, 0.0);
      }
  }

  // Gateway sink: processing and re-emission cannot exceed what arrives.
  for (int c = 0; c < nc; ++c) {
    std::vector<std::pair<int, double>> row;
    for (std::size_t si = 0; si < set.size(); ++si) {
      const LinkSpec& l = instance.links()[set[si]];
      if (l.src == gw) row.push_back({xvar[si * nc + c], 1.0});
      if (l.dst == gw) row.push_back({xvar[si * nc + c], -1.0});
    }
    row.push_back({yvar[gw * nc + c],
                   1.0 - instance.apps()[c].flow_reduction[gw]});
    lp.add_row(row, Relation::LessEq,
               slot.arrival_bits[gw * nc + c] / stoch.slot_seconds);
  }

  if (nc > 1) {
    for (std::size_t si = 0; si < set.size(); ++si) {
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < nc; ++c) row.push_back({xvar[si * nc + c], 1.0});
      lp.add_row(row, Relation::LessEq, slot.capacity[set[si]]);
    }
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < nc; ++c)
        row.push_back({yvar[i * nc + c], instance.apps()[c].proc_demand[i]});
      lp.add_row(row, Relation::LessEq, slot.proc_capacity[i]);
    }
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw NumericalError("per-slot program failed on a candidate set");

  SlotAction action;
  action.x.assign(instance.num_links() * nc, 0.0);
  action.y.assign(n * nc, 0.0);
  for (std::size_t si = 0; si < set.size(); ++si)
    for (int c = 0; c < nc; ++c)
      action.x[set[si] * nc + c] = sol.x[xvar[si * nc + c]];
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c) action.y[i * nc + c] = sol.x[yvar[i * nc + c]];
  action.active_set = set;
  action.lagrangian = sol.objective;
  return action;
}

// Valid lower bound on the value of solve_on_set: drop every row and let
// each variable sit at whichever bound minimizes its own term. Used to skip
// sets that cannot beat the incumbent.
double set_value_bound(const Instance& instance, const StochasticConfig& stoch,
                       const DualState& dual, const SlotRealization& slot,
                       const std::vector<int>& set, double y_floor, int nc) {
  double lb = y_floor;
  for (int l : set)
    for (int c = 0; c < nc; ++c) {
      const double coef = dual_coeff_x(instance, stoch, dual, l, c);
      if (coef < 0.0) lb += coef * slot.capacity[l];
    }
  return lb;
}

std::vector<int> greedy_admission(const Instance& instance,
                                  const StaticConfig& cfg,
                                  const StochasticConfig& stoch,
                                  const DualState& dual,
                                  const SlotRealization& slot,
                                  PolicyKind kind) {
  const int nl = instance.num_links();
  const int nc = instance.num_apps();
  const int gw = instance.gateway();
  // Score: best-case objective improvement of activating the link alone.
  std::vector<std::pair<double, int>> order(nl);
  for (int l = 0; l < nl; ++l) {
    double gain = 0.0;
    for (int c = 0; c < nc; ++c)
      gain -= dual_coeff_x(instance, stoch, dual, l, c) * slot.capacity[l];
    if (kind != PolicyKind::MaxFlow) {
      const LinkSpec& ls = instance.links()[l];
      double power = 0.0;
      if (ls.src != gw)
        power += ls.e_tx / instance.nodes()[ls.src].energy_budget;
      if (ls.dst != gw)
        power += ls.e_rx / instance.nodes()[ls.dst].energy_budget;
      gain -= (1.0 - cfg.theta) * power * slot.capacity[l];
    }
    order[l] = {-gain, l};  // sort ascending => highest gain first
  }
  std::sort(order.begin(), order.end());
  std::vector<int> admitted;
  std::vector<char> blocked(nl, 0);
  for (const auto& [neg_gain, l] : order) {
    if (blocked[l]) continue;
    admitted.push_back(l);
    for (int o : instance.conflict().interferers[l]) blocked[o] = 1;
  }
  std::sort(admitted.begin(), admitted.end());
  return admitted;
}

}  // namespace

SlotAction slot_action(const Instance& instance, const StaticConfig& cfg,
                       const StochasticConfig& stoch,
                       const ScheduleContext& sched, const DualState& dual,
                       const SlotRealization& slot, PolicyKind kind) {
  const int nc = instance.num_apps();
  if (sched.mis.overflow) {
    const auto set = greedy_admission(instance, cfg, stoch, dual, slot, kind);
    return solve_on_set(instance, cfg, stoch, dual, slot, set, kind);
  }

  // The y-side contribution to the value bound is set-independent.
  double y_floor = 0.0;
  for (int i = 0; i < instance.num_nodes(); ++i)
    for (int c = 0; c < nc; ++c) {
      const double gamma = instance.apps()[c].proc_demand[i];
      const double cap = slot.proc_capacity[i] / gamma;
      double coef = 0.0;
      if (i != instance.gateway())
        coef += dual.alpha * dual.nu[i * nc + c] *
                (instance.apps()[c].flow_reduction[i] - 1.0) /
                stoch.rate_scale;
      if (kind != PolicyKind::MaxFlow && i != instance.gateway()) {
        const PiecewiseLinearConcave& u = instance.apps()[c].utility[i];
        if (u.is_single_segment()) {
          coef -= cfg.theta * slot.utility_factor[i] * u.slope_at_zero();
        } else if (!u.is_constant()) {
          y_floor -= cfg.theta *
                     std::max(0.0, slot.utility_factor[i] * u.eval(cap));
        }
      }
      if (coef < 0.0) y_floor += coef * cap;
    }

  bool have = false;
  SlotAction best;
  for (const auto& set : sched.mis.sets) {
    if (have &&
        set_value_bound(instance, stoch, dual, slot, set, y_floor, nc) >=
            best.lagrangian)
      continue;
    SlotAction cand =
        solve_on_set(instance, cfg, stoch, dual, slot, set, kind);
    if (!have || cand.lagrangian < best.lagrangian) {
      best = std::move(cand);
      have = true;
    }
  }
  if (!have) throw NumericalError("no candidate set produced an action");
  return best;
}

void dual_update(const Instance& instance, const StochasticConfig& stoch,
                 const SlotRealization& slot, const SlotAction& action,
                 DualState* dual) {
  const int nc = instance.num_apps();
  for (int c = 0; c < nc; ++c) {
    const AppSpec& app = instance.apps()[c];
    for (int i = 0; i < instance.num_nodes(); ++i) {
      if (i == instance.gateway()) continue;
      double g = (app.flow_reduction[i] - 1.0) * action.y[i * nc + c];
      for (int l : instance.in_links(i)) g += action.x[l * nc + c];
      for (int l : instance.out_links(i)) g -= action.x[l * nc + c];
      g += slot.arrival_bits[i * nc + c] / stoch.slot_seconds;
      dual->nu[i * nc + c] += dual->alpha * g / stoch.rate_scale;
    }
  }
  dual->t += 1;
}

MinEnergyPlan build_min_energy_plan(const Instance& instance, double weight) {
  if (weight < 0.0 || weight > 1.0)
    throw ConfigError("min-energy weight must lie in [0,1]");
  // Same constraint set as the static program; the objective swaps the
  // max-power epigraph for the total power.
  StaticConfig cfg;
  cfg.theta = weight;
  StaticProgram prog = build_static_program(instance, cfg);
  const int nc = instance.num_apps();
  for (int sv : prog.layout.s_vars) prog.lp.set_cost(sv, 0.0);
  for (int l = 0; l < instance.num_links(); ++l) {
    const LinkSpec& ls = instance.links()[l];
    for (int c = 0; c < nc; ++c)
      prog.lp.add_cost(prog.layout.x_var(l, c, nc),
                       (1.0 - weight) * (ls.e_tx + ls.e_rx));
  }
  for (int i = 0; i < instance.num_nodes(); ++i)
    for (int c = 0; c < nc; ++c)
      prog.lp.add_cost(prog.layout.y_var(i, c, nc),
                       (1.0 - weight) * instance.nodes()[i].proc_energy);

  const LpSolution sol = solve_lp(prog.lp);
  if (sol.status == LpStatus::Infeasible)
    throw InfeasibleError("capacity region empty");
  if (sol.status != LpStatus::Optimal)
    throw NumericalError("min-energy program did not solve");

  MinEnergyPlan out;
  out.plan.x.assign(instance.num_links() * nc, 0.0);
  out.plan.y.assign(instance.num_nodes() * nc, 0.0);
  for (int l = 0; l < instance.num_links(); ++l)
    for (int c = 0; c < nc; ++c)
      out.plan.x[l * nc + c] = sol.x[prog.layout.x_var(l, c, nc)];
  for (int i = 0; i < instance.num_nodes(); ++i)
    for (int c = 0; c < nc; ++c)
      out.plan.y[i * nc + c] = sol.x[prog.layout.y_var(i, c, nc)];
  out.objective = sol.objective;
  return out;
}

namespace {

// The gateway always processes what actually reaches it (it has no energy
// budget); applied uniformly so policy reward comparisons stay fair.
void gateway_greedy_processing(const Instance& instance,
                               const StochasticConfig& stoch,
                               const SlotRealization& slot,
                               SlotAction* action) {
  const int nc = instance.num_apps();
  const int gw = instance.gateway();
  double budget = slot.proc_capacity[gw];
  for (int c = 0; c < nc; ++c) {
    const double beta = instance.apps()[c].flow_reduction[gw];
    double net = slot.arrival_bits[gw * nc + c] / stoch.slot_seconds;
    for (int l : instance.in_links(gw)) net += action->x[l * nc + c];
    for (int l : instance.out_links(gw)) net -= action->x[l * nc + c];
    if (net <= 0.0 || budget <= 0.0) continue;
    const double gamma = std::max(instance.apps()[c].proc_demand[gw], 1e-300);
    const double y = std::min(net / (1.0 - beta), budget / gamma);
    if (y > action->y[gw * nc + c]) action->y[gw * nc + c] = y;
    budget -= action->y[gw * nc + c] * gamma;
  }
}

// Min-energy per-slot scheduling: accumulate the plan as per-link credits,
// admit links greedily by outstanding credit subject to conflicts, clip to
// the realized capacities.
struct MinEnergyScheduler {
  const Instance* instance = nullptr;
  MinEnergyPlan plan;
  std::vector<double> credit_bits;  // per (link, app)

  SlotAction act(const StochasticConfig& stoch, const SlotRealization& slot) {
    const int nc = instance->num_apps();
    const int nl = instance->num_links();
    for (int l = 0; l < nl; ++l)
      for (int c = 0; c < nc; ++c)
        credit_bits[l * nc + c] += plan.plan.x[l * nc + c] * stoch.slot_seconds;

    std::vector<std::pair<double, int>> order;
    order.reserve(nl);
    for (int l = 0; l < nl; ++l) {
      double credit = 0.0;
      for (int c = 0; c < nc; ++c) credit += credit_bits[l * nc + c];
      if (credit > 1e-9) order.push_back({-credit, l});
    }
    std::sort(order.begin(), order.end());

    SlotAction action;
    action.x.assign(nl * nc, 0.0);
    action.y.assign(instance->num_nodes() * nc, 0.0);
    std::vector<char> blocked(nl, 0);
    for (const auto& [neg, l] : order) {
      if (blocked[l]) continue;
      action.active_set.push_back(l);
      double airtime = slot.capacity[l] * stoch.slot_seconds;
      for (int c = 0; c < nc; ++c) {
        const double send = std::min(credit_bits[l * nc + c], airtime);
        action.x[l * nc + c] = send / stoch.slot_seconds;
        credit_bits[l * nc + c] -= send;
        airtime -= send;
      }
      for (int o : instance->conflict().interferers[l]) blocked[o] = 1;
    }
    std::sort(action.active_set.begin(), action.active_set.end());
    for (int i = 0; i < instance->num_nodes(); ++i)
      for (int c = 0; c < nc; ++c) {
        const double gamma = instance->apps()[c].proc_demand[i];
        const double cap =
            gamma > 0.0 ? slot.proc_capacity[i] / gamma : kInf;
        action.y[i * nc + c] = std::min(plan.plan.y[i * nc + c], cap);
      }
    return action;
  }
};

struct Kahan {
  std::vector<double> sum, comp;
  explicit Kahan(std::size_t n) : sum(n, 0.0), comp(n, 0.0) {}
  void add(std::size_t i, double v) {
    const double y = v - comp[i];
    const double t = sum[i] + y;
    comp[i] = (t - sum[i]) - y;
    sum[i] = t;
  }
};

}  // namespace

EpisodeTrace run_episode(const Instance& instance, const EpisodeConfig& cfg,
                         std::uint64_t seed) {
  const int n = instance.num_nodes();
  const int nc = instance.num_apps();
  const int gw = instance.gateway();
  const double T = cfg.stoch.slot_seconds;

  ScheduleContext sched;
  if (cfg.policy != PolicyKind::MinEnergy)
    sched = ScheduleContext::build(instance);

  MinEnergyScheduler min_energy;
  if (cfg.policy == PolicyKind::MinEnergy) {
    const double w =
        cfg.min_energy_weight >= 0.0 ? cfg.min_energy_weight : cfg.static_cfg.theta;
    min_energy.instance = &instance;
    min_energy.plan = build_min_energy_plan(instance, w);
    min_energy.credit_bits.assign(instance.num_links() * nc, 0.0);
  }

  DualState dual = make_dual_state(instance, cfg.alpha);
  std::vector<double> battery(n, 0.0);
  for (int i = 0; i < n; ++i) battery[i] = instance.nodes()[i].energy_budget;

  Stream rng(derive_seed(seed, kEpisodePurpose, 0));
  Kahan residual_sum(n * nc);
  EpisodeTrace trace;
  trace.death_node = -1;
  trace.group_death_slots.assign(cfg.static_cfg.groups.size(), -1);

  for (int t = 1; t <= cfg.max_slots; ++t) {
    const SlotRealization slot = sample_slot(instance, cfg.stoch, rng);
    SlotAction action =
        cfg.policy == PolicyKind::MinEnergy
            ? min_energy.act(cfg.stoch, slot)
            : slot_action(instance, cfg.static_cfg, cfg.stoch, sched, dual,
                          slot, cfg.policy);
    gateway_greedy_processing(instance, cfg.stoch, slot, &action);

    // Death check before executing the slot.
    Policy as_policy{action.x, action.y};
    std::vector<double> power(n, 0.0);
    int dying = -1;
    for (int i = 0; i < n; ++i) {
      power[i] = node_power(instance, as_policy, i);
      if (i == gw) continue;
      if (battery[i] + 1e-9 * instance.nodes()[i].energy_budget <
          power[i] * T) {
        if (dying < 0) dying = i;
      }
    }
    if (dying >= 0) {
      trace.death_node = dying;
      for (std::size_t k = 0; k < cfg.static_cfg.groups.size(); ++k) {
        const auto& members = cfg.static_cfg.groups[k].members;
        if (std::find(members.begin(), members.end(), dying) != members.end())
          trace.group_death_slots[k] = t;
      }
      break;
    }
    for (int i = 0; i < n; ++i)
      if (i != gw) battery[i] -= power[i] * T;

    if (cfg.policy != PolicyKind::MinEnergy)
      dual_update(instance, cfg.stoch, slot, action, &dual);

    // Per-slot bookkeeping.
    double worst_ratio = 0.0;
    for (int i = 0; i < n; ++i)
      if (i != gw)
        worst_ratio = std::max(
            worst_ratio, power[i] / instance.nodes()[i].energy_budget);
    // Generalized objective when groups are configured.
    double lifetime_term = worst_ratio;
    if (!cfg.static_cfg.groups.empty()) {
      lifetime_term = 0.0;
      for (const auto& g : cfg.static_cfg.groups) {
        double m = 0.0;
        for (int i : g.members)
          m = std::max(m, power[i] / instance.nodes()[i].energy_budget);
        lifetime_term += g.weight * m;
      }
    }
    double util = 0.0, processed = 0.0, forwarded = 0.0;
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < n; ++i) {
        util += instance.apps()[c].utility[i].eval(action.y[i * nc + c]);
        processed += action.y[i * nc + c] * T;
      }
    for (double v : action.x) forwarded += v * T;
    const double f =
        (1.0 - cfg.static_cfg.theta) * lifetime_term - cfg.static_cfg.theta * util;

    double sigma = 0.0;
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < n; ++i) {
        if (i == gw) continue;
        double g = (instance.apps()[c].flow_reduction[i] - 1.0) *
                   action.y[i * nc + c];
        for (int l : instance.in_links(i)) g += action.x[l * nc + c];
        for (int l : instance.out_links(i)) g -= action.x[l * nc + c];
        g += slot.arrival_bits[i * nc + c] / T;
        g /= cfg.stoch.rate_scale;
        sigma += g * g;
        residual_sum.add(i * nc + c, g);
        trace.residual_scale = std::max(trace.residual_scale, std::fabs(g));
      }

    double congestion = 0.0;
    for (double v : dual.nu) congestion += v;
    double min_batt = kInf;
    for (int i = 0; i < n; ++i)
      if (i != gw) min_batt = std::min(min_batt, battery[i]);
    int active = 0;
    for (int l : action.active_set) {
      double tot = 0.0;
      for (int c = 0; c < nc; ++c) tot += action.x[l * nc + c];
      if (tot > 1e-9) ++active;
    }

    trace.objective.push_back(f);
    trace.gap_norm.push_back(cfg.static_cfg.theta > 0.0
                                 ? (f - cfg.f_star) / cfg.static_cfg.theta
                                 : f - cfg.f_star);
    trace.congestion.push_back(congestion);
    trace.min_battery.push_back(min_batt);
    trace.active_links.push_back(active);
    trace.processed_bits.push_back(processed);
    trace.forwarded_bits.push_back(forwarded);
    trace.reward.push_back(util);
    trace.sigma.push_back(sigma);
    trace.lifetime_slots = t;

    // Telescoping identity check every 100 slots (exact algebra of the
    // unprojected update; errors here would mean bookkeeping bugs).
    if (cfg.policy != PolicyKind::MinEnergy && t % 100 == 0) {
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < n; ++i) {
          if (i == gw) continue;
          const double lhs = residual_sum.sum[i * nc + c] / t;
          const double rhs = dual.nu[i * nc + c] / (dual.alpha * t);
          trace.telescoping_max_err =
              std::max(trace.telescoping_max_err, std::fabs(lhs - rhs));
        }
    }
  }

  trace.final_batteries = battery;
  trace.final_nu = dual.nu;
  trace.mean_residual.assign(n * nc, 0.0);
  if (trace.lifetime_slots > 0)
    for (int k = 0; k < n * nc; ++k)
      trace.mean_residual[k] = residual_sum.sum[k] / trace.lifetime_slots;
  return trace;
}

TheoremDiagnostics theorem_diagnostics(const Instance& instance,
                                       const EpisodeConfig& cfg,
                                       const EpisodeTrace& trace) {
  TheoremDiagnostics d;
  const int T = trace.lifetime_slots;
  if (T == 0) return d;
  double acc = 0.0, smax = 0.0, smean = 0.0;
  for (int t = 0; t < T; ++t) {
    acc += trace.objective[t];
    smax = std::max(smax, trace.sigma[t]);
    smean += trace.sigma[t];
  }
  d.avg_gap = acc / T - cfg.f_star;
  d.eps1_max = 0.5 * smax;
  d.eps1_mean = 0.5 * smean / T;

  const int nc = instance.num_apps();
  double xi_sum = 0.0;
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < instance.num_nodes(); ++i) {
      const double gamma = instance.apps()[c].proc_demand[i];
      const double cap = gamma > 0.0
                             ? instance.nodes()[i].proc_capacity / gamma
                             : instance.nodes()[i].proc_capacity;
      xi_sum += cfg.stoch.utility_noise *
                std::fabs(instance.apps()[c].utility[i].eval(cap));
    }
  d.eps2 = cfg.static_cfg.theta * xi_sum;

  for (std::size_t k = 0; k < trace.final_nu.size(); ++k)
    d.feas_residual = std::max(
        d.feas_residual, std::fabs(trace.final_nu[k] / (cfg.alpha * T)));
  d.telescoping_max_err = trace.telescoping_max_err;
  d.gap_bound_holds = d.avg_gap <= cfg.alpha * d.eps1_max + d.eps2 + 1e-6;
  d.telescoping_exact =
      trace.telescoping_max_err <= 1e-9 * std::max(1.0, trace.residual_scale);
  return d;
}

}  // namespace netlife
