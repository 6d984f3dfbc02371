#pragma once

#include <vector>

#include "netlife/lp.hpp"
#include "netlife/model.hpp"

namespace netlife {

// Scalarization weight and optional node groups for the generalized
// lifetime objective. No groups means one group holding every non-gateway
// node with weight 1, i.e. the plain min-max power objective.
struct StaticConfig {
  double theta = 1e-5;  // in [0,1]
  struct Group {
    std::vector<int> members;  // non-gateway node ids
    double weight = 1.0;       // pi_k >= 0
  };
  std::vector<Group> groups;
};

// Routing rates x (per link, per app) and processing rates y (per node, per
// app), both in bit/s. Flattened as [entity * num_apps + app].
struct Policy {
  std::vector<double> x;
  std::vector<double> y;
};

// Worst relative violations of the capacity, interference, and
// flow-conservation constraints (the gateway sink inequality counts toward
// conservation).
struct PolicyResiduals {
  double capacity = 0.0;
  double interference = 0.0;
  double conservation = 0.0;
  double max() const;
};

double node_power(const Instance& instance, const Policy& policy, int node);
PolicyResiduals policy_residuals(const Instance& instance,
                                 const Policy& policy);

struct StaticProgramLayout {
  int x0 = 0;                  // first routing variable
  int y0 = 0;                  // first processing variable
  std::vector<int> s_vars;     // one epigraph variable per group
  std::vector<int> u_vars;     // utility value variable per (node, app)
  int x_var(int link, int app, int num_apps) const {
    return x0 + link * num_apps + app;
  }
  int y_var(int node, int app, int num_apps) const {
    return y0 + node * num_apps + app;
  }
};

struct StaticProgram {
  LinearProgram lp;
  StaticProgramLayout layout;
};

// Assembles the scalarized min-max-power / utility LP: flow conservation at
// every non-gateway node, a sink inequality at the gateway (traffic may
// terminate there but processing cannot exceed what arrives), per-link
// fractional interference rows, capacities, group epigraphs, and utility
// epigraphs. Total: never fails.
StaticProgram build_static_program(const Instance& instance,
                                   const StaticConfig& cfg);

struct StaticSolution {
  Policy policy;
  double lifetime = 0.0;  // seconds; +inf when no node draws power
  std::vector<double> node_power_w;
  double analytics_reward = 0.0;
  double weighted_map = 0.0;
  double objective = 0.0;
};

// Solves the static program and reconstructs the policy-level quantities.
// Throws InfeasibleError("capacity region empty") when the demand cannot be
// carried, NumericalError if the solver or the feasibility check fails.
StaticSolution solve_static(const Instance& instance, const StaticConfig& cfg);

}  // namespace netlife
