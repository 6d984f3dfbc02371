#include "netlife/static_opt.hpp"

#include <algorithm>
#include <cmath>

#include "netlife/errors.hpp"

namespace netlife {

double PolicyResiduals::max() const {
  return std::max(capacity, std::max(interference, conservation));
}

double node_power(const Instance& instance, const Policy& policy, int node) {
  const int nc = instance.num_apps();
  double p = 0.0;
  for (int l : instance.out_links(node)) {
    const double e = instance.links()[l].e_tx;
    for (int c = 0; c < nc; ++c) p += policy.x[l * nc + c] * e;
  }
  for (int l : instance.in_links(node)) {
    const double e = instance.links()[l].e_rx;
    for (int c = 0; c < nc; ++c) p += policy.x[l * nc + c] * e;
  }
  for (int c = 0; c < nc; ++c)
    p += policy.y[node * nc + c] * instance.nodes()[node].proc_energy;
  return p;
}

PolicyResiduals policy_residuals(const Instance& instance,
                                 const Policy& policy) {
  const int nc = instance.num_apps();
  PolicyResiduals r;
  for (int l = 0; l < instance.num_links(); ++l) {
    double tot = 0.0;
    for (int c = 0; c < nc; ++c) tot += policy.x[l * nc + c];
    r.capacity = std::max(
        r.capacity, (tot - instance.links()[l].mean_capacity) /
                        instance.links()[l].mean_capacity);
  }
  for (int i = 0; i < instance.num_nodes(); ++i) {
    const double rho = instance.nodes()[i].proc_capacity;
    double tot = 0.0;
    for (int c = 0; c < nc; ++c)
      tot += instance.apps()[c].proc_demand[i] * policy.y[i * nc + c];
    if (rho > 0.0)
      r.capacity = std::max(r.capacity, (tot - rho) / rho);
    else if (tot > 0.0)
      r.capacity = std::max(r.capacity, tot);
  }
  for (int l = 0; l < instance.num_links(); ++l) {
    double load = 0.0;
    for (int c = 0; c < nc; ++c)
      load += policy.x[l * nc + c] / instance.links()[l].mean_capacity;
    for (int o : instance.conflict().interferers[l])
      for (int c = 0; c < nc; ++c)
        load += policy.x[o * nc + c] / instance.links()[o].mean_capacity;
    r.interference = std::max(r.interference, load - 1.0);
  }
  for (int c = 0; c < nc; ++c) {
    const AppSpec& app = instance.apps()[c];
    for (int i = 0; i < instance.num_nodes(); ++i) {
      double in = app.mean_arrival[i];
      double out = 0.0;
      for (int l : instance.in_links(i)) in += policy.x[l * nc + c];
      for (int l : instance.out_links(i)) out += policy.x[l * nc + c];
      const double y = policy.y[i * nc + c];
      in += app.flow_reduction[i] * y;
      out += y;
      const double denom = std::max(1.0, std::max(in, out));
      if (i == instance.gateway())
        r.conservation = std::max(r.conservation, (out - in) / denom);
      else
        r.conservation = std::max(r.conservation, std::fabs(in - out) / denom);
    }
  }
  return r;
}

StaticProgram build_static_program(const Instance& instance,
                                   const StaticConfig& cfg) {
  if (cfg.theta < 0.0 || cfg.theta > 1.0)
    throw ConfigError("theta must lie in [0,1]");
  const int n = instance.num_nodes();
  const int nl = instance.num_links();
  const int nc = instance.num_apps();
  const int gw = instance.gateway();

  std::vector<StaticConfig::Group> groups = cfg.groups;
  if (groups.empty()) {
    StaticConfig::Group all;
    for (int i = 0; i < n; ++i)
      if (i != gw) all.members.push_back(i);
    all.weight = 1.0;
    groups.push_back(std::move(all));
  }
  for (const auto& g : groups) {
    if (g.weight < 0.0) throw ConfigError("group weight must be nonnegative");
    for (int i : g.members)
      if (i < 0 || i >= n || i == gw)
        throw ConfigError("group members must be non-gateway nodes");
  }

  StaticProgram prog;
  LinearProgram& lp = prog.lp;
  StaticProgramLayout& lay = prog.layout;

  lay.x0 = 0;
  for (int l = 0; l < nl; ++l)
    for (int c = 0; c < nc; ++c)
      lp.add_variable("x" + std::to_string(l) + "_" + std::to_string(c), 0.0,
                      instance.links()[l].mean_capacity);
  lay.y0 = lp.num_vars();
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c) {
      // Each commodity alone already obeys gamma*y <= rho; the finite bound
      // keeps the solver's scaled variables O(1). The shared row below adds
      // the joint constraint when several commodities compete.
      const double gamma = instance.apps()[c].proc_demand[i];
      const double cap = instance.nodes()[i].proc_capacity / gamma;
      lp.add_variable("y" + std::to_string(i) + "_" + std::to_string(c), 0.0,
                      cap);
    }
  for (std::size_t k = 0; k < groups.size(); ++k)
    lay.s_vars.push_back(lp.add_variable("s" + std::to_string(k), 0.0, kInf,
                                         (1.0 - cfg.theta) * groups[k].weight));

  // Utility epigraphs come last so their rows can reference y variables.
  lay.u_vars.assign(n * nc, -1);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c) {
      const int yv = lay.y_var(i, c, nc);
      double cap = lp.upper()[yv];
      if (!std::isfinite(cap)) {
        cap = 0.0;
        for (int j = 0; j < n; ++j) cap += instance.apps()[c].mean_arrival[j];
        cap = std::max(cap, 1.0);
      }
      const int uv =
          encode_pwl_utility(instance.apps()[c].utility[i], yv, cap, &lp);
      lp.set_cost(uv, -cfg.theta);
      lay.u_vars[i * nc + c] = uv;
    }

  // Flow conservation at every non-gateway node; the gateway is a sink where
  // traffic terminates but cannot be conjured.
  for (int c = 0; c < nc; ++c) {
    const AppSpec& app = instance.apps()[c];
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int l : instance.in_links(i)) row.push_back({lay.x_var(l, c, nc), 1.0});
      for (int l : instance.out_links(i))
        row.push_back({lay.x_var(l, c, nc), -1.0});
      row.push_back({lay.y_var(i, c, nc), app.flow_reduction[i] - 1.0});
      if (i == gw) {
        for (auto& [var, coef] : row) coef = -coef;
        lp.add_row(row, Relation::LessEq, app.mean_arrival[i]);
      } else {
        lp.add_row(row, Relation::Equal, -app.mean_arrival[i]);
      }
    }
  }

  // Fractional interference per link.
  for (int l = 0; l < nl; ++l) {
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < nc; ++c)
      row.push_back({lay.x_var(l, c, nc), 1.0 / instance.links()[l].mean_capacity});
    for (int o : instance.conflict().interferers[l])
      for (int c = 0; c < nc; ++c)
        row.push_back(
            {lay.x_var(o, c, nc), 1.0 / instance.links()[o].mean_capacity});
    lp.add_row(row, Relation::LessEq, 1.0);
  }

  // Shared capacities only bind as rows with several commodities; otherwise
  // the variable bounds above already carry them.
  if (nc > 1) {
    for (int l = 0; l < nl; ++l) {
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < nc; ++c) row.push_back({lay.x_var(l, c, nc), 1.0});
      lp.add_row(row, Relation::LessEq, instance.links()[l].mean_capacity);
    }
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> row;
      for (int c = 0; c < nc; ++c)
        row.push_back({lay.y_var(i, c, nc), instance.apps()[c].proc_demand[i]});
      lp.add_row(row, Relation::LessEq, instance.nodes()[i].proc_capacity);
    }
  }

  // Group epigraphs: s_k >= p_i / E_i for every member.
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (int i : groups[k].members) {
      const double e = instance.nodes()[i].energy_budget;
      std::vector<std::pair<int, double>> row;
      for (int l : instance.out_links(i))
        for (int c = 0; c < nc; ++c)
          row.push_back({lay.x_var(l, c, nc), instance.links()[l].e_tx / e});
      for (int l : instance.in_links(i))
        for (int c = 0; c < nc; ++c)
          row.push_back({lay.x_var(l, c, nc), instance.links()[l].e_rx / e});
      for (int c = 0; c < nc; ++c)
        row.push_back(
            {lay.y_var(i, c, nc), instance.nodes()[i].proc_energy / e});
      row.push_back({lay.s_vars[k], -1.0});
      lp.add_row(row, Relation::LessEq, 0.0);
    }
  }
  return prog;
}

StaticSolution solve_static(const Instance& instance, const StaticConfig& cfg) {
  StaticProgram prog = build_static_program(instance, cfg);
  const LpSolution sol = solve_lp(prog.lp);
  if (sol.status == LpStatus::Infeasible)
    throw InfeasibleError("capacity region empty");
  if (sol.status != LpStatus::Optimal)
    throw NumericalError("static program did not solve to optimality");

  const int n = instance.num_nodes();
  const int nl = instance.num_links();
  const int nc = instance.num_apps();

  StaticSolution out;
  out.policy.x.assign(nl * nc, 0.0);
  out.policy.y.assign(n * nc, 0.0);
  for (int l = 0; l < nl; ++l)
    for (int c = 0; c < nc; ++c)
      out.policy.x[l * nc + c] = sol.x[prog.layout.x_var(l, c, nc)];
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c)
      out.policy.y[i * nc + c] = sol.x[prog.layout.y_var(i, c, nc)];
  out.objective = sol.objective;

  const PolicyResiduals res = policy_residuals(instance, out.policy);
  if (res.max() > 1e-6)
    throw NumericalError("static policy violates feasibility tolerances");

  out.node_power_w.assign(n, 0.0);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    out.node_power_w[i] = node_power(instance, out.policy, i);
    if (i != instance.gateway())
      worst = std::max(worst, out.node_power_w[i] /
                                  instance.nodes()[i].energy_budget);
  }
  out.lifetime = worst > 0.0 ? 1.0 / worst : kInf;

  double reward = 0.0, wsum = 0.0, ysum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < nc; ++c) {
      const double y = out.policy.y[i * nc + c];
      reward += instance.apps()[c].utility[i].eval(y);
      wsum += instance.apps()[c].map_score[i] * y;
      ysum += y;
    }
  out.analytics_reward = reward;
  out.weighted_map = ysum > 0.0 ? wsum / ysum : 0.0;
  return out;
}

}  // namespace netlife
