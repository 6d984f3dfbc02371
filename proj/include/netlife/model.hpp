#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "netlife/pwl.hpp"

namespace netlife {

struct NodeSpec {
  int id = 0;
  double x = 0.0, y = 0.0;      // position in the unit square
  double proc_capacity = 0.0;   // rho: sustainable analytics throughput, bit/s
  double energy_budget = 0.0;   // joules; +inf at the gateway
  double proc_energy = 0.0;     // J/bit spent processing
  bool is_gateway = false;
};

struct LinkSpec {
  int src = 0, dst = 0;
  double mean_capacity = 0.0;  // bit/s
  double e_tx = 0.0, e_rx = 0.0;  // J/bit at sender / receiver
};

// One application (commodity). Vectors are indexed by node.
struct AppSpec {
  int id = 0;
  std::vector<double> mean_arrival;    // bit/s injected per node
  std::vector<double> flow_reduction;  // beta in [0,1]
  std::vector<double> proc_demand;     // FLOP/bit (normalized to 1 here)
  std::vector<PiecewiseLinearConcave> utility;  // reward per bit/s processed
  std::vector<double> map_score;       // reporting weight of processing here
};

// Per directed link, the set of links that must stay silent while it is
// active. Symmetric, self excluded.
struct ConflictGraph {
  std::vector<std::vector<int>> interferers;
};

class Instance {
 public:
  Instance(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
           std::vector<AppSpec> apps);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_apps() const { return static_cast<int>(apps_.size()); }
  int gateway() const { return gateway_; }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<AppSpec>& apps() const { return apps_; }
  const ConflictGraph& conflict() const { return conflict_; }

  const std::vector<int>& out_links(int node) const { return out_[node]; }
  const std::vector<int>& in_links(int node) const { return in_[node]; }

  // -1 when the directed link does not exist.
  int find_link(int src, int dst) const;

 private:
  void validate() const;
  void build_conflict();

  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::vector<AppSpec> apps_;
  std::vector<std::vector<int>> out_, in_;
  ConflictGraph conflict_;
  int gateway_ = -1;
};

// Random geometric topology: node positions, the gateway pick (closest to
// the square's center), and the undirected edges within `radius`.
struct RggTopology {
  std::vector<std::pair<double, double>> positions;
  int gateway = -1;
  std::vector<std::pair<int, int>> edges;
};

// Places n nodes uniformly in [0,1]^2; resamples (advancing a sub-stream) up
// to 100 times until the graph is connected, then throws InfeasibleError
// ("disconnected topology"). Deterministic in (n, radius, seed).
RggTopology generate_rgg(int n, double radius, std::uint64_t seed);

// I(link) per the protocol interference model, self excluded. Throws on an
// unknown link.
std::vector<int> interference_set(const Instance& instance, int src, int dst);

struct MisResult {
  std::vector<std::vector<int>> sets;  // each sorted ascending
  bool overflow = false;               // true: truncated at cap
};

// Enumerates all maximal sets of mutually non-interfering links (pivoting
// clique enumeration on the complement). Stops after `cap` sets with the
// overflow flag raised.
MisResult maximal_independent_sets(const ConflictGraph& conflict, int cap);

// One line per directed link: "src dst capacity e_tx e_rx".
std::string export_edge_list(const Instance& instance);

}  // namespace netlife
