#include "netlife/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>

#include "netlife/errors.hpp"
#include "netlife/rng.hpp"

namespace netlife {

Instance::Instance(std::vector<NodeSpec> nodes, std::vector<LinkSpec> links,
                   std::vector<AppSpec> apps)
    : nodes_(std::move(nodes)), links_(std::move(links)), apps_(std::move(apps)) {
  const int n = num_nodes();
  out_.assign(n, {});
  in_.assign(n, {});
  for (int l = 0; l < num_links(); ++l) {
    out_[links_[l].src].push_back(l);
    in_[links_[l].dst].push_back(l);
  }
  for (int i = 0; i < n; ++i)
    if (nodes_[i].is_gateway) {
      if (gateway_ >= 0) throw ConfigError("more than one gateway");
      gateway_ = i;
    }
  validate();
  build_conflict();
}

void Instance::validate() const {
  const int n = num_nodes();
  if (n < 2) throw ConfigError("instance needs at least 2 nodes");
  if (gateway_ < 0) throw ConfigError("no gateway node");
  for (int i = 0; i < n; ++i) {
    const NodeSpec& nd = nodes_[i];
    if (nd.is_gateway) {
      if (std::isfinite(nd.energy_budget))
        throw ConfigError("gateway must have an infinite energy budget");
    } else if (!(nd.energy_budget > 0.0)) {
      throw ConfigError("node " + std::to_string(i) +
                        ": energy budget must be positive");
    }
    if (nd.proc_capacity < 0.0 || nd.proc_energy < 0.0)
      throw ConfigError("node " + std::to_string(i) + ": negative parameter");
  }
  std::set<std::pair<int, int>> seen;
  for (const LinkSpec& l : links_) {
    if (l.src < 0 || l.src >= n || l.dst < 0 || l.dst >= n || l.src == l.dst)
      throw ConfigError("link endpoints invalid");
    if (!(l.mean_capacity > 0.0))
      throw ConfigError("link capacity must be positive");
    if (l.e_tx < 0.0 || l.e_rx < 0.0)
      throw ConfigError("link energies must be nonnegative");
    if (!seen.insert({l.src, l.dst}).second)
      throw ConfigError("duplicate directed link");
  }
  for (const AppSpec& a : apps_) {
    if (static_cast<int>(a.mean_arrival.size()) != n ||
        static_cast<int>(a.flow_reduction.size()) != n ||
        static_cast<int>(a.proc_demand.size()) != n ||
        static_cast<int>(a.utility.size()) != n)
      throw ConfigError("app vectors must have one entry per node");
    for (int i = 0; i < n; ++i) {
      if (a.flow_reduction[i] < 0.0 || a.flow_reduction[i] > 1.0)
        throw ConfigError("flow reduction outside [0,1]");
      if (a.mean_arrival[i] < 0.0) throw ConfigError("negative arrival rate");
      if (!(a.proc_demand[i] > 0.0))
        throw ConfigError("processing demand must be positive");
      a.utility[i].validate();
    }
    if (a.mean_arrival[gateway_] != 0.0)
      throw ConfigError("gateway cannot be a source");
  }

  // Every node must reach the gateway along directed links.
  std::vector<char> reach(n, 0);
  std::queue<int> q;
  reach[gateway_] = 1;
  q.push(gateway_);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int l : in_[v]) {
      const int u = links_[l].src;
      if (!reach[u]) {
        reach[u] = 1;
        q.push(u);
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (!reach[i]) throw ConfigError("disconnected topology");
}

void Instance::build_conflict() {
  const int n = num_nodes();
  std::vector<std::vector<int>> out_nbrs(n);
  for (const LinkSpec& l : links_) out_nbrs[l.src].push_back(l.dst);

  conflict_.interferers.assign(num_links(), {});
  for (int l = 0; l < num_links(); ++l) {
    const int i = links_[l].src, j = links_[l].dst;
    std::set<int> iset;
    std::vector<int> hubs = out_nbrs[i];
    hubs.insert(hubs.end(), out_nbrs[j].begin(), out_nbrs[j].end());
    std::sort(hubs.begin(), hubs.end());
    hubs.erase(std::unique(hubs.begin(), hubs.end()), hubs.end());
    for (int d : hubs) {
      for (int b : out_nbrs[d]) {
        const int ldb = find_link(d, b);
        if (ldb >= 0) iset.insert(ldb);
        const int lbd = find_link(b, d);  // (a,d) with a in N_d
        if (lbd >= 0) iset.insert(lbd);
      }
    }
    iset.erase(l);  // the link itself is accounted separately
    conflict_.interferers[l].assign(iset.begin(), iset.end());
  }
}

int Instance::find_link(int src, int dst) const {
  for (int l : out_[src])
    if (links_[l].dst == dst) return l;
  return -1;
}

std::vector<int> interference_set(const Instance& instance, int src, int dst) {
  const int l = instance.find_link(src, dst);
  if (l < 0)
    throw ConfigError("unknown link " + std::to_string(src) + "->" +
                      std::to_string(dst));
  return instance.conflict().interferers[l];
}

RggTopology generate_rgg(int n, double radius, std::uint64_t seed) {
  if (n < 2) throw ConfigError("generate_rgg: need n >= 2");
  if (!(radius > 0.0)) throw ConfigError("generate_rgg: radius must be positive");

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Stream rng(derive_seed(seed, 0x7067 /*topology*/, attempt));
    RggTopology topo;
    topo.positions.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double x = rng.uniform();
      const double y = rng.uniform();
      topo.positions.push_back({x, y});
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double dx = topo.positions[i].first - 0.5;
      const double dy = topo.positions[i].second - 0.5;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        topo.gateway = i;
      }
    }
    const double r2 = radius * radius;
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double dx = topo.positions[i].first - topo.positions[j].first;
        const double dy = topo.positions[i].second - topo.positions[j].second;
        if (dx * dx + dy * dy <= r2) {
          topo.edges.push_back({i, j});
          adj[i].push_back(j);
          adj[j].push_back(i);
        }
      }
    std::vector<char> reach(n, 0);
    std::queue<int> q;
    reach[0] = 1;
    q.push(0);
    int count = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int u : adj[v])
        if (!reach[u]) {
          reach[u] = 1;
          ++count;
          q.push(u);
        }
    }
    if (count == n) return topo;
  }
  throw InfeasibleError("disconnected topology");
}

namespace {

// Fixed-width bitset over link ids for the clique enumeration.
struct Bits {
  std::vector<std::uint64_t> w;
  explicit Bits(int n) : w((n + 63) / 64, 0) {}
  void set(int i) { w[i >> 6] |= 1ULL << (i & 63); }
  void clear(int i) { w[i >> 6] &= ~(1ULL << (i & 63)); }
  bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  bool empty() const {
    for (auto v : w)
      if (v) return false;
    return true;
  }
  int count_and(const Bits& o) const {
    int c = 0;
    for (std::size_t k = 0; k < w.size(); ++k)
      c += __builtin_popcountll(w[k] & o.w[k]);
    return c;
  }
  Bits and_with(const Bits& o) const {
    Bits r(*this);
    for (std::size_t k = 0; k < w.size(); ++k) r.w[k] &= o.w[k];
    return r;
  }
};

struct MisSearch {
  int n;
  const std::vector<Bits>* comp;  // complement adjacency
  int cap;
  MisResult* out;

  // Bron-Kerbosch with pivoting; candidates visited in ascending id order so
  // the output order is deterministic.
  bool expand(std::vector<int>& r, Bits p, Bits x) {
    if (p.empty() && x.empty()) {
      out->sets.push_back(r);
      if (static_cast<int>(out->sets.size()) >= cap) {
        return false;
      }
      return true;
    }
    int pivot = -1, best = -1;
    for (int v = 0; v < n; ++v) {
      if (!p.test(v) && !x.test(v)) continue;
      const int c = p.count_and((*comp)[v]);
      if (c > best) {
        best = c;
        pivot = v;
      }
    }
    for (int v = 0; v < n; ++v) {
      if (!p.test(v) || (*comp)[pivot].test(v)) continue;
      r.push_back(v);
      if (!expand(r, p.and_with((*comp)[v]), x.and_with((*comp)[v]))) {
        r.pop_back();
        return false;
      }
      r.pop_back();
      p.clear(v);
      x.set(v);
    }
    return true;
  }
};

}  // namespace

MisResult maximal_independent_sets(const ConflictGraph& conflict, int cap) {
  if (cap < 1) throw ConfigError("maximal_independent_sets: cap must be >= 1");
  const int n = static_cast<int>(conflict.interferers.size());
  std::vector<Bits> comp(n, Bits(std::max(n, 1)));
  for (int v = 0; v < n; ++v) {
    for (int u = 0; u < n; ++u)
      if (u != v) comp[v].set(u);
    for (int u : conflict.interferers[v]) comp[v].clear(u);
  }
  MisResult res;
  MisSearch search{n, &comp, cap + 1, &res};
  Bits p(std::max(n, 1)), x(std::max(n, 1));
  for (int v = 0; v < n; ++v) p.set(v);
  std::vector<int> r;
  search.expand(r, p, x);
  if (static_cast<int>(res.sets.size()) > cap) {
    res.sets.resize(cap);
    res.overflow = true;
  }
  return res;
}

std::string export_edge_list(const Instance& instance) {
  std::string out;
  char buf[160];
  for (const LinkSpec& l : instance.links()) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g %.17g\n", l.src, l.dst,
                  l.mean_capacity, l.e_tx, l.e_rx);
    out += buf;
  }
  return out;
}

}  // namespace netlife
