#include "netlife/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netlife/errors.hpp"

namespace netlife {

namespace {

constexpr std::uint64_t kSourcesPurpose = 0x534f5552;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty value for " + key);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  std::string suffix = trim(end);
  if (suffix == "k" || suffix == "K")
    v *= 1e3;
  else if (suffix == "M")
    v *= 1e6;
  else if (suffix == "G")
    v *= 1e9;
  else if (!suffix.empty())
    throw ConfigError("non-numeric value for " + key + ": '" + t + "'");
  if (end == t.c_str())
    throw ConfigError("non-numeric value for " + key + ": '" + t + "'");
  return v;
}

std::vector<double> parse_grid(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) out.push_back(parse_number(key, item));
  if (out.empty()) throw ConfigError("empty grid for " + key);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

StochasticConfig ExperimentConfig::stochastic() const {
  StochasticConfig s;
  s.frame_bits = frame_bits();
  s.slot_seconds = 1.0;
  s.capacity_jitter = delta;
  s.utility_noise = eta_noise;
  s.arrivals = ArrivalModel::Poisson;
  s.rate_scale = frame_bits();  // dual dynamics in frames per slot
  return s;
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("network.n: need at least 2 nodes");
  if (!(radius > 0.0)) throw ConfigError("network.radius must be positive");
  if (seeds < 1) throw ConfigError("network.seeds must be >= 1");
  if (!(capacity > 0.0)) throw ConfigError("network.capacity must be positive");
  for (double r : radius_grid)
    if (!(r > 0.0)) throw ConfigError("network.radius_grid must be positive");
  if (!(frame_bytes > 0.0)) throw ConfigError("app.frame_bytes must be positive");
  if (!(frame_rate > 0.0)) throw ConfigError("app.frame_rate must be positive");
  if (beta < 0.0 || beta > 1.0)
    throw ConfigError("app.beta must lie in [0,1]");
  if (source_probability < 0.0 || source_probability > 1.0)
    throw ConfigError("app.source_probability must lie in [0,1]");
  if (!(battery > 0.0)) throw ConfigError("energy.battery must be positive");
  if (p_tx < 0.0 || p_rx < 0.0 || p_proc < 0.0)
    throw ConfigError("energy powers must be nonnegative");
  if (!(t_frame_node > 0.0) || !(t_frame_gateway > 0.0))
    throw ConfigError("energy frame times must be positive");
  if (theta < 0.0 || theta > 1.0) throw ConfigError("sweep.theta in [0,1]");
  for (double t : theta_grid)
    if (t < 0.0 || t > 1.0) throw ConfigError("sweep.theta_grid in [0,1]");
  if (!(alpha > 0.0)) throw ConfigError("sweep.alpha must be positive");
  for (double a : alpha_grid)
    if (!(a > 0.0)) throw ConfigError("sweep.alpha_grid must be positive");
  if (delta < 0.0 || delta >= 1.0) throw ConfigError("sweep.delta in [0,1)");
  if (eta_noise < 0.0 || eta_noise >= 1.0)
    throw ConfigError("sweep.eta_noise in [0,1)");
  if (max_slots < 1) throw ConfigError("sweep.max_slots must be >= 1");
  if (!(compare_reward > 0.0))
    throw ConfigError("sweep.compare_reward must be positive");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.theta_grid = {1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  cfg.radius_grid = {0.20, 0.25, 0.30, 0.35, 0.40, 0.45,
                     0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80};
  cfg.alpha_grid = {1e-2, 1e-3, 1e-4};

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "network.n")
      cfg.n = static_cast<int>(parse_number(key, value));
    else if (key == "network.radius")
      cfg.radius = parse_number(key, value);
    else if (key == "network.radius_grid")
      cfg.radius_grid = parse_grid(key, value);
    else if (key == "network.capacity")
      cfg.capacity = parse_number(key, value);
    else if (key == "network.seeds")
      cfg.seeds = static_cast<int>(parse_number(key, value));
    else if (key == "network.seed0")
      cfg.seed0 = static_cast<std::uint64_t>(parse_number(key, value));
    else if (key == "app.frame_bytes")
      cfg.frame_bytes = parse_number(key, value);
    else if (key == "app.frame_rate")
      cfg.frame_rate = parse_number(key, value);
    else if (key == "app.map_node")
      cfg.map_node = parse_number(key, value);
    else if (key == "app.map_gateway")
      cfg.map_gateway = parse_number(key, value);
    else if (key == "app.beta")
      cfg.beta = parse_number(key, value);
    else if (key == "app.source_probability")
      cfg.source_probability = parse_number(key, value);
    else if (key == "energy.battery")
      cfg.battery = parse_number(key, value);
    else if (key == "energy.p_tx")
      cfg.p_tx = parse_number(key, value);
    else if (key == "energy.p_rx")
      cfg.p_rx = parse_number(key, value);
    else if (key == "energy.p_proc")
      cfg.p_proc = parse_number(key, value);
    else if (key == "energy.t_frame_node")
      cfg.t_frame_node = parse_number(key, value);
    else if (key == "energy.t_frame_gateway")
      cfg.t_frame_gateway = parse_number(key, value);
    else if (key == "sweep.theta")
      cfg.theta = parse_number(key, value);
    else if (key == "sweep.theta_grid")
      cfg.theta_grid = parse_grid(key, value);
    else if (key == "sweep.alpha")
      cfg.alpha = parse_number(key, value);
    else if (key == "sweep.alpha_grid")
      cfg.alpha_grid = parse_grid(key, value);
    else if (key == "sweep.delta")
      cfg.delta = parse_number(key, value);
    else if (key == "sweep.eta_noise")
      cfg.eta_noise = parse_number(key, value);
    else if (key == "sweep.max_slots")
      cfg.max_slots = static_cast<int>(parse_number(key, value));
    else if (key == "sweep.compare_reward")
      cfg.compare_reward = parse_number(key, value);
    else if (key == "out.dir")
      cfg.out_dir = value;
    else
      throw ConfigError("unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "network.n = " << cfg.n << "\n";
  os << "network.radius = " << format_double(cfg.radius) << "\n";
  os << "network.radius_grid =";
  for (std::size_t i = 0; i < cfg.radius_grid.size(); ++i)
    os << (i ? "," : " ") << format_double(cfg.radius_grid[i]);
  os << "\n";
  os << "network.capacity = " << format_double(cfg.capacity) << "\n";
  os << "network.seeds = " << cfg.seeds << "\n";
  os << "network.seed0 = " << cfg.seed0 << "\n";
  os << "app.frame_bytes = " << format_double(cfg.frame_bytes) << "\n";
  os << "app.frame_rate = " << format_double(cfg.frame_rate) << "\n";
  os << "app.map_node = " << format_double(cfg.map_node) << "\n";
  os << "app.map_gateway = " << format_double(cfg.map_gateway) << "\n";
  os << "app.beta = " << format_double(cfg.beta) << "\n";
  os << "app.source_probability = " << format_double(cfg.source_probability)
     << "\n";
  os << "energy.battery = " << format_double(cfg.battery) << "\n";
  os << "energy.p_tx = " << format_double(cfg.p_tx) << "\n";
  os << "energy.p_rx = " << format_double(cfg.p_rx) << "\n";
  os << "energy.p_proc = " << format_double(cfg.p_proc) << "\n";
  os << "energy.t_frame_node = " << format_double(cfg.t_frame_node) << "\n";
  os << "energy.t_frame_gateway = " << format_double(cfg.t_frame_gateway)
     << "\n";
  os << "sweep.theta = " << format_double(cfg.theta) << "\n";
  os << "sweep.theta_grid =";
  for (std::size_t i = 0; i < cfg.theta_grid.size(); ++i)
    os << (i ? "," : " ") << format_double(cfg.theta_grid[i]);
  os << "\n";
  os << "sweep.alpha = " << format_double(cfg.alpha) << "\n";
  os << "sweep.alpha_grid =";
  for (std::size_t i = 0; i < cfg.alpha_grid.size(); ++i)
    os << (i ? "," : " ") << format_double(cfg.alpha_grid[i]);
  os << "\n";
  os << "sweep.delta = " << format_double(cfg.delta) << "\n";
  os << "sweep.eta_noise = " << format_double(cfg.eta_noise) << "\n";
  os << "sweep.max_slots = " << cfg.max_slots << "\n";
  os << "sweep.compare_reward = " << format_double(cfg.compare_reward) << "\n";
  os << "out.dir = " << cfg.out_dir << "\n";
  return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the canonical dump.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : dump_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Instance make_instance(const ExperimentConfig& cfg, double radius,
                       std::uint64_t seed, double map_override) {
  const RggTopology topo = generate_rgg(cfg.n, radius, seed);
  std::vector<NodeSpec> nodes;
  nodes.reserve(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    NodeSpec nd;
    nd.id = i;
    nd.x = topo.positions[i].first;
    nd.y = topo.positions[i].second;
    nd.is_gateway = i == topo.gateway;
    nd.proc_capacity = nd.is_gateway ? cfg.gateway_rho() : cfg.node_rho();
    nd.energy_budget =
        nd.is_gateway ? std::numeric_limits<double>::infinity() : cfg.battery;
    nd.proc_energy = nd.is_gateway ? cfg.gateway_epr() : cfg.node_epr();
    nodes.push_back(nd);
  }
  std::vector<LinkSpec> links;
  for (auto [a, b] : topo.edges) {
    links.push_back({a, b, cfg.capacity, cfg.e_tx(), cfg.e_rx()});
    links.push_back({b, a, cfg.capacity, cfg.e_tx(), cfg.e_rx()});
  }

  // Sources with probability 1/2 (configurable); the all-idle draw is
  // rejected and redrawn from a fresh sub-stream.
  std::vector<double> arrivals(cfg.n, 0.0);
  for (int round = 0; round < 64; ++round) {
    Stream src(derive_seed(seed, kSourcesPurpose, round));
    bool any = false;
    for (int i = 0; i < cfg.n; ++i) {
      arrivals[i] = 0.0;
      if (i == topo.gateway) continue;
      if (src.uniform() < cfg.source_probability) {
        arrivals[i] = cfg.mean_arrival();
        any = true;
      }
    }
    if (any || cfg.source_probability == 0.0) break;
    if (round == 63) throw ConfigError("no sources drawn in 64 rounds");
  }

  AppSpec app;
  app.id = 0;
  app.mean_arrival = arrivals;
  app.flow_reduction.assign(cfg.n, cfg.beta);
  app.proc_demand.assign(cfg.n, 1.0);
  for (int i = 0; i < cfg.n; ++i) {
    double map = nodes[i].is_gateway ? cfg.map_gateway : cfg.map_node;
    if (map_override > 0.0) map = map_override;
    app.map_score.push_back(map);
    app.utility.push_back(PiecewiseLinearConcave::linear(
        map / cfg.frame_bits(), nodes[i].proc_capacity + 1.0));
  }
  return Instance(std::move(nodes), std::move(links), {std::move(app)});
}

namespace {

std::filesystem::path out_path(const ExperimentConfig& cfg,
                               const std::string& name) {
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  return dir / name;
}

EpisodeConfig episode_config(const ExperimentConfig& cfg, double theta,
                             double alpha, PolicyKind policy, double f_star,
                             int max_slots) {
  EpisodeConfig e;
  e.static_cfg.theta = theta;
  e.stoch = cfg.stochastic();
  e.alpha = alpha;
  e.policy = policy;
  e.max_slots = max_slots;
  e.f_star = f_star;
  return e;
}

double mean_processed_per_slot(const EpisodeTrace& trace) {
  if (trace.lifetime_slots == 0) return 0.0;
  double total = 0.0;
  for (double v : trace.processed_bits) total += v;
  return total / trace.lifetime_slots;
}

}  // namespace

SweepResult run_sensitivity(const ExperimentConfig& cfg) {
  SweepResult result;
  const std::vector<double> radii =
      cfg.radius_grid.empty() ? std::vector<double>{cfg.radius}
                              : cfg.radius_grid;
  const std::vector<double> thetas =
      cfg.theta_grid.empty() ? std::vector<double>{cfg.theta} : cfg.theta_grid;

  struct MeanCell {
    double life = 0.0, map = 0.0;
    int count = 0;
  };
  std::vector<MeanCell> means(radii.size() * thetas.size());

  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    for (int s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed = cfg.seed0 + s;
      std::optional<Instance> instance;
      try {
        instance.emplace(make_instance(cfg, radii[ri], seed));
      } catch (const std::exception&) {
      }
      for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        SweepRow row;
        row.experiment = "sensitivity";
        row.seed = seed;
        row.radius = radii[ri];
        row.theta = thetas[ti];
        if (!instance) {
          row.status = "disconnected";
          row.lifetime = row.weighted_map = row.objective =
              std::numeric_limits<double>::quiet_NaN();
        } else {
          try {
            const StaticSolution sol =
                solve_static(*instance, {.theta = thetas[ti], .groups = {}});
            row.lifetime = sol.lifetime;
            row.weighted_map = sol.weighted_map;
            row.objective = sol.objective;
            MeanCell& m = means[ri * thetas.size() + ti];
            m.life += sol.lifetime;
            m.map += sol.weighted_map;
            m.count += 1;
          } catch (const InfeasibleError&) {
            row.status = "infeasible";
            row.lifetime = row.weighted_map = row.objective =
                std::numeric_limits<double>::quiet_NaN();
          } catch (const NumericalError&) {
            row.status = "error";
            row.lifetime = row.weighted_map = row.objective =
                std::numeric_limits<double>::quiet_NaN();
          }
        }
        result.rows.push_back(std::move(row));
      }
    }
  }
  for (std::size_t ri = 0; ri < radii.size(); ++ri)
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
      const MeanCell& m = means[ri * thetas.size() + ti];
      SweepRow row;
      row.experiment = "sensitivity-mean";
      row.seed = m.count;  // feasible-cell count for this mean
      row.radius = radii[ri];
      row.theta = thetas[ti];
      row.status = m.count ? "mean" : "empty";
      row.lifetime = m.count ? m.life / m.count
                             : std::numeric_limits<double>::quiet_NaN();
      row.weighted_map = m.count ? m.map / m.count
                                 : std::numeric_limits<double>::quiet_NaN();
      row.objective = std::numeric_limits<double>::quiet_NaN();
      result.rows.push_back(std::move(row));
    }
  return result;
}

namespace {

// Transient length: first slot whose 50-slot moving average of the
// normalized gap stays inside the +-50 band for 50 consecutive slots.
// Censored at the episode length when the band is never held.
int transient_length(const std::vector<double>& gap_norm) {
  constexpr int kWindow = 50;
  constexpr double kBand = 50.0;
  const int n = static_cast<int>(gap_norm.size());
  if (n < kWindow) return n;
  std::vector<double> ma(n, 0.0);
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    acc += gap_norm[t];
    if (t >= kWindow) acc -= gap_norm[t - kWindow];
    ma[t] = acc / std::min(t + 1, kWindow);
  }
  int run = 0;
  for (int t = kWindow - 1; t < n; ++t) {
    run = std::fabs(ma[t]) <= kBand ? run + 1 : 0;
    if (run >= kWindow) return t - kWindow + 1;
  }
  return n;
}

double least_squares_slope(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  if (n < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int t = 0; t < n; ++t) {
    sx += t;
    sy += y[t];
    sxx += double(t) * t;
    sxy += double(t) * y[t];
  }
  const double denom = n * sxx - sx * sx;
  return denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

// Steady-band gap: how far from the optimum the series settles, measured as
// the median |normalized gap| over the second half of the episode.
double steady_gap(const std::vector<double>& gap_norm) {
  const int n = static_cast<int>(gap_norm.size());
  if (n == 0) return 0.0;
  std::vector<double> tail(gap_norm.begin() + n / 2, gap_norm.end());
  for (double& v : tail) v = std::fabs(v);
  return median(tail);
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  ConvergenceResult result;
  const std::vector<double> alphas =
      cfg.alpha_grid.empty() ? std::vector<double>{cfg.alpha} : cfg.alpha_grid;

  int usable = 0;
  int series_written = 0;
  for (int k = 0; k < cfg.seeds * 20 && usable < cfg.seeds; ++k) {
    const std::uint64_t seed = cfg.seed0 + k;
    std::optional<Instance> instance;
    StaticSolution ref;
    SweepRow base;
    base.experiment = "convergence";
    base.seed = seed;
    base.radius = cfg.radius;
    base.theta = cfg.theta;
    try {
      instance.emplace(make_instance(cfg, cfg.radius, seed));
      ref = solve_static(*instance, {.theta = cfg.theta, .groups = {}});
    } catch (const InfeasibleError& e) {
      base.status = std::string(e.what()) == "disconnected topology"
                        ? "disconnected"
                        : "infeasible";
      result.sweep.rows.push_back(base);
      continue;
    } catch (const NumericalError&) {
      base.status = "error";
      result.sweep.rows.push_back(base);
      continue;
    }
    ++usable;

    // Horizon: generous multiple of the static lifetime so that even the
    // smallest step size exits its transient (it idles while congestion
    // builds, then lives a full battery beyond it).
    const int horizon =
        std::min<long>(cfg.max_slots,
                       std::isfinite(ref.lifetime)
                           ? static_cast<long>(std::ceil(4.0 * ref.lifetime))
                           : cfg.max_slots);

    for (double alpha : alphas) {
      EpisodeConfig e = episode_config(cfg, cfg.theta, alpha,
                                       PolicyKind::Mlia, ref.objective,
                                       horizon);
      const EpisodeTrace trace = run_episode(*instance, e, seed);

      ConvergenceCell cell;
      cell.seed = seed;
      cell.alpha = alpha;
      cell.lifetime_slots = trace.lifetime_slots;
      cell.max_slots = horizon;
      cell.static_lifetime = ref.lifetime;
      cell.steady_gap = steady_gap(trace.gap_norm);
      cell.transient_slots = transient_length(trace.gap_norm);
      cell.congestion_slope = least_squares_slope(trace.congestion);
      cell.diagnostics = theorem_diagnostics(*instance, e, trace);
      result.cells.push_back(cell);

      SweepRow row = base;
      row.alpha = alpha;
      row.policy = "mlia";
      row.lifetime = trace.lifetime_slots;
      row.weighted_map = 0.0;
      row.objective = cell.diagnostics.avg_gap;
      if (!cfg.out_dir.empty() && series_written < 3 * (int)alphas.size()) {
        char name[96];
        std::snprintf(name, sizeof(name), "convergence_series_s%llu_a%g.csv",
                      static_cast<unsigned long long>(seed), alpha);
        write_trace_csv(trace, "mlia", out_path(cfg, name).string());
        row.series_ref = name;
        ++series_written;
      }
      result.sweep.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

struct CalibrationRun {
  const ExperimentConfig* cfg;
  std::vector<const Instance*> instances;
  std::vector<std::uint64_t> seeds;
  std::vector<double> f_stars;
  int slots;

  double processed(PolicyKind policy, double weight) const {
    double total = 0.0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      EpisodeConfig e = episode_config(
          *cfg, policy == PolicyKind::Mlia ? weight : cfg->theta, cfg->alpha,
          policy, f_stars[i], slots);
      if (policy == PolicyKind::MinEnergy) e.min_energy_weight = weight;
      total += mean_processed_per_slot(run_episode(*instances[i], e, seeds[i]));
    }
    return total / instances.size();
  }
};

// Monotone bisection of the tradeoff weight until the mean processed volume
// is within 2% of the target.
double calibrate_weight(const CalibrationRun& runs, PolicyKind policy,
                        double target) {
  double lo = 1e-8, hi = 0.9;
  double best_w = hi, best_err = std::fabs(runs.processed(policy, hi) - target);
  if (best_err <= 0.02 * target) return hi;
  for (int it = 0; it < 24; ++it) {
    const double mid = std::exp(0.5 * (std::log(lo) + std::log(hi)));
    const double got = runs.processed(policy, mid);
    const double err = std::fabs(got - target);
    if (err < best_err) {
      best_err = err;
      best_w = mid;
    }
    if (err <= 0.02 * target) return mid;
    if (got < target)
      lo = mid;
    else
      hi = mid;
  }
  return best_w;
}

}  // namespace

ComparisonResult run_comparison(const ExperimentConfig& cfg) {
  ComparisonResult result;

  // Collect feasible instances (flat processing reward).
  std::vector<Instance> instances;
  std::vector<std::uint64_t> seeds;
  std::vector<double> f_stars;
  std::vector<double> max_processed;  // static theta=1 processed rate
  for (int k = 0; k < cfg.seeds * 20 &&
                  static_cast<int>(instances.size()) < cfg.seeds;
       ++k) {
    const std::uint64_t seed = cfg.seed0 + k;
    try {
      Instance inst = make_instance(cfg, cfg.radius, seed, cfg.compare_reward);
      const StaticSolution full =
          solve_static(inst, {.theta = 1.0, .groups = {}});
      const StaticSolution ref =
          solve_static(inst, {.theta = cfg.theta, .groups = {}});
      double processed = 0.0;
      for (double y : full.policy.y) processed += y;
      instances.push_back(std::move(inst));
      seeds.push_back(seed);
      f_stars.push_back(ref.objective);
      max_processed.push_back(processed);
    } catch (const std::exception&) {
      SweepRow row;
      row.experiment = "compare";
      row.seed = seed;
      row.radius = cfg.radius;
      row.status = "skipped";
      result.sweep.rows.push_back(row);
    }
  }
  if (instances.empty())
    throw InfeasibleError("no feasible comparison instances");

  // Calibration on the first few instances: aim both weighted policies at
  // 95% of the statically achievable processed volume, then align the
  // min-energy benchmark to what MLIA actually achieved.
  CalibrationRun cal;
  cal.cfg = &cfg;
  const int ncal = std::min<int>(3, instances.size());
  for (int i = 0; i < ncal; ++i) {
    cal.instances.push_back(&instances[i]);
    cal.seeds.push_back(seeds[i]);
    cal.f_stars.push_back(f_stars[i]);
  }
  cal.slots = std::min(cfg.max_slots, 1500);
  double target = 0.0;
  for (int i = 0; i < ncal; ++i) target += max_processed[i];
  target = 0.95 * target / ncal;

  result.theta_star = calibrate_weight(cal, PolicyKind::Mlia, target);
  const double achieved = cal.processed(PolicyKind::Mlia, result.theta_star);
  result.weight_star =
      calibrate_weight(cal, PolicyKind::MinEnergy, achieved);

  std::vector<double> ratio_me, ratio_mf;
  int series_written = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    ComparisonCell cell;
    cell.seed = seeds[i];
    EpisodeTrace traces[3];
    const PolicyKind kinds[3] = {PolicyKind::Mlia, PolicyKind::MinEnergy,
                                 PolicyKind::MaxFlow};
    // The gap reference must match the weight each policy's trace uses.
    double f_star_mlia = f_stars[i];
    try {
      f_star_mlia =
          solve_static(instances[i], {.theta = result.theta_star, .groups = {}})
              .objective;
    } catch (const std::exception&) {
    }
    for (int p = 0; p < 3; ++p) {
      const bool is_mlia = kinds[p] == PolicyKind::Mlia;
      EpisodeConfig e = episode_config(
          cfg, is_mlia ? result.theta_star : cfg.theta, cfg.alpha, kinds[p],
          is_mlia ? f_star_mlia : f_stars[i], cfg.max_slots);
      if (kinds[p] == PolicyKind::MinEnergy)
        e.min_energy_weight = result.weight_star;
      traces[p] = run_episode(instances[i], e, seeds[i]);

      SweepRow row;
      row.experiment = "compare";
      row.seed = seeds[i];
      row.radius = cfg.radius;
      row.theta = kinds[p] == PolicyKind::Mlia ? result.theta_star : cfg.theta;
      row.alpha = cfg.alpha;
      row.policy = policy_name(kinds[p]);
      row.lifetime = traces[p].lifetime_slots;
      row.objective = mean_processed_per_slot(traces[p]);
      if (!cfg.out_dir.empty() && series_written < 6) {
        char name[96];
        std::snprintf(name, sizeof(name), "compare_series_s%llu_%s.csv",
                      static_cast<unsigned long long>(seeds[i]),
                      policy_name(kinds[p]).c_str());
        write_trace_csv(traces[p], policy_name(kinds[p]),
                        out_path(cfg, name).string());
        row.series_ref = name;
        ++series_written;
      }
      result.sweep.rows.push_back(std::move(row));
    }
    cell.life_mlia = traces[0].lifetime_slots;
    cell.life_min_energy = traces[1].lifetime_slots;
    cell.life_max_flow = traces[2].lifetime_slots;
    cell.processed_mlia = mean_processed_per_slot(traces[0]);
    cell.processed_min_energy = mean_processed_per_slot(traces[1]);
    cell.processed_max_flow = mean_processed_per_slot(traces[2]);
    result.cells.push_back(cell);
    ratio_me.push_back(double(cell.life_mlia) /
                       std::max(1, cell.life_min_energy));
    ratio_mf.push_back(double(cell.life_mlia) /
                       std::max(1, cell.life_max_flow));
  }
  result.median_ratio_min_energy = median(ratio_me);
  result.median_ratio_max_flow = median(ratio_mf);
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "experiment,seed,radius,theta,alpha,policy,status,lifetime,"
         "weighted_mAP,objective,series_ref\n";
  for (const SweepRow& r : result.rows) {
    out << r.experiment << ',' << r.seed << ',' << format_double(r.radius)
        << ',' << format_double(r.theta) << ',' << format_double(r.alpha)
        << ',' << r.policy << ',' << r.status << ','
        << format_double(r.lifetime) << ',' << format_double(r.weighted_map)
        << ',' << format_double(r.objective) << ',' << r.series_ref << '\n';
  }
}

void write_trace_csv(const EpisodeTrace& trace, const std::string& policy,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "slot,policy,gap_norm,congestion,min_battery_J,active_links,"
         "processed_bits,forwarded_bits\n";
  for (int t = 0; t < trace.lifetime_slots; ++t) {
    out << (t + 1) << ',' << policy << ',' << format_double(trace.gap_norm[t])
        << ',' << format_double(trace.congestion[t]) << ','
        << format_double(trace.min_battery[t]) << ',' << trace.active_links[t]
        << ',' << format_double(trace.processed_bits[t]) << ','
        << format_double(trace.forwarded_bits[t]) << '\n';
  }
}

void write_manifest(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  out << "version = 0.1.0\n";
  out << "config_hash = " << hash << "\n";
  out << "--- config ---\n" << dump_config(cfg);
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Mlia: return "mlia";
    case PolicyKind::MinEnergy: return "min-energy";
    case PolicyKind::MaxFlow: return "max-flow";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "mlia") return PolicyKind::Mlia;
  if (name == "min-energy") return PolicyKind::MinEnergy;
  if (name == "max-flow") return PolicyKind::MaxFlow;
  throw ConfigError("unknown policy '" + name +
                    "' (expected mlia|min-energy|max-flow)");
}

}  // namespace netlife
