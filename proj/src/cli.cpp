#include "fleetroll/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fleetroll/demand.hpp"
#include "fleetroll/error.hpp"
#include "fleetroll/experiment.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/partition.hpp"
#include "fleetroll/policies.hpp"
#include "fleetroll/stability.hpp"
#include "fleetroll/stats.hpp"

namespace fleetroll {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string config;
  std::string graph;
  std::string coords;
  std::string trips;
  int grid = 0;
  double eta = 0.4;
  std::string policy = "ia-ra";
  std::vector<std::string> policies;
  int m = 3;
  std::vector<int> m_sweep;
  int T = 50;
  int m_lim = 10;
  int t_h = 10;
  int num_mc = 50;
  std::string base_policy = "ia-ra";
  int seeds = 20;
  std::uint64_t seed = 1;
  std::string out;
  int jobs = 1;
  int window = 0;
  std::string metric = "graph";
  bool verify = false;
};

// Fills fields from the JSON config wherever the matching flag was not given.
class ConfigMerge {
 public:
  ConfigMerge(const ordered_json& j) : j_(j) {}

  template <class T>
  void apply(const char* key, const CLI::Option* opt, T& field) {
    if (opt && opt->count() > 0) return;
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, std::string("config key '") + key + "': " + e.what());
    }
  }

 private:
  const ordered_json& j_;
};

struct Inputs {
  std::optional<CityGraph> graph;
  std::optional<DemandModel> model;
};

Inputs load_inputs(const Options& o, bool need_model = true) {
  Inputs in;
  if (!o.graph.empty() && o.grid > 0) throw Error(ErrorCode::InvalidArgument, "give either --graph or --grid, not both");
  GraphSpec spec;
  if (!o.graph.empty()) {
    spec = load_edge_list(o.graph);
    std::string xy = o.coords;
    if (xy.empty() && fs::exists(o.graph + ".xy")) xy = o.graph + ".xy";
    if (!xy.empty()) {
      std::ifstream f(xy);
      if (!f) throw Error(ErrorCode::Io, "cannot open coordinates file '" + xy + "'");
      spec.coordinates = read_coordinates(f, spec.node_count);
    }
  } else {
    spec = grid_spec(o.grid > 0 ? o.grid : 5);
  }
  in.graph = CityGraph::build(spec);
  if (!need_model) return in;
  if (!o.trips.empty()) {
    in.model = estimate_from_trips(load_trip_csv(o.trips), *in.graph);
  } else {
    if (!in.graph->has_coordinates())
      throw Error(ErrorCode::MissingCoordinates,
                  "synthetic demand needs node coordinates; pass --coords or a trip log with --trips");
    SyntheticDemand params;
    params.arrival_rate = o.eta;
    in.model = synthetic_model(*in.graph, params);
  }
  return in;
}

PolicySettings policy_settings(const Options& o) {
  PolicySettings s;
  s.rollout.horizon = o.t_h;
  s.rollout.num_mc = o.num_mc;
  auto kind = parse_policy_kind(o.base_policy);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown base policy '" + o.base_policy + "'");
  s.rollout.base_policy = *kind;
  s.m_lim = o.m_lim;
  validate(s.rollout);
  if (o.m_lim < 1) throw Error(ErrorCode::InvalidArgument, "--m-lim must be >= 1");
  return s;
}

std::vector<int> fleet_sizes(const Options& o) {
  std::vector<int> ms = o.m_sweep.empty() ? std::vector<int>{o.m} : o.m_sweep;
  for (int m : ms)
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "fleet sizes must be >= 1");
  return ms;
}

void check_common(const Options& o) {
  if (o.T < 1) throw Error(ErrorCode::InvalidArgument, "--T must be >= 1");
  if (o.seeds < 1) throw Error(ErrorCode::InvalidArgument, "--seeds must be >= 1");
  if (o.jobs < 1) throw Error(ErrorCode::InvalidArgument, "--jobs must be >= 1");
}

fs::path out_dir(const Options& o) {
  fs::path dir = o.out.empty() ? fs::path("fleetroll_out") : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
  f << std::setprecision(12);
  return f;
}

std::vector<RunSpec> make_specs(const std::vector<std::string>& policies, const std::vector<int>& ms, const Options& o) {
  std::vector<RunSpec> specs;
  for (const auto& p : policies)
    for (int m : ms)
      for (int i = 0; i < o.seeds; ++i) specs.push_back({p, m, o.T, i, episode_seed(o.seed, i)});
  return specs;
}

std::string run_tag(const RunSpec& s) {
  return s.policy + "_m" + std::to_string(s.m) + "_s" + std::to_string(s.seed_index + 1);
}

void write_run_files(const fs::path& dir, const RunSpec& spec, const RunResult& r) {
  {
    auto f = open_out(dir / ("trace_" + run_tag(spec) + ".csv"));
    write_trace_csv(f, r.trace);
  }
  {
    ordered_json j;
    j["policy"] = spec.policy;
    j["m"] = spec.m;
    j["T"] = spec.horizon;
    j["seed_index"] = spec.seed_index + 1;
    j["seed"] = spec.seed;
    j["cost"] = r.trace.cost;
    j["Z"] = r.trace.service_distance;
    j["unassigned_requests"] = r.trace.unassigned_requests;
    auto f = open_out(dir / ("run_" + run_tag(spec) + ".json"));
    f << j.dump(2) << '\n';
  }
  {
    auto f = open_out(dir / ("timing_" + run_tag(spec) + ".csv"));
    f << "t,plan_ms\n";
    for (const StepRecord& s : r.trace.steps)
      if (s.t < r.trace.horizon) f << s.t << ',' << s.plan_ms << '\n';
  }
  if (!r.sector_timings.empty()) {
    auto f = open_out(dir / ("timing_sectors_" + run_tag(spec) + ".csv"));
    write_sector_timing_csv(f, r.sector_timings);
  }
}

struct Group {
  std::vector<double> cost, z, unassigned, runtime;
};

std::map<std::pair<std::string, int>, Group> group_results(const std::vector<RunSpec>& specs,
                                                           const std::vector<RunResult>& results) {
  std::map<std::pair<std::string, int>, Group> g;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& grp = g[{specs[i].policy, specs[i].m}];
    grp.cost.push_back(static_cast<double>(results[i].trace.cost));
    grp.z.push_back(results[i].trace.service_distance);
    grp.unassigned.push_back(results[i].trace.unassigned_requests);
    grp.runtime.push_back(results[i].trace.mean_plan_ms());
  }
  return g;
}

double stdev(const std::vector<double>& x) { return std::sqrt(sample_variance(x)); }

int cmd_simulate(const Options& o) {
  check_common(o);
  const Inputs in = load_inputs(o);
  const PolicySettings settings = policy_settings(o);
  const std::vector<std::string> policies = o.policies.empty() ? std::vector<std::string>{o.policy} : o.policies;
  const auto specs = make_specs(policies, fleet_sizes(o), o);
  const auto results = run_batch(*in.graph, *in.model, specs, settings, o.jobs);
  const fs::path dir = out_dir(o);
  for (std::size_t i = 0; i < specs.size(); ++i) write_run_files(dir, specs[i], results[i]);

  // Groups in first-appearance order.
  std::vector<std::pair<std::string, int>> order;
  for (const auto& s : specs)
    if (order.empty() || order.back() != std::make_pair(s.policy, s.m)) order.emplace_back(s.policy, s.m);
  const auto groups = group_results(specs, results);
  auto summary = open_out(dir / "summary.csv");
  auto timing = open_out(dir / "summary_timing.csv");
  summary << "policy,m,T,seeds,cost_mean,cost_std,Z_mean,Z_std,unassigned_mean\n";
  timing << "policy,m,runtime_ms_per_step_mean,runtime_ms_per_step_std\n";
  std::cout << std::left << std::setw(12) << "policy" << std::setw(6) << "m" << std::setw(22) << "cost (mean+-std)"
            << "Z (mean+-std)\n";
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    summary << key.first << ',' << key.second << ',' << o.T << ',' << g.cost.size() << ',' << mean(g.cost) << ','
            << stdev(g.cost) << ',' << mean(g.z) << ',' << stdev(g.z) << ',' << mean(g.unassigned) << '\n';
    timing << key.first << ',' << key.second << ',' << mean(g.runtime) << ',' << stdev(g.runtime) << '\n';
    std::ostringstream c, z;
    c << std::fixed << std::setprecision(2) << mean(g.cost) << "+-" << stdev(g.cost);
    z << std::fixed << std::setprecision(2) << mean(g.z) << "+-" << stdev(g.z);
    std::cout << std::left << std::setw(12) << key.first << std::setw(6) << key.second << std::setw(22) << c.str()
              << z.str() << '\n';
  }
  return 0;
}

int cmd_compare(const Options& o) {
  check_common(o);
  if (o.policies.size() < 2) throw Error(ErrorCode::InvalidArgument, "compare needs at least two --policies");
  if (o.seeds < 2) throw Error(ErrorCode::InvalidArgument, "compare needs at least two seeds");
  const Inputs in = load_inputs(o);
  const PolicySettings settings = policy_settings(o);
  const auto ms = fleet_sizes(o);
  const auto specs = make_specs(o.policies, ms, o);
  const auto results = run_batch(*in.graph, *in.model, specs, settings, o.jobs);
  const auto groups = group_results(specs, results);
  const fs::path dir = out_dir(o);

  auto runs = open_out(dir / "compare_runs.csv");
  runs << "policy,m,seed_index,cost,Z\n";
  for (std::size_t i = 0; i < specs.size(); ++i)
    runs << specs[i].policy << ',' << specs[i].m << ',' << specs[i].seed_index + 1 << ',' << results[i].trace.cost
         << ',' << results[i].trace.service_distance << '\n';

  auto table = open_out(dir / "compare.csv");
  auto timing = open_out(dir / "compare_timing.csv");
  table << "policy,baseline,m,pairs,cost_mean,baseline_cost_mean,relative_cost,diff_mean,diff_se,t,p_less\n";
  timing << "policy,baseline,m,runtime_ms_mean,baseline_runtime_ms_mean,relative_runtime\n";
  const std::string& base = o.policies.front();
  std::cout << std::left << std::setw(12) << "policy" << std::setw(6) << "m" << std::setw(12) << "cost" << std::setw(12)
            << "vs " + base << "p(less)\n";
  for (int m : ms) {
    const Group& b = groups.at({base, m});
    for (std::size_t p = 1; p < o.policies.size(); ++p) {
      const Group& g = groups.at({o.policies[p], m});
      const PairedTest t = paired_t_test(g.cost, b.cost);
      const double rel = mean(b.cost) > 0 ? mean(g.cost) / mean(b.cost) : 1.0;
      table << o.policies[p] << ',' << base << ',' << m << ',' << g.cost.size() << ',' << mean(g.cost) << ','
            << mean(b.cost) << ',' << rel << ',' << t.mean_diff << ',' << t.std_error << ',' << t.t << ',' << t.p_less
            << '\n';
      const double rrt = mean(b.runtime) > 0 ? mean(g.runtime) / mean(b.runtime) : 1.0;
      timing << o.policies[p] << ',' << base << ',' << m << ',' << mean(g.runtime) << ',' << mean(b.runtime) << ','
             << rrt << '\n';
      std::cout << std::left << std::setw(12) << o.policies[p] << std::setw(6) << m << std::setw(12) << mean(g.cost)
                << std::setw(12) << rel << t.p_less << '\n';
    }
  }
  return 0;
}

int cmd_stability(const Options& o) {
  check_common(o);
  const Inputs in = load_inputs(o);
  const auto metric = parse_metric(o.metric);
  if (!metric) throw Error(ErrorCode::InvalidArgument, "--metric must be 'graph' or 'euclidean'");
  const StabilityReport report = compute_bounds(*in.model, *in.graph, *metric);
  const fs::path dir = out_dir(o);
  {
    auto f = open_out(dir / "report.json");
    f << stability_report_json(report) << '\n';
  }
  std::cout << stability_report_table(report);
  if (!o.verify) return 0;

  std::vector<int> ms = o.m_sweep;
  if (ms.empty()) {
    const int low = std::max(1, static_cast<int>(std::floor(0.5 * report.instability_threshold)));
    ms = {low, std::max(1, report.m_sufficient)};
  }
  const std::vector<std::string> policies = o.policies.empty() ? std::vector<std::string>{o.policy} : o.policies;
  const int window = o.window > 0 ? o.window : o.T / 2;
  const auto specs = make_specs(policies, ms, o);
  EpisodeOptions eo;
  eo.keep_controls = false;
  const auto results = run_batch(*in.graph, *in.model, specs, policy_settings(o), o.jobs, eo);
  auto f = open_out(dir / "verdicts.csv");
  f << "policy,m,traces,window,first_window_mean,last_window_mean,pooled_se,slope,slope_p,verdict\n";
  std::cout << '\n' << std::left << std::setw(12) << "policy" << std::setw(6) << "m" << "verdict\n";
  for (std::size_t begin = 0; begin < specs.size(); begin += static_cast<std::size_t>(o.seeds)) {
    std::vector<EpisodeTrace> traces;
    for (std::size_t i = begin; i < begin + static_cast<std::size_t>(o.seeds); ++i) traces.push_back(results[i].trace);
    const StabilityVerdict v = empirical_stability(traces, window);
    f << specs[begin].policy << ',' << specs[begin].m << ',' << v.traces << ',' << v.window << ','
      << v.first_window_mean << ',' << v.last_window_mean << ',' << v.pooled_std_error << ',' << v.slope << ','
      << v.slope_p << ',' << to_string(v.verdict) << '\n';
    std::cout << std::left << std::setw(12) << specs[begin].policy << std::setw(6) << specs[begin].m
              << to_string(v.verdict) << '\n';
  }
  return 0;
}

int cmd_gen_graph(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "gen-graph needs --out <file>");
  const Inputs in = load_inputs(o, false);
  const GraphSpec spec = in.graph->spec();
  {
    auto f = open_out(o.out);
    write_edge_list(f, spec);
  }
  if (!spec.coordinates.empty()) {
    auto f = open_out(o.out + ".xy");
    write_coordinates(f, spec.coordinates);
  }
  return 0;
}

int cmd_gen_trips(const Options& o) {
  if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "gen-trips needs --out <file>");
  if (o.T < 1) throw Error(ErrorCode::InvalidArgument, "--T must be >= 1");
  const Inputs in = load_inputs(o);
  auto f = open_out(o.out);
  write_trip_csv(f, generate_trips(*in.model, o.T, o.seed));
  return 0;
}

int cmd_partition(const Options& o) {
  const Inputs in = load_inputs(o);
  const PartitionSpec spec = get_partitions(*in.graph, *in.model, o.m_lim, sector_count(o.m, o.m_lim));
  if (o.out.empty()) {
    write_partition_csv(std::cout, spec);
  } else {
    auto f = open_out(o.out);
    write_partition_csv(f, spec);
  }
  return 0;
}

void add_model_options(CLI::App* sub, Options& o, std::map<std::string, CLI::Option*>& opts) {
  opts["config"] = sub->add_option("--config", o.config, "JSON config; flags override its keys");
  opts["graph"] = sub->add_option("--graph", o.graph, "edge-list file (1-based node ids)");
  opts["coords"] = sub->add_option("--coords", o.coords, "node coordinates file (default <graph>.xy if present)");
  opts["grid"] = sub->add_option("--grid", o.grid, "use a k x k grid instead of --graph (default 5)");
  opts["trips"] = sub->add_option("--trips", o.trips, "trip log CSV t,pickup,dropoff to estimate demand from");
  opts["eta"] = sub->add_option("--eta", o.eta, "mean arrivals per step of the synthetic model");
  opts["seed"] = sub->add_option("--seed", o.seed, "master seed");
  opts["out"] = sub->add_option("--out", o.out, "output directory or file");
}

void add_run_options(CLI::App* sub, Options& o, std::map<std::string, CLI::Option*>& opts) {
  opts["policy"] = sub->add_option("--policy", o.policy, "greedy|random-ia|ia-commit|ia-ra|rollout|two-phase");
  opts["policies"] = sub->add_option("--policies", o.policies, "comma-separated policy list")->delimiter(',');
  opts["m"] = sub->add_option("--m", o.m, "fleet size");
  opts["m_sweep"] = sub->add_option("--m-sweep", o.m_sweep, "comma-separated fleet sizes")->delimiter(',');
  opts["T"] = sub->add_option("--T", o.T, "episode horizon (steps)");
  opts["m_lim"] = sub->add_option("--m-lim", o.m_lim, "taxis per sector for two-phase");
  opts["t_h"] = sub->add_option("--t-h", o.t_h, "lookahead horizon");
  opts["num_mc"] = sub->add_option("--num-mc", o.num_mc, "Monte-Carlo scenarios per candidate");
  opts["base_policy"] = sub->add_option("--base-policy", o.base_policy, "rollout base policy");
  opts["seeds"] = sub->add_option("--seeds", o.seeds, "number of seeds");
  opts["jobs"] = sub->add_option("--jobs", o.jobs, "parallel runs (default $FLEETROLL_JOBS or 1)");
}

void merge_config(Options& o, std::map<std::string, CLI::Option*>& opts) {
  if (o.config.empty()) return;
  std::ifstream f(o.config);
  if (!f) throw Error(ErrorCode::Io, "cannot open config '" + o.config + "'");
  ordered_json j;
  try {
    j = ordered_json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "config '" + o.config + "': " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  ConfigMerge c(j);
  auto opt = [&](const char* k) -> const CLI::Option* {
    auto it = opts.find(k);
    return it == opts.end() ? nullptr : it->second;
  };
  c.apply("graph", opt("graph"), o.graph);
  c.apply("coords", opt("coords"), o.coords);
  c.apply("grid", opt("grid"), o.grid);
  c.apply("trips", opt("trips"), o.trips);
  c.apply("eta", opt("eta"), o.eta);
  c.apply("seed", opt("seed"), o.seed);
  c.apply("out", opt("out"), o.out);
  c.apply("policy", opt("policy"), o.policy);
  c.apply("policies", opt("policies"), o.policies);
  c.apply("m", opt("m"), o.m);
  c.apply("m_sweep", opt("m_sweep"), o.m_sweep);
  c.apply("T", opt("T"), o.T);
  c.apply("m_lim", opt("m_lim"), o.m_lim);
  c.apply("t_h", opt("t_h"), o.t_h);
  c.apply("num_mc", opt("num_mc"), o.num_mc);
  c.apply("base_policy", opt("base_policy"), o.base_policy);
  c.apply("seeds", opt("seeds"), o.seeds);
  c.apply("jobs", opt("jobs"), o.jobs);
  c.apply("window", opt("window"), o.window);
  c.apply("metric", opt("metric"), o.metric);
  c.apply("verify", opt("verify"), o.verify);
}

}  // namespace

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Taxi fleet routing simulator and planners"};
  app.require_subcommand(1);
  Options o;
  if (const char* env = std::getenv("FLEETROLL_JOBS")) {
    try {
      o.jobs = std::stoi(env);
    } catch (const std::exception&) {
      std::cerr << "error: FLEETROLL_JOBS must be an integer\n";
      return 2;
    }
  }
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;

  auto* simulate = app.add_subcommand("simulate", "run policies over seeds and fleet sizes");
  add_model_options(simulate, o, opts["simulate"]);
  add_run_options(simulate, o, opts["simulate"]);

  auto* compare = app.add_subcommand("compare", "paired comparison of two or more policies");
  add_model_options(compare, o, opts["compare"]);
  add_run_options(compare, o, opts["compare"]);

  auto* stability = app.add_subcommand("stability", "fleet-size bounds and empirical verdicts");
  add_model_options(stability, o, opts["stability"]);
  add_run_options(stability, o, opts["stability"]);
  opts["stability"]["verify"] = stability->add_flag("--verify", o.verify, "simulate and report verdicts per m");
  opts["stability"]["window"] = stability->add_option("--window", o.window, "verdict window (default T/2)");
  opts["stability"]["metric"] = stability->add_option("--metric", o.metric, "graph|euclidean");

  auto* gen_graph = app.add_subcommand("gen-graph", "write a grid graph edge list and coordinates");
  add_model_options(gen_graph, o, opts["gen-graph"]);

  auto* gen_trips = app.add_subcommand("gen-trips", "sample a trip log from the demand model");
  add_model_options(gen_trips, o, opts["gen-trips"]);
  opts["gen-trips"]["T"] = gen_trips->add_option("--T", o.T, "steps to sample");

  auto* partition = app.add_subcommand("partition", "dump the demand-aware partition as CSV");
  add_model_options(partition, o, opts["partition"]);
  opts["partition"]["m"] = partition->add_option("--m", o.m, "fleet size");
  opts["partition"]["m_lim"] = partition->add_option("--m-lim", o.m_lim, "taxis per sector");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      merge_config(o, opts[sub->get_name()]);
      const std::string name = sub->get_name();
      if (name == "simulate") return cmd_simulate(o);
      if (name == "compare") return cmd_compare(o);
      if (name == "stability") return cmd_stability(o);
      if (name == "gen-graph") return cmd_gen_graph(o);
      if (name == "gen-trips") return cmd_gen_trips(o);
      if (name == "partition") return cmd_partition(o);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace fleetroll
