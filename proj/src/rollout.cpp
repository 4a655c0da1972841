#include "fleetroll/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "fleetroll/error.hpp"
#include "fleetroll/rng.hpp"

namespace fleetroll {

namespace {

constexpr RequestId kLookaheadIdBase = RequestId{1} << 40;

void admit_inbound(FleetState& state, std::span<const InboundTaxi> inbound, int offset) {
  for (const InboundTaxi& in : inbound)
    if (in.offset == offset) state.add_taxi(in.node);
}

}  // namespace

std::uint64_t lookahead_seed(std::uint64_t episode_seed, std::uint64_t cfg_seed) {
  return derive_seed(episode_seed, {static_cast<std::uint64_t>(Stream::Lookahead), cfg_seed});
}

void validate(const RolloutConfig& cfg) {
  if (cfg.horizon < 1) throw Error(ErrorCode::InvalidArgument, "lookahead horizon t_h must be >= 1");
  if (cfg.num_mc < 1) throw Error(ErrorCode::InvalidArgument, "Monte-Carlo scenario count must be >= 1");
}

LocalProblem LocalProblem::whole(const FleetState& state) {
  LocalProblem p;
  p.state = state;
  p.taxi_ids.resize(static_cast<std::size_t>(state.fleet_size()));
  for (TaxiId l = 0; l < state.fleet_size(); ++l) p.taxi_ids[static_cast<std::size_t>(l)] = l;
  return p;
}

std::vector<Scenario> sample_scenarios(const DemandModel& model, const LocalProblem& problem, const RolloutConfig& cfg,
                                       std::uint64_t key) {
  std::vector<Scenario> out(static_cast<std::size_t>(cfg.num_mc));
  const int t = problem.state.clock;
  for (int s = 0; s < cfg.num_mc; ++s) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(t), key, static_cast<std::uint64_t>(s)}));
    auto& batches = out[static_cast<std::size_t>(s)].arrivals;
    batches.resize(static_cast<std::size_t>(cfg.horizon) + 1);
    RequestId next = kLookaheadIdBase;
    for (int k = 0; k <= cfg.horizon; ++k) {
      const int count = sample_arrivals(model, rng);
      for (int i = 0; i < count; ++i) {
        Request r = sample_request(model, t + 1 + k, rng, next++);
        if (problem.in_region(r.pickup)) batches[static_cast<std::size_t>(k)].push_back(r);
      }
    }
  }
  return out;
}

LookaheadEstimate evaluate_candidate(const LocalProblem& problem, const Control& joint, const CityGraph& graph,
                                     std::span<const Scenario> scenarios, const RolloutConfig& cfg) {
  LookaheadEstimate est;
  est.scenario_costs.reserve(scenarios.size());
  std::unique_ptr<Policy> base;
  const bool stateless = cfg.base_policy == PolicyKind::IARA || cfg.base_policy == PolicyKind::Greedy;
  if (stateless) base = make_base_policy(cfg.base_policy, graph);

  double total = 0.0;
  FleetState x;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& batches = scenarios[s].arrivals;
    if (!stateless) {
      base = make_base_policy(cfg.base_policy, graph, derive_seed(cfg.seed, {0x5eedULL, s}));
      base->begin_episode({derive_seed(cfg.seed, {0x5eedULL, s}), problem.state.fleet_size(), cfg.horizon + 1});
    }
    x = problem.state;
    double cost = stage_cost(x);
    apply_transition(x, joint, batches[0], graph, nullptr, false);
    admit_inbound(x, problem.inbound, 1);
    for (int k = 1; k <= cfg.horizon; ++k) {
      cost += stage_cost(x);
      const Control u = base->decide(x);
      apply_transition(x, u, batches[static_cast<std::size_t>(k)], graph, nullptr, false);
      admit_inbound(x, problem.inbound, k + 1);
    }
    cost += stage_cost(x);
    est.scenario_costs.push_back(cost);
    total += cost;
  }
  est.mean = scenarios.empty() ? 0.0 : total / static_cast<double>(scenarios.size());
  return est;
}

LookaheadEstimate evaluate_candidate(const FleetState& state, const Control& joint, const CityGraph& graph,
                                     const DemandModel& model, const RolloutConfig& cfg) {
  validate(cfg);
  const LocalProblem problem = LocalProblem::whole(state);
  const auto scenarios = sample_scenarios(model, problem, cfg, ~std::uint64_t{0});
  return evaluate_candidate(problem, joint, graph, scenarios, cfg);
}

std::vector<TaxiControl> candidate_controls(const LocalProblem& problem, TaxiId l, const CityGraph& graph,
                                            std::span<const RequestId> claimed) {
  const FleetState& x = problem.state;
  std::vector<TaxiControl> out;
  if (!x.is_free(l)) {
    out.push_back(forced_control(x, l, graph));
    return out;
  }
  const NodeId at = x.location[static_cast<std::size_t>(l)];
  for (const Request& r : x.outstanding)
    if (r.pickup == at && std::find(claimed.begin(), claimed.end(), r.id) == claimed.end())
      out.push_back(TaxiControl::pickup(r.id));
  out.push_back(TaxiControl::stay());
  for (NodeId n : graph.neighbors(at))
    if (problem.in_region(n)) out.push_back(TaxiControl::move_to(n));
  return out;
}

Control one_at_a_time_control(const LocalProblem& problem, const CityGraph& graph, const DemandModel& model,
                              const RolloutConfig& cfg, RolloutRecord* record) {
  validate(cfg);
  const FleetState& x = problem.state;
  const auto m = static_cast<std::size_t>(x.fleet_size());

  Control base = make_base_policy(cfg.base_policy, graph, derive_seed(cfg.seed, {0xba5eULL}))->decide(x);
  if (base.size() != m) throw Error(ErrorCode::IllegalControl, "base policy returned a control of the wrong size");
  Control chosen = base;
  if (record) record->base = base;

  std::vector<RequestId> claimed;
  for (std::size_t l = 0; l < m; ++l) {
    const auto taxi = static_cast<TaxiId>(l);
    if (!x.is_free(taxi)) {
      chosen[l] = forced_control(x, taxi, graph);
      continue;
    }
    const auto candidates = candidate_controls(problem, taxi, graph, claimed);
    std::size_t best = 0;
    if (candidates.size() > 1) {
      // Common random numbers: every candidate of this taxi sees the same scenarios.
      const auto scenarios = sample_scenarios(model, problem, cfg, static_cast<std::uint64_t>(problem.taxi_ids[l]));
      double best_total = 0.0;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        Control joint = chosen;  // earlier entries already hold rollout choices, later ones the base controls
        joint[l] = candidates[c];
        for (std::size_t j = l + 1; j < m; ++j) joint[j] = base[j];
        resolve_pickup_conflicts(joint);
        const LookaheadEstimate est = evaluate_candidate(problem, joint, graph, scenarios, cfg);
        double total = 0.0;
        for (double v : est.scenario_costs) total += v;
        if (record) record->evaluations.push_back({taxi, candidates[c], joint, est.mean});
        if (c == 0 || total < best_total) {
          best = c;
          best_total = total;
        }
      }
    }
    chosen[l] = candidates[best];
    if (chosen[l].action == Action::Pickup) claimed.push_back(chosen[l].request);
  }
  if (record) record->chosen = chosen;
  return chosen;
}

Control one_at_a_time_control(const FleetState& state, const CityGraph& graph, const DemandModel& model,
                              const RolloutConfig& cfg, RolloutRecord* record) {
  return one_at_a_time_control(LocalProblem::whole(state), graph, model, cfg, record);
}

RolloutPolicy::RolloutPolicy(const CityGraph& graph, const DemandModel& model, RolloutConfig cfg)
    : graph_(&graph), model_(&model), base_cfg_(cfg), cfg_(cfg) {
  validate(cfg);
}

void RolloutPolicy::begin_episode(const EpisodeContext& ctx) {
  cfg_ = base_cfg_;
  cfg_.seed = lookahead_seed(ctx.seed, base_cfg_.seed);
}

Control RolloutPolicy::decide(const FleetState& state) {
  return one_at_a_time_control(state, *graph_, *model_, cfg_);
}

CostSummary rollout_policy_cost(const CityGraph& graph, const DemandModel& model, TaxiId fleet_size, int horizon,
                                const RolloutConfig& cfg, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "at least one seed is required");
  CostSummary out;
  RolloutPolicy policy(graph, model, cfg);
  EpisodeOptions opts;
  opts.keep_controls = false;
  for (std::uint64_t seed : seeds)
    out.costs.push_back(static_cast<double>(run_episode(graph, model, policy, fleet_size, horizon, seed, opts).cost));
  double sum = 0.0;
  for (double c : out.costs) sum += c;
  out.mean = sum / static_cast<double>(out.costs.size());
  if (out.costs.size() > 1) {
    double ss = 0.0;
    for (double c : out.costs) ss += (c - out.mean) * (c - out.mean);
    out.std_error = std::sqrt(ss / static_cast<double>(out.costs.size() - 1) / static_cast<double>(out.costs.size()));
  }
  return out;
}

}  // namespace fleetroll
