#include "fleetroll/planner.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <ostream>
#include <string>
#include <thread>

#include "fleetroll/error.hpp"
#include "fleetroll/policies.hpp"
#include "fleetroll/rng.hpp"

namespace fleetroll {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const Transit* HighLevelPlan::find(TaxiId l) const {
  auto it = std::lower_bound(transit.begin(), transit.end(), l, [](const Transit& a, TaxiId b) { return a.taxi < b; });
  return it != transit.end() && it->taxi == l ? &*it : nullptr;
}

HighLevelPlan high_level_plan(const FleetState& state, const CityGraph& graph, const DemandModel& model, int t_h,
                              const HighLevelPlan& prev, std::uint64_t seed) {
  HighLevelPlan plan;
  for (const Transit& tr : prev.transit)
    if (tr.remaining(state.clock) > 0) plan.transit.push_back(tr);

  std::vector<TaxiId> free;
  for (TaxiId l = 0; l < state.fleet_size(); ++l)
    if (state.is_free(l) && !plan.in_transit(l)) free.push_back(l);
  if (free.empty()) return plan;

  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(state.clock)}));
  const RequestId ce_base = state.outstanding.empty() ? 0 : state.outstanding.back().id + 1;
  const auto ce = certainty_equivalence_requests(model, state.clock, t_h, rng, ce_base);
  std::vector<const Request*> pool;
  pool.reserve(state.outstanding.size() + ce.size());
  for (const Request& r : state.outstanding) pool.push_back(&r);
  for (const Request& r : ce) pool.push_back(&r);
  if (pool.empty()) return plan;

  for (auto [l, idx] : match_taxis(state, free, pool, graph)) {
    const NodeId at = state.location[static_cast<std::size_t>(l)];
    const NodeId rho = pool[idx]->pickup;
    if (graph.sector(at) == graph.sector(rho)) continue;
    Transit tr;
    tr.taxi = l;
    tr.d_hat = graph.next_hop_in_partition(at, rho);
    tr.path = graph.shortest_path(at, tr.d_hat);
    tr.start_clock = state.clock;
    plan.transit.push_back(std::move(tr));
  }
  std::sort(plan.transit.begin(), plan.transit.end(), [](const Transit& a, const Transit& b) { return a.taxi < b.taxi; });
  return plan;
}

LocalProblem sector_problem(const FleetState& state, const CityGraph& graph, const HighLevelPlan& plan, int k,
                            std::vector<char>& region_storage) {
  region_storage.assign(static_cast<std::size_t>(graph.node_count()), 0);
  for (NodeId v = 0; v < graph.node_count(); ++v)
    if (graph.sector(v) == k) region_storage[static_cast<std::size_t>(v)] = 1;

  LocalProblem p;
  p.region = &region_storage;
  p.state.clock = state.clock;
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    if (plan.in_transit(l) || graph.sector(state.location[i]) != k) continue;
    p.taxi_ids.push_back(l);
    p.state.location.push_back(state.location[i]);
    p.state.trip_timer.push_back(state.trip_timer[i]);
    p.state.destination.push_back(state.destination[i]);
    p.state.serving.push_back(state.serving[i]);
  }
  for (const Request& r : state.outstanding)
    if (graph.sector(r.pickup) == k) p.state.outstanding.push_back(r);
  for (const Transit& tr : plan.transit)
    if (graph.sector(tr.d_hat) == k) p.inbound.push_back({tr.remaining(state.clock), tr.d_hat, tr.taxi});
  return p;
}

std::vector<std::pair<TaxiId, TaxiControl>> low_level_plan(const FleetState& state, const CityGraph& graph,
                                                           const DemandModel& model, const HighLevelPlan& plan, int k,
                                                           const RolloutConfig& cfg) {
  std::vector<char> region;
  const LocalProblem problem = sector_problem(state, graph, plan, k, region);
  std::vector<std::pair<TaxiId, TaxiControl>> out;
  if (problem.taxi_ids.empty()) return out;
  const Control local = one_at_a_time_control(problem, graph, model, cfg);
  for (std::size_t i = 0; i < local.size(); ++i) out.emplace_back(problem.taxi_ids[i], local[i]);
  return out;
}

TwoPhaseStep two_phase_control(const FleetState& state, const CityGraph& graph, const DemandModel& model,
                               const RolloutConfig& cfg, const HighLevelPlan& prev, std::uint64_t seed, bool parallel) {
  if (!graph.has_sectors()) throw Error(ErrorCode::SectorsUnassigned, "two-phase control needs a partitioned graph");
  TwoPhaseStep step;
  auto start = std::chrono::steady_clock::now();
  step.plan = high_level_plan(state, graph, model, cfg.horizon, prev, seed);
  step.high_level_ms = ms_since(start);

  const int K = graph.sector_count();
  std::vector<std::vector<std::pair<TaxiId, TaxiControl>>> parts(static_cast<std::size_t>(K));
  step.sector_ms.assign(static_cast<std::size_t>(K), 0.0);
  auto run_sector = [&](int k) {
    const auto t0 = std::chrono::steady_clock::now();
    parts[static_cast<std::size_t>(k)] = low_level_plan(state, graph, model, step.plan, k, cfg);
    step.sector_ms[static_cast<std::size_t>(k)] = ms_since(t0);
  };
  if (parallel && K > 1) {
    std::vector<std::future<void>> jobs;
    for (int k = 0; k < K; ++k) jobs.push_back(std::async(std::launch::async, run_sector, k));
    for (auto& j : jobs) j.get();
  } else {
    for (int k = 0; k < K; ++k) run_sector(k);
  }

  const auto m = static_cast<std::size_t>(state.fleet_size());
  step.control.assign(m, TaxiControl::stay());
  std::vector<char> set(m, 0);
  for (const Transit& tr : step.plan.transit) {
    step.control[static_cast<std::size_t>(tr.taxi)] = TaxiControl::move_to(tr.hop_at(state.clock));
    set[static_cast<std::size_t>(tr.taxi)] = 1;
  }
  for (const auto& part : parts)
    for (const auto& [l, u] : part) {
      const auto i = static_cast<std::size_t>(l);
      if (set[i])
        throw Error(ErrorCode::ConflictingControl, "taxi " + std::to_string(l + 1) + " received two controls");
      step.control[i] = u;
      set[i] = 1;
    }
  for (std::size_t i = 0; i < m; ++i)
    if (!set[i]) throw Error(ErrorCode::ConflictingControl, "taxi " + std::to_string(i + 1) + " received no control");
  return step;
}

TwoPhasePolicy::TwoPhasePolicy(const CityGraph& graph, const DemandModel& model, TaxiId m, int m_lim,
                               RolloutConfig cfg)
    : graph_(graph), model_(&model), base_cfg_(cfg), cfg_(cfg), parallel_(std::thread::hardware_concurrency() > 1) {
  validate(cfg);
  partition_ = get_partitions(graph, model, m_lim, sector_count(m, m_lim));
  graph_ = graph.with_sectors(partition_.assignment);
}

void TwoPhasePolicy::begin_episode(const EpisodeContext& ctx) {
  cfg_ = base_cfg_;
  cfg_.seed = lookahead_seed(ctx.seed, base_cfg_.seed);
  ce_seed_ = derive_seed(ctx.seed, {static_cast<std::uint64_t>(Stream::CertaintyEquivalence), base_cfg_.seed});
  plan_ = {};
  timings_.clear();
}

Control TwoPhasePolicy::decide(const FleetState& state) {
  TwoPhaseStep step = two_phase_control(state, graph_, *model_, cfg_, plan_, ce_seed_, parallel_);
  plan_ = std::move(step.plan);
  for (std::size_t k = 0; k < step.sector_ms.size(); ++k)
    timings_.push_back({state.clock, static_cast<int>(k), step.sector_ms[k]});
  return std::move(step.control);
}

EpisodeTrace run_two_phase(const CityGraph& graph, const DemandModel& model, TaxiId m, int horizon, int m_lim,
                           const RolloutConfig& cfg, std::uint64_t seed, std::vector<SectorTiming>* timings) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "fleet size must be >= 1");
  TwoPhasePolicy policy(graph, model, m, m_lim, cfg);
  EpisodeTrace trace = run_episode(graph, model, policy, m, horizon, seed);
  if (timings) *timings = policy.sector_timings();
  return trace;
}

void write_sector_timing_csv(std::ostream& out, const std::vector<SectorTiming>& timings) {
  out << "t,sector,plan_ms\n";
  for (const SectorTiming& s : timings) out << s.t << ',' << s.sector + 1 << ',' << s.plan_ms << '\n';
}

}  // namespace fleetroll
