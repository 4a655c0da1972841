#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/policies.hpp"
#include "fleetroll/sim.hpp"

namespace fleetroll {

struct RolloutConfig {
  int horizon = 10;  // base-policy applications after the first step (t_h)
  int num_mc = 50;   // Monte-Carlo scenarios per candidate
  PolicyKind base_policy = PolicyKind::IARA;
  std::uint64_t seed = 0;  // lookahead stream
};

void validate(const RolloutConfig& cfg);

/// Lookahead seed used for one episode, from the episode's policy seed.
std::uint64_t lookahead_seed(std::uint64_t episode_seed, std::uint64_t cfg_seed);

/// Taxi that is not part of the local problem now but becomes a free local
/// taxi at `node` in state x_{t+offset} (a cross-sector transfer arriving).
struct InboundTaxi {
  int offset = 1;
  NodeId node = kNoNode;
  TaxiId id = -1;
};

/// The state a lookahead minimization operates on. For global rollout this is
/// the whole fleet state; for a sector it holds only the sector's taxis and
/// requests.
struct LocalProblem {
  FleetState state;               // local taxis ordered by global id
  std::vector<TaxiId> taxi_ids;   // global id of each local taxi
  std::vector<InboundTaxi> inbound;
  const std::vector<char>* region = nullptr;  // node mask restricting moves and arrivals; null = whole map

  static LocalProblem whole(const FleetState& state);
  bool in_region(NodeId v) const { return region == nullptr || (*region)[static_cast<std::size_t>(v)] != 0; }
};

/// One Monte-Carlo future: arrival batches entering x_{t+1}, ..., x_{t+1+t_h}.
struct Scenario {
  std::vector<std::vector<Request>> arrivals;
};

/// Scenarios keyed by (seed, step, key, index) so that results do not depend
/// on evaluation order or worker count. Arrivals outside the region are dropped.
std::vector<Scenario> sample_scenarios(const DemandModel& model, const LocalProblem& problem, const RolloutConfig& cfg,
                                       std::uint64_t key);

struct LookaheadEstimate {
  double mean = 0.0;
  std::vector<double> scenario_costs;
};

/// Expected cost of applying `joint` now and the base policy for t_h steps:
/// |r_t| + sum_{t'=t+1}^{t+t_h} |r_t'| + |r_{t+1+t_h}|, averaged over scenarios.
LookaheadEstimate evaluate_candidate(const LocalProblem& problem, const Control& joint, const CityGraph& graph,
                                     std::span<const Scenario> scenarios, const RolloutConfig& cfg);

/// Convenience form on a full state; scenarios are sampled from the model.
LookaheadEstimate evaluate_candidate(const FleetState& state, const Control& joint, const CityGraph& graph,
                                     const DemandModel& model, const RolloutConfig& cfg);

/// Candidate controls of local taxi `l` in enumeration order: pickups
/// (ascending request id, excluding `claimed`), Stay, then in-region neighbors ascending.
std::vector<TaxiControl> candidate_controls(const LocalProblem& problem, TaxiId l, const CityGraph& graph,
                                            std::span<const RequestId> claimed);

/// Instrumentation of one minimization sweep.
struct RolloutRecord {
  struct Evaluation {
    TaxiId taxi = -1;  // local index
    TaxiControl candidate;
    Control joint;
    double mean = 0.0;
  };
  Control base;
  Control chosen;
  std::vector<Evaluation> evaluations;
};

/// One-at-a-time rollout: taxis in ascending order each minimize the
/// lookahead cost with earlier taxis fixed at their chosen controls and later
/// taxis at the base policy's controls. Returns a control over local taxis.
Control one_at_a_time_control(const LocalProblem& problem, const CityGraph& graph, const DemandModel& model,
                              const RolloutConfig& cfg, RolloutRecord* record = nullptr);

Control one_at_a_time_control(const FleetState& state, const CityGraph& graph, const DemandModel& model,
                              const RolloutConfig& cfg, RolloutRecord* record = nullptr);

/// Global one-at-a-time rollout over the whole map.
class RolloutPolicy final : public Policy {
 public:
  RolloutPolicy(const CityGraph& graph, const DemandModel& model, RolloutConfig cfg);
  std::string name() const override { return "rollout"; }
  void begin_episode(const EpisodeContext& ctx) override;
  Control decide(const FleetState& state) override;

 private:
  const CityGraph* graph_;
  const DemandModel* model_;
  RolloutConfig base_cfg_;
  RolloutConfig cfg_;
};

struct CostSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> costs;
};

/// Mean episode cost of global rollout over the given episode seeds.
CostSummary rollout_policy_cost(const CityGraph& graph, const DemandModel& model, TaxiId fleet_size, int horizon,
                                const RolloutConfig& cfg, std::span<const std::uint64_t> seeds);

}  // namespace fleetroll
