#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/partition.hpp"
#include "fleetroll/rollout.hpp"
#include "fleetroll/sim.hpp"

namespace fleetroll {

/// A taxi moving between sectors under high-level control.
struct Transit {
  TaxiId taxi = -1;
  NodeId d_hat = kNoNode;       // entry node of the destination sector
  std::vector<NodeId> path;     // hops after the start node, ending at d_hat
  int start_clock = 0;          // clock at which path[0] is the control

  int hops_done(int clock) const { return clock - start_clock; }
  int remaining(int clock) const { return static_cast<int>(path.size()) - hops_done(clock); }
  NodeId hop_at(int clock) const { return path[static_cast<std::size_t>(hops_done(clock))]; }
};

struct HighLevelPlan {
  std::vector<Transit> transit;  // m_hat, ascending taxi id

  const Transit* find(TaxiId l) const;
  bool in_transit(TaxiId l) const { return find(l) != nullptr; }
};

/// Cross-sector rebalancing. Arrived transits are pruned, free taxis not in
/// transit are matched to outstanding plus certainty-equivalence requests,
/// and every cross-sector match starts a transit to the entry node of the
/// request's sector. `graph` must carry sectors.
HighLevelPlan high_level_plan(const FleetState& state, const CityGraph& graph, const DemandModel& model, int t_h,
                              const HighLevelPlan& prev, std::uint64_t seed);

/// Sub-problem of sector k: its non-transit taxis, requests picked up in it,
/// and transits heading into it.
LocalProblem sector_problem(const FleetState& state, const CityGraph& graph, const HighLevelPlan& plan, int k,
                            std::vector<char>& region_storage);

/// One-at-a-time rollout inside sector k. Returns (global taxi id, control) pairs.
std::vector<std::pair<TaxiId, TaxiControl>> low_level_plan(const FleetState& state, const CityGraph& graph,
                                                           const DemandModel& model, const HighLevelPlan& plan, int k,
                                                           const RolloutConfig& cfg);

struct SectorTiming {
  int t = 0;
  int sector = 0;  // 0-based
  double plan_ms = 0.0;
};

struct TwoPhaseStep {
  Control control;
  HighLevelPlan plan;
  double high_level_ms = 0.0;
  std::vector<double> sector_ms;
};

/// Runs the high-level planner, then every sector's low-level planner, and
/// merges the results. `parallel` runs sectors on separate threads.
TwoPhaseStep two_phase_control(const FleetState& state, const CityGraph& graph, const DemandModel& model,
                               const RolloutConfig& cfg, const HighLevelPlan& prev, std::uint64_t seed,
                               bool parallel = false);

class TwoPhasePolicy final : public Policy {
 public:
  /// Partitions the map for a fleet of m taxis with at most m_lim per sector.
  TwoPhasePolicy(const CityGraph& graph, const DemandModel& model, TaxiId m, int m_lim, RolloutConfig cfg);

  std::string name() const override { return "two-phase"; }
  void begin_episode(const EpisodeContext& ctx) override;
  Control decide(const FleetState& state) override;

  const PartitionSpec& partition() const { return partition_; }
  const CityGraph& sectored_graph() const { return graph_; }
  const HighLevelPlan& plan() const { return plan_; }
  const std::vector<SectorTiming>& sector_timings() const { return timings_; }
  void set_parallel(bool on) { parallel_ = on; }

 private:
  CityGraph graph_;
  const DemandModel* model_;
  PartitionSpec partition_;
  RolloutConfig base_cfg_;
  RolloutConfig cfg_;
  std::uint64_t ce_seed_ = 0;
  HighLevelPlan plan_;
  std::vector<SectorTiming> timings_;
  bool parallel_;
};

EpisodeTrace run_two_phase(const CityGraph& graph, const DemandModel& model, TaxiId m, int horizon, int m_lim,
                           const RolloutConfig& cfg, std::uint64_t seed, std::vector<SectorTiming>* timings = nullptr);

void write_sector_timing_csv(std::ostream& out, const std::vector<SectorTiming>& timings);

}  // namespace fleetroll
