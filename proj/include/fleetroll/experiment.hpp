#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/planner.hpp"
#include "fleetroll/rollout.hpp"
#include "fleetroll/sim.hpp"

namespace fleetroll {

struct PolicySettings {
  RolloutConfig rollout;
  int m_lim = 10;
};

const std::vector<std::string>& policy_names();
bool is_policy_name(std::string_view name);

std::unique_ptr<Policy> make_policy(std::string_view name, const CityGraph& graph, const DemandModel& model, TaxiId m,
                                    const PolicySettings& settings);

/// Episode seed of the i-th seed index under a master seed; shared by all
/// policies and fleet sizes so comparisons are paired.
inline std::uint64_t episode_seed(std::uint64_t master, int index) {
  return derive_seed(master, {0xe915ULL, static_cast<std::uint64_t>(index)});
}

struct RunSpec {
  std::string policy;
  TaxiId m = 1;
  int horizon = 1;
  int seed_index = 0;
  std::uint64_t seed = 0;
};

struct RunResult {
  EpisodeTrace trace;
  std::vector<SectorTiming> sector_timings;  // two-phase only
};

/// Runs every spec on up to `jobs` threads; results are in spec order and do
/// not depend on `jobs`.
std::vector<RunResult> run_batch(const CityGraph& graph, const DemandModel& model, const std::vector<RunSpec>& specs,
                                 const PolicySettings& settings, int jobs, const EpisodeOptions& options = {});

}  // namespace fleetroll
