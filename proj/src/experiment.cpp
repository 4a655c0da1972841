#include "fleetroll/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "fleetroll/error.hpp"
#include "fleetroll/policies.hpp"

namespace fleetroll {

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"greedy", "random-ia", "ia-commit", "ia-ra", "rollout", "two-phase"};
  return names;
}

bool is_policy_name(std::string_view name) {
  const auto& n = policy_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::unique_ptr<Policy> make_policy(std::string_view name, const CityGraph& graph, const DemandModel& model, TaxiId m,
                                    const PolicySettings& settings) {
  if (auto kind = parse_policy_kind(name)) return make_base_policy(*kind, graph);
  if (name == "rollout") return std::make_unique<RolloutPolicy>(graph, model, settings.rollout);
  if (name == "two-phase") return std::make_unique<TwoPhasePolicy>(graph, model, m, settings.m_lim, settings.rollout);
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + std::string(name) + "'");
}

std::vector<RunResult> run_batch(const CityGraph& graph, const DemandModel& model, const std::vector<RunSpec>& specs,
                                 const PolicySettings& settings, int jobs, const EpisodeOptions& options) {
  for (const RunSpec& s : specs)
    if (!is_policy_name(s.policy)) throw Error(ErrorCode::InvalidArgument, "unknown policy '" + s.policy + "'");
  std::vector<RunResult> out(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        const RunSpec& s = specs[i];
        auto policy = make_policy(s.policy, graph, model, s.m, settings);
        if (auto* tp = dynamic_cast<TwoPhasePolicy*>(policy.get()); tp && jobs > 1) tp->set_parallel(false);
        out[i].trace = run_episode(graph, model, *policy, s.m, s.horizon, s.seed, options);
        if (auto* tp = dynamic_cast<TwoPhasePolicy*>(policy.get())) out[i].sector_timings = tp->sector_timings();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = specs.size();
        return;
      }
    }
  };

  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, specs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace fleetroll
