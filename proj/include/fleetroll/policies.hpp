#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fleetroll/graph.hpp"
#include "fleetroll/rng.hpp"
#include "fleetroll/sim.hpp"

namespace fleetroll {

enum class PolicyKind { Greedy, RandomIA, IACommit, IARA };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

/// Pickup when co-located with the request, otherwise one hop toward it.
TaxiControl route_toward(const FleetState& state, TaxiId l, const Request& r, const CityGraph& graph);

/// Later taxis that would pick up a request already claimed by an earlier
/// taxi are demoted to Stay. Returns the number of demotions.
int resolve_pickup_conflicts(Control& control);

/// Minimum-cost matching of `taxis` to `requests` on d(location, pickup).
/// Returns (taxi, request index in `requests`) pairs.
std::vector<std::pair<TaxiId, std::size_t>> match_taxis(const FleetState& state, const std::vector<TaxiId>& taxis,
                                                        const std::vector<const Request*>& requests,
                                                        const CityGraph& graph);

/// Each free taxi heads for its nearest outstanding request (ties: smallest id).
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const CityGraph& graph) : graph_(&graph) {}
  std::string name() const override { return "greedy"; }
  Control decide(const FleetState& state) override;

 private:
  const CityGraph* graph_;
};

/// Instantaneous assignment with reassignment: all free taxis are matched to
/// all outstanding requests from scratch every step.
class IARAPolicy final : public Policy {
 public:
  explicit IARAPolicy(const CityGraph& graph) : graph_(&graph) {}
  std::string name() const override { return "ia-ra"; }
  Control decide(const FleetState& state) override;

 private:
  const CityGraph* graph_;
};

/// Instantaneous assignment with commitment: a pairing persists until pickup;
/// only uncommitted free taxis and unassigned requests are re-matched.
class IACommitPolicy final : public Policy {
 public:
  explicit IACommitPolicy(const CityGraph& graph) : graph_(&graph) {}
  std::string name() const override { return "ia-commit"; }
  void begin_episode(const EpisodeContext&) override { commitment_.clear(); }
  Control decide(const FleetState& state) override;

  /// taxi -> committed request (kNoRequest when uncommitted).
  const std::vector<RequestId>& commitments() const { return commitment_; }

 private:
  const CityGraph* graph_;
  std::vector<RequestId> commitment_;
};

/// Random instantaneous assignment: each unassigned request goes to a
/// uniformly random unassigned free taxi; the pairing holds until the trip is
/// complete. Unassigned taxis do not move.
class RandomIAPolicy final : public Policy {
 public:
  RandomIAPolicy(const CityGraph& graph, std::uint64_t seed) : graph_(&graph), rng_(seed) {}
  std::string name() const override { return "random-ia"; }
  void begin_episode(const EpisodeContext& ctx) override {
    rng_ = Rng(ctx.seed);
    assignment_.clear();
  }
  Control decide(const FleetState& state) override;

  const std::vector<RequestId>& assignments() const { return assignment_; }

 private:
  const CityGraph* graph_;
  Rng rng_;
  std::vector<RequestId> assignment_;
};

std::unique_ptr<Policy> make_base_policy(PolicyKind kind, const CityGraph& graph, std::uint64_t seed = 0);

struct ServiceDistance {
  double total = 0.0;  // Z: sum over assigned requests of d(assignment location, pickup) + d(pickup, dropoff)
  int counted = 0;
  int unassigned = 0;  // never assigned; excluded from the total
};

ServiceDistance service_distance(const EpisodeTrace& trace, const CityGraph& graph);

}  // namespace fleetroll
