#include "fleetroll/policies.hpp"

#include <algorithm>

#include "fleetroll/error.hpp"
#include "fleetroll/matching.hpp"

namespace fleetroll {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::RandomIA: return "random-ia";
    case PolicyKind::IACommit: return "ia-commit";
    case PolicyKind::IARA: return "ia-ra";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "greedy") return PolicyKind::Greedy;
  if (name == "random-ia") return PolicyKind::RandomIA;
  if (name == "ia-commit") return PolicyKind::IACommit;
  if (name == "ia-ra") return PolicyKind::IARA;
  return std::nullopt;
}

TaxiControl route_toward(const FleetState& state, TaxiId l, const Request& r, const CityGraph& graph) {
  const NodeId at = state.location[static_cast<std::size_t>(l)];
  if (at == r.pickup) return TaxiControl::pickup(r.id);
  return TaxiControl::move_to(graph.oracle().next_hop(at, r.pickup), r.id);
}

int resolve_pickup_conflicts(Control& control) {
  int demoted = 0;
  for (std::size_t i = 0; i < control.size(); ++i) {
    if (control[i].action != Action::Pickup) continue;
    for (std::size_t j = 0; j < i; ++j) {
      if (control[j].action == Action::Pickup && control[j].request == control[i].request) {
        control[i] = TaxiControl::stay();
        ++demoted;
        break;
      }
    }
  }
  return demoted;
}

std::vector<std::pair<TaxiId, std::size_t>> match_taxis(const FleetState& state, const std::vector<TaxiId>& taxis,
                                                        const std::vector<const Request*>& requests,
                                                        const CityGraph& graph) {
  std::vector<std::pair<TaxiId, std::size_t>> out;
  if (taxis.empty() || requests.empty()) return out;
  CostMatrix cost(taxis.size(), requests.size());
  for (std::size_t a = 0; a < taxis.size(); ++a) {
    const NodeId at = state.location[static_cast<std::size_t>(taxis[a])];
    for (std::size_t b = 0; b < requests.size(); ++b) cost(a, b) = graph.distance(at, requests[b]->pickup);
  }
  const Assignment assignment = min_cost_assignment(cost);
  out.reserve(assignment.pairs.size());
  for (const auto& [a, b] : assignment.pairs) out.emplace_back(taxis[a], b);
  return out;
}

namespace {

Control forced_or_stay(const FleetState& state, const CityGraph& graph) {
  Control control(static_cast<std::size_t>(state.fleet_size()));
  for (TaxiId l = 0; l < state.fleet_size(); ++l)
    if (!state.is_free(l)) control[static_cast<std::size_t>(l)] = forced_control(state, l, graph);
  return control;
}

void ensure_size(std::vector<RequestId>& memory, TaxiId m) {
  if (memory.size() < static_cast<std::size_t>(m)) memory.resize(static_cast<std::size_t>(m), kNoRequest);
}

}  // namespace

Control GreedyPolicy::decide(const FleetState& state) {
  Control control = forced_or_stay(state, *graph_);
  if (state.outstanding.empty()) return control;
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    if (!state.is_free(l)) continue;
    const NodeId at = state.location[static_cast<std::size_t>(l)];
    const Request* best = nullptr;
    int best_d = 0;
    for (const Request& r : state.outstanding) {
      const int d = graph_->distance(at, r.pickup);
      if (best == nullptr || d < best_d || (d == best_d && r.id < best->id)) {
        best = &r;
        best_d = d;
      }
    }
    control[static_cast<std::size_t>(l)] = route_toward(state, l, *best, *graph_);
  }
  resolve_pickup_conflicts(control);
  return control;
}

Control IARAPolicy::decide(const FleetState& state) {
  Control control = forced_or_stay(state, *graph_);
  if (state.outstanding.empty()) return control;
  std::vector<TaxiId> taxis;
  for (TaxiId l = 0; l < state.fleet_size(); ++l)
    if (state.is_free(l)) taxis.push_back(l);
  std::vector<const Request*> requests;
  requests.reserve(state.outstanding.size());
  for (const Request& r : state.outstanding) requests.push_back(&r);
  for (const auto& [l, q] : match_taxis(state, taxis, requests, *graph_))
    control[static_cast<std::size_t>(l)] = route_toward(state, l, *requests[q], *graph_);
  return control;
}

Control IACommitPolicy::decide(const FleetState& state) {
  ensure_size(commitment_, state.fleet_size());
  for (RequestId& r : commitment_)
    if (r != kNoRequest && state.find_outstanding(r) == nullptr) r = kNoRequest;

  std::vector<TaxiId> taxis;
  for (TaxiId l = 0; l < state.fleet_size(); ++l)
    if (state.is_free(l) && commitment_[static_cast<std::size_t>(l)] == kNoRequest) taxis.push_back(l);
  std::vector<const Request*> requests;
  for (const Request& r : state.outstanding)
    if (std::find(commitment_.begin(), commitment_.end(), r.id) == commitment_.end()) requests.push_back(&r);
  for (const auto& [l, q] : match_taxis(state, taxis, requests, *graph_))
    commitment_[static_cast<std::size_t>(l)] = requests[q]->id;

  Control control = forced_or_stay(state, *graph_);
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    const RequestId r = commitment_[static_cast<std::size_t>(l)];
    if (r == kNoRequest || !state.is_free(l)) continue;
    control[static_cast<std::size_t>(l)] = route_toward(state, l, *state.find_outstanding(r), *graph_);
  }
  return control;
}

Control RandomIAPolicy::decide(const FleetState& state) {
  ensure_size(assignment_, state.fleet_size());
  // Release taxis whose assigned trip is finished (request gone, taxi free again).
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    RequestId& r = assignment_[static_cast<std::size_t>(l)];
    if (r != kNoRequest && state.is_free(l) && state.find_outstanding(r) == nullptr) r = kNoRequest;
  }

  std::vector<TaxiId> pool;
  for (TaxiId l = 0; l < state.fleet_size(); ++l)
    if (state.is_free(l) && assignment_[static_cast<std::size_t>(l)] == kNoRequest) pool.push_back(l);
  for (const Request& r : state.outstanding) {
    if (pool.empty()) break;
    if (std::find(assignment_.begin(), assignment_.end(), r.id) != assignment_.end()) continue;
    const auto pick = static_cast<std::size_t>(rng_.below(pool.size()));
    assignment_[static_cast<std::size_t>(pool[pick])] = r.id;
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  Control control = forced_or_stay(state, *graph_);
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    const RequestId r = assignment_[static_cast<std::size_t>(l)];
    if (r == kNoRequest || !state.is_free(l)) continue;
    const Request* req = state.find_outstanding(r);
    if (req != nullptr) control[static_cast<std::size_t>(l)] = route_toward(state, l, *req, *graph_);
  }
  return control;
}

std::unique_ptr<Policy> make_base_policy(PolicyKind kind, const CityGraph& graph, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::Greedy: return std::make_unique<GreedyPolicy>(graph);
    case PolicyKind::RandomIA: return std::make_unique<RandomIAPolicy>(graph, seed);
    case PolicyKind::IACommit: return std::make_unique<IACommitPolicy>(graph);
    case PolicyKind::IARA: return std::make_unique<IARAPolicy>(graph);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy kind");
}

ServiceDistance service_distance(const EpisodeTrace& trace, const CityGraph& graph) {
  ServiceDistance z;
  for (const RequestRecord& rec : trace.requests) {
    if (!rec.assigned()) {
      ++z.unassigned;
      continue;
    }
    z.total += graph.distance(rec.assignment_location, rec.request.pickup) +
               graph.distance(rec.request.pickup, rec.request.dropoff);
    ++z.counted;
  }
  return z;
}

}  // namespace fleetroll
