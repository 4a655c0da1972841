#include "fleetroll/sim.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fleetroll/error.hpp"
#include "fleetroll/policies.hpp"
#include "fleetroll/rng.hpp"

namespace fleetroll {

void FleetState::add_taxi(NodeId at) {
  location.push_back(at);
  trip_timer.push_back(0);
  destination.push_back(kNoNode);
  serving.push_back(kNoRequest);
}

const Request* FleetState::find_outstanding(RequestId id) const {
  auto it = std::lower_bound(outstanding.begin(), outstanding.end(), id,
                             [](const Request& r, RequestId v) { return r.id < v; });
  if (it != outstanding.end() && it->id == id) return &*it;
  // Arrivals are appended in id order, but callers may build states by hand.
  for (const Request& r : outstanding)
    if (r.id == id) return &r;
  return nullptr;
}

TaxiControl forced_control(const FleetState& state, TaxiId l, const CityGraph& graph) {
  const auto i = static_cast<std::size_t>(l);
  return TaxiControl::forced_hop(graph.oracle().next_hop(state.location[i], state.destination[i]));
}

namespace {

[[noreturn]] void illegal(TaxiId l, const std::string& why) {
  throw Error(ErrorCode::IllegalControl, "taxi " + std::to_string(l + 1) + ": " + why);
}

}  // namespace

void check_control(const FleetState& state, const Control& control, const CityGraph& graph) {
  if (control.size() != state.location.size())
    throw Error(ErrorCode::IllegalControl, "control has " + std::to_string(control.size()) + " entries for " +
                                               std::to_string(state.location.size()) + " taxis");
  std::vector<RequestId> claimed;
  for (TaxiId l = 0; l < state.fleet_size(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    const TaxiControl& u = control[i];
    const NodeId at = state.location[i];
    if (!state.is_free(l)) {
      if (u.action != Action::ForcedHop) illegal(l, "occupied taxi must take the forced hop toward its dropoff");
      if (u.node != graph.oracle().next_hop(at, state.destination[i])) illegal(l, "forced hop is not the next hop");
      continue;
    }
    switch (u.action) {
      case Action::Stay: break;
      case Action::MoveTo:
        if (!graph.valid_node(u.node) || !graph.has_edge(at, u.node)) illegal(l, "move target is not a neighbor");
        break;
      case Action::Pickup: {
        const Request* r = state.find_outstanding(u.request);
        if (r == nullptr) illegal(l, "pickup of a request that is not outstanding");
        if (r->pickup != at) illegal(l, "pickup of a request located elsewhere");
        if (std::find(claimed.begin(), claimed.end(), u.request) != claimed.end())
          illegal(l, "request " + std::to_string(u.request) + " picked up by two taxis");
        claimed.push_back(u.request);
        break;
      }
      case Action::ForcedHop: illegal(l, "forced hop issued to a free taxi");
    }
  }
}

void apply_transition(FleetState& state, const Control& control, std::span<const Request> arrivals,
                      const CityGraph& graph, TransitionLog* log, bool validate) {
  if (validate) check_control(state, control, graph);
  bool any_pickup = false;
  for (std::size_t i = 0; i < state.location.size(); ++i) {
    const TaxiControl& u = control[i];
    switch (u.action) {
      case Action::Stay: break;
      case Action::MoveTo: state.location[i] = u.node; break;
      case Action::ForcedHop:
        state.location[i] = u.node;
        if (--state.trip_timer[i] == 0) {
          state.destination[i] = kNoNode;
          state.serving[i] = kNoRequest;
        }
        break;
      case Action::Pickup: {
        const Request* r = state.find_outstanding(u.request);
        const int trip = graph.distance(r->pickup, r->dropoff);
        state.trip_timer[i] = trip;
        state.destination[i] = trip > 0 ? r->dropoff : kNoNode;
        state.serving[i] = trip > 0 ? r->id : kNoRequest;
        if (log) log->pickups.emplace_back(static_cast<TaxiId>(i), r->id);
        any_pickup = true;
        break;
      }
    }
  }
  if (any_pickup) {
    auto picked = [&](const Request& r) {
      for (const TaxiControl& u : control)
        if (u.action == Action::Pickup && u.request == r.id) return true;
      return false;
    };
    state.outstanding.erase(std::remove_if(state.outstanding.begin(), state.outstanding.end(), picked),
                            state.outstanding.end());
  }
  state.outstanding.insert(state.outstanding.end(), arrivals.begin(), arrivals.end());
  ++state.clock;
}

FleetState transition(const FleetState& state, const Control& control, std::span<const Request> arrivals,
                      const CityGraph& graph) {
  FleetState next = state;
  apply_transition(next, control, arrivals, graph);
  return next;
}

double EpisodeTrace::mean_plan_ms() const {
  if (steps.size() <= 1) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) total += steps[i].plan_ms;
  return total / static_cast<double>(steps.size() - 1);
}

bool EpisodeTrace::same_outcome(const EpisodeTrace& o) const {
  if (steps.size() != o.steps.size() || cost != o.cost || service_distance != o.service_distance ||
      unassigned_requests != o.unassigned_requests || controls != o.controls || requests.size() != o.requests.size())
    return false;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (!steps[i].same_outcome(o.steps[i])) return false;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto &a = requests[i], &b = o.requests[i];
    if (!(a.request == b.request) || a.assigned_taxi != b.assigned_taxi ||
        a.assignment_location != b.assignment_location || a.pickup_time != b.pickup_time)
      return false;
  }
  return true;
}

std::vector<std::vector<Request>> sample_arrival_sequence(const DemandModel& model, int horizon, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<Request>> batches(static_cast<std::size_t>(horizon) + 1);
  RequestId next_id = 0;
  for (int t = 1; t <= horizon; ++t) {
    const int count = sample_arrivals(model, rng);
    for (int i = 0; i < count; ++i) batches[static_cast<std::size_t>(t)].push_back(sample_request(model, t, rng, next_id++));
  }
  return batches;
}

EpisodeTrace run_episode(const CityGraph& graph, const DemandModel& model, Policy& policy, TaxiId fleet_size,
                         int horizon, std::uint64_t seed, const EpisodeOptions& options) {
  if (fleet_size < 1) throw Error(ErrorCode::InvalidArgument, "fleet size must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (model.node_count() != graph.node_count())
    throw Error(ErrorCode::DomainMismatch, "demand model and graph have different node counts");

  EpisodeTrace trace;
  trace.policy = policy.name();
  trace.fleet_size = fleet_size;
  trace.horizon = horizon;
  trace.seed = seed;

  const auto batches = sample_arrival_sequence(model, horizon, stream_seed(seed, Stream::Arrivals));
  for (const auto& batch : batches)
    for (const Request& r : batch) trace.requests.push_back({r});

  FleetState state;
  {
    Rng init(stream_seed(seed, Stream::Initial));
    for (TaxiId l = 0; l < fleet_size; ++l)
      state.add_taxi(static_cast<NodeId>(model.initial_location().sample(init)));
  }
  state.outstanding = batches[1];
  state.clock = 1;

  policy.begin_episode({stream_seed(seed, Stream::Policy), fleet_size, horizon});

  // Per-taxi (step, location) where it last became available; position history for fallbacks.
  std::vector<int> free_since(static_cast<std::size_t>(fleet_size), 1);
  std::vector<std::vector<NodeId>> positions;  // positions[t][l]
  positions.reserve(static_cast<std::size_t>(horizon) + 1);
  positions.emplace_back();  // t = 0 unused
  std::vector<bool> active(trace.requests.size(), false);  // targeted without interruption up to now

  auto snapshot = [&](int t) {
    StepRecord rec;
    rec.t = t;
    rec.outstanding = stage_cost(state);
    rec.arrivals = static_cast<int>(batches[static_cast<std::size_t>(t)].size());
    for (TaxiId l = 0; l < fleet_size; ++l) rec.free_taxis += state.is_free(l) ? 1 : 0;
    return rec;
  };

  TransitionLog log;
  for (int t = 1; t < horizon; ++t) {
    positions.push_back(state.location);
    const StepRecord pre = snapshot(t);

    const auto start = std::chrono::steady_clock::now();
    Control control = policy.decide(state);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (control.size() != static_cast<std::size_t>(fleet_size))
      throw Error(ErrorCode::IllegalControl, "policy returned a control of the wrong size");

    // Assignment bookkeeping: the current assignee is the taxi targeting the
    // request; a new assignee (or a gap with no assignee) starts a new record.
    std::vector<bool> targeted(trace.requests.size(), false);
    for (TaxiId l = 0; l < fleet_size; ++l) {
      const TaxiControl& u = control[static_cast<std::size_t>(l)];
      if (u.target == kNoRequest || !state.is_free(l)) continue;
      const auto q = static_cast<std::size_t>(u.target);
      if (q >= trace.requests.size() || state.find_outstanding(u.target) == nullptr) continue;
      targeted[q] = true;
      RequestRecord& rec = trace.requests[q];
      if (active[q] && rec.assigned_taxi == l) continue;
      rec.assigned_taxi = l;
      if (u.action == Action::Pickup) {
        // Assigned only at the moment of pickup (policies without explicit
        // targeting): charge the approach from where the taxi became available.
        const int since = std::max(rec.request.arrival_time, free_since[static_cast<std::size_t>(l)]);
        rec.assignment_time = since;
        rec.assignment_location = positions[static_cast<std::size_t>(since)][static_cast<std::size_t>(l)];
      } else {
        rec.assignment_time = t;
        rec.assignment_location = state.location[static_cast<std::size_t>(l)];
      }
      trace.assignment_history.push_back({rec.assignment_time, u.target, l, rec.assignment_location});
    }
    for (const Request& r : state.outstanding) active[static_cast<std::size_t>(r.id)] = targeted[static_cast<std::size_t>(r.id)];

    log.pickups.clear();
    apply_transition(state, control, batches[static_cast<std::size_t>(t + 1)], graph, &log, options.validate);
    for (const auto& [l, r] : log.pickups) {
      trace.requests[static_cast<std::size_t>(r)].pickup_time = t;
      if (state.is_free(l)) free_since[static_cast<std::size_t>(l)] = t + 1;
    }
    for (TaxiId l = 0; l < fleet_size; ++l) {
      const TaxiControl& u = control[static_cast<std::size_t>(l)];
      if (u.action == Action::ForcedHop && state.is_free(l)) free_since[static_cast<std::size_t>(l)] = t + 1;
    }

    StepRecord& rec = trace.steps.emplace_back(pre);
    rec.pickups = static_cast<int>(log.pickups.size());
    rec.plan_ms = ms;
    if (options.keep_controls) trace.controls.push_back(std::move(control));
  }
  trace.steps.push_back(snapshot(horizon));

  for (const StepRecord& rec : trace.steps) trace.cost += rec.outstanding;
  const ServiceDistance z = service_distance(trace, graph);
  trace.service_distance = z.total;
  trace.unassigned_requests = z.unassigned;
  return trace;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  out << "t,outstanding,arrivals,pickups,free_taxis\n";
  for (const StepRecord& s : trace.steps)
    out << s.t << ',' << s.outstanding << ',' << s.arrivals << ',' << s.pickups << ',' << s.free_taxis << '\n';
}

std::string trace_summary_json(const EpisodeTrace& trace) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "{\"cost\": " << trace.cost << ", \"Z\": " << trace.service_distance
     << ", \"runtime_ms_per_step_mean\": " << trace.mean_plan_ms() << ", \"seed\": " << trace.seed
     << ", \"policy\": \"" << trace.policy << "\", \"m\": " << trace.fleet_size << ", \"T\": " << trace.horizon
     << ", \"unassigned_requests\": " << trace.unassigned_requests << "}";
  return os.str();
}

}  // namespace fleetroll
