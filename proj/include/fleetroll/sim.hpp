#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"

namespace fleetroll {

using TaxiId = std::int32_t;

/// Fleet state at a step: taxi locations, remaining trip times, and the
/// outstanding (arrived, not yet picked up) requests sorted by id.
struct FleetState {
  std::vector<NodeId> location;
  std::vector<int> trip_timer;          // > 0 iff the taxi is carrying a passenger
  std::vector<NodeId> destination;      // dropoff while in service, else kNoNode
  std::vector<RequestId> serving;       // request in service, else kNoRequest
  std::vector<Request> outstanding;
  int clock = 1;

  TaxiId fleet_size() const { return static_cast<TaxiId>(location.size()); }
  bool is_free(TaxiId l) const { return trip_timer[static_cast<std::size_t>(l)] == 0; }
  void add_taxi(NodeId at);
  /// Outstanding request by id, or nullptr.
  const Request* find_outstanding(RequestId id) const;

  friend bool operator==(const FleetState&, const FleetState&) = default;
};

enum class Action : std::uint8_t { Stay, MoveTo, Pickup, ForcedHop };

struct TaxiControl {
  Action action = Action::Stay;
  NodeId node = kNoNode;          // MoveTo / ForcedHop target
  RequestId request = kNoRequest; // Pickup
  /// Request the policy is currently routing this taxi toward, if any. Used
  /// only for assignment bookkeeping; it never affects the transition.
  RequestId target = kNoRequest;

  static TaxiControl stay(RequestId target = kNoRequest) { return {Action::Stay, kNoNode, kNoRequest, target}; }
  static TaxiControl move_to(NodeId n, RequestId target = kNoRequest) { return {Action::MoveTo, n, kNoRequest, target}; }
  static TaxiControl pickup(RequestId r) { return {Action::Pickup, kNoNode, r, r}; }
  static TaxiControl forced_hop(NodeId n) { return {Action::ForcedHop, n, kNoRequest, kNoRequest}; }

  bool same_action(const TaxiControl& o) const { return action == o.action && node == o.node && request == o.request; }
  friend bool operator==(const TaxiControl&, const TaxiControl&) = default;
};

using Control = std::vector<TaxiControl>;

/// The only control available to an occupied taxi.
TaxiControl forced_control(const FleetState& state, TaxiId l, const CityGraph& graph);

/// Throws IllegalControl naming the taxi and reason when `control` is not in
/// the per-taxi control sets (including two taxis picking up one request).
void check_control(const FleetState& state, const Control& control, const CityGraph& graph);

struct TransitionLog {
  std::vector<std::pair<TaxiId, RequestId>> pickups;
};

/// One step in place: execute controls (moves, pickups, trip hops), then
/// append `arrivals` to the outstanding set, then advance the clock.
/// A pickup whose dropoff equals its pickup completes immediately.
void apply_transition(FleetState& state, const Control& control, std::span<const Request> arrivals,
                      const CityGraph& graph, TransitionLog* log = nullptr, bool validate = true);

FleetState transition(const FleetState& state, const Control& control, std::span<const Request> arrivals,
                      const CityGraph& graph);

inline int stage_cost(const FleetState& state) { return static_cast<int>(state.outstanding.size()); }

struct EpisodeContext {
  std::uint64_t seed = 0;       // policy randomness stream for this episode
  TaxiId fleet_size = 0;
  int horizon = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called once before the first decision of every episode.
  virtual void begin_episode(const EpisodeContext&) {}
  virtual Control decide(const FleetState& state) = 0;
};

struct StepRecord {
  int t = 0;
  int outstanding = 0;
  int arrivals = 0;   // requests that entered the system at this step
  int pickups = 0;    // pickups executed by this step's control
  int free_taxis = 0;
  double plan_ms = 0.0;

  bool same_outcome(const StepRecord& o) const {
    return t == o.t && outstanding == o.outstanding && arrivals == o.arrivals && pickups == o.pickups &&
           free_taxis == o.free_taxis;
  }
};

struct AssignmentEvent {
  int t = 0;
  RequestId request = kNoRequest;
  TaxiId taxi = -1;
  NodeId taxi_location = kNoNode;
};

/// Lifecycle of one request within an episode.
struct RequestRecord {
  Request request;
  TaxiId assigned_taxi = -1;          // final assignment (taxi that picked it up, once picked)
  NodeId assignment_location = kNoNode;
  int assignment_time = 0;
  int pickup_time = 0;                // 0 while outstanding
  bool assigned() const { return assigned_taxi >= 0; }
};

struct EpisodeTrace {
  std::string policy;
  TaxiId fleet_size = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;        // t = 1..T
  std::vector<Control> controls;        // t = 1..T-1
  std::vector<RequestRecord> requests;  // by request id
  std::vector<AssignmentEvent> assignment_history;
  long long cost = 0;                   // sum_{t<T} |r_t| + |r_T|
  double service_distance = 0.0;        // Z
  int unassigned_requests = 0;          // excluded from Z

  double mean_plan_ms() const;
  /// Non-timing equality: steps (timing excluded), controls, requests, cost, Z.
  bool same_outcome(const EpisodeTrace& o) const;
};

struct EpisodeOptions {
  bool keep_controls = true;
  bool validate = true;
};

/// Initial taxi locations drawn from the initial-location distribution, the
/// full arrival sequence drawn from the demand model, then T-1 decisions.
/// Every random draw derives from `seed` through separate streams.
EpisodeTrace run_episode(const CityGraph& graph, const DemandModel& model, Policy& policy, TaxiId fleet_size,
                         int horizon, std::uint64_t seed, const EpisodeOptions& options = {});

/// Arrival batches for steps 1..horizon (batch t holds requests with arrival_time t).
std::vector<std::vector<Request>> sample_arrival_sequence(const DemandModel& model, int horizon, std::uint64_t seed);

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);
/// JSON summary {cost, Z, runtime_ms_per_step_mean, seed, policy, m, T}.
std::string trace_summary_json(const EpisodeTrace& trace);

}  // namespace fleetroll
