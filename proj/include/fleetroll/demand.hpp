#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fleetroll/graph.hpp"
#include "fleetroll/rng.hpp"

namespace fleetroll {

using RequestId = std::int64_t;
inline constexpr RequestId kNoRequest = -1;

/// Ride request: pickup, dropoff, arrival step, picked-up flag.
struct Request {
  RequestId id = kNoRequest;
  NodeId pickup = kNoNode;
  NodeId dropoff = kNoNode;
  int arrival_time = 1;
  bool picked_up = false;

  friend bool operator==(const Request&, const Request&) = default;
};

/// Probability mass function over {0, ..., size-1} with an inverse-CDF sampler.
class Categorical {
 public:
  Categorical() = default;
  /// Normalizes weights; throws InvalidDistribution on negative mass or zero total.
  static Categorical from_weights(std::vector<double> weights);
  /// Point mass at `index` over a support of `size` outcomes.
  static Categorical point(std::size_t size, std::size_t index);

  std::size_t size() const { return mass_.size(); }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::span<const double> masses() const { return mass_; }
  double mean() const;

  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> mass_;
  std::vector<double> cdf_;
};

/// Empirical demand: arrivals per step, pickup locations, dropoffs given
/// pickup, plus the derived marginals used by the stability analysis.
class DemandModel {
 public:
  /// `dropoff_given_pickup[u]` may be empty for a pickup node never observed;
  /// such nodes fall back to the marginal dropoff distribution.
  /// `initial_location` defaults to the marginal dropoff distribution.
  static DemandModel make(Categorical eta, Categorical pickup, std::vector<Categorical> dropoff_given_pickup,
                          std::optional<Categorical> initial_location = std::nullopt);

  NodeId node_count() const { return static_cast<NodeId>(pickup_.size()); }
  double expected_arrivals() const { return eta_.mean(); }

  const Categorical& eta() const { return eta_; }
  const Categorical& pickup() const { return pickup_; }
  const Categorical& dropoff_given_pickup(NodeId u) const;
  const Categorical& marginal_dropoff() const { return marginal_dropoff_; }
  const Categorical& initial_location() const { return initial_location_; }
  /// Location of a taxi reassigned after a previous trip; identified with the
  /// marginal dropoff distribution.
  const Categorical& lrand() const { return marginal_dropoff_; }
  bool has_conditional(NodeId u) const { return !dropoff_given_pickup_[static_cast<std::size_t>(u)].masses().empty(); }

  DemandModel with_initial_location(Categorical initial) const;

 private:
  Categorical eta_;
  Categorical pickup_;
  std::vector<Categorical> dropoff_given_pickup_;
  Categorical marginal_dropoff_;
  Categorical initial_location_;
};

struct Trip {
  int t = 1;
  NodeId pickup = kNoNode;
  NodeId dropoff = kNoNode;
};

struct TripLog {
  std::vector<Trip> trips;
  int horizon = 0;  // number of steps the log spans; 0 means max trip time
};

/// Relative-frequency estimate. Steps with no trips count as zero arrivals.
DemandModel estimate_from_trips(const TripLog& log, const CityGraph& graph);

/// CSV with header "t,pickup,dropoff", nodes 1-indexed, t >= 1.
TripLog read_trip_csv(std::istream& in);
TripLog load_trip_csv(const std::string& path);
void write_trip_csv(std::ostream& out, const TripLog& log);

int sample_arrivals(const DemandModel& model, Rng& rng);
Request sample_request(const DemandModel& model, int t, Rng& rng, RequestId id = kNoRequest);

/// round(t_h * E[eta]) nominal requests with arrival times spread evenly over (t, t + t_h].
std::vector<Request> certainty_equivalence_requests(const DemandModel& model, int t, int horizon, Rng& rng,
                                                    RequestId first_id = 0);

struct ExpectationTerms {
  double initial_to_pickup = 0.0;  // E[d(xi, rho)]
  double lrand_to_pickup = 0.0;    // E[d(l_rand, rho)]
  double pickup_to_dropoff = 0.0;  // E[d(rho, delta)]
  double arrivals = 0.0;           // E[eta]
};

ExpectationTerms expectation_terms(const DemandModel& model, const CityGraph& graph);

/// Ground-truth model for generated benchmarks on a graph with coordinates:
/// pickups concentrate around one hotspot, dropoffs around another, drawn
/// independently of the pickup. Arrivals take the two integers bracketing
/// `arrival_rate` so that E[eta] equals it exactly.
struct SyntheticDemand {
  double arrival_rate = 0.4;
  Point pickup_hotspot{0.25, 0.25};   // fractions of the coordinate bounding box
  Point dropoff_hotspot{0.75, 0.75};
  double hotspot_gain = 4.0;
  double hotspot_width = 0.25;        // fraction of the bounding box diagonal extent
};

DemandModel synthetic_model(const CityGraph& graph, const SyntheticDemand& params = {});

/// Arrival-count pmf with mean exactly `rate`, supported on floor(rate) and floor(rate)+1.
Categorical bracketing_arrivals(double rate);

TripLog generate_trips(const DemandModel& model, int horizon, std::uint64_t seed);

}  // namespace fleetroll
