#include "fleetroll/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fleetroll/error.hpp"

namespace fleetroll {

Categorical Categorical::from_weights(std::vector<double> weights) {
  if (weights.empty()) throw Error(ErrorCode::InvalidDistribution, "empty support");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidDistribution, "negative or non-finite mass");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::InvalidDistribution, "total mass is zero");

  Categorical c;
  c.mass_ = std::move(weights);
  for (double& w : c.mass_) w /= total;
  c.cdf_.resize(c.mass_.size());
  std::partial_sum(c.mass_.begin(), c.mass_.end(), c.cdf_.begin());
  std::size_t last = c.mass_.size() - 1;
  while (c.mass_[last] == 0.0) --last;
  std::fill(c.cdf_.begin() + static_cast<std::ptrdiff_t>(last), c.cdf_.end(), 1.0);
  return c;
}

Categorical Categorical::point(std::size_t size, std::size_t index) {
  std::vector<double> w(size, 0.0);
  w.at(index) = 1.0;
  return from_weights(std::move(w));
}

double Categorical::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) m += static_cast<double>(i) * mass_[i];
  return m;
}

std::size_t Categorical::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // upper_bound never lands on a zero-mass outcome: its cdf equals its predecessor's.
  return static_cast<std::size_t>(it - cdf_.begin());
}

DemandModel DemandModel::make(Categorical eta, Categorical pickup, std::vector<Categorical> dropoff_given_pickup,
                              std::optional<Categorical> initial_location) {
  const std::size_t n = pickup.size();
  if (n == 0 || eta.size() == 0) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  if (dropoff_given_pickup.size() != n)
    throw Error(ErrorCode::DomainMismatch, "conditional dropoff table must have one entry per node");

  std::vector<double> marginal(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& cond = dropoff_given_pickup[u];
    if (cond.size() == 0) {
      if (pickup[u] > 0.0)
        throw Error(ErrorCode::InvalidDistribution, "pickup node with mass has no dropoff distribution");
      continue;
    }
    if (cond.size() != n) throw Error(ErrorCode::DomainMismatch, "conditional dropoff support mismatch");
    for (std::size_t v = 0; v < n; ++v) marginal[v] += pickup[u] * cond[v];
  }

  DemandModel m;
  m.eta_ = std::move(eta);
  m.pickup_ = std::move(pickup);
  m.dropoff_given_pickup_ = std::move(dropoff_given_pickup);
  m.marginal_dropoff_ = Categorical::from_weights(std::move(marginal));
  if (initial_location) {
    if (initial_location->size() != n) throw Error(ErrorCode::DomainMismatch, "initial location support mismatch");
    m.initial_location_ = std::move(*initial_location);
  } else {
    m.initial_location_ = m.marginal_dropoff_;
  }
  return m;
}

const Categorical& DemandModel::dropoff_given_pickup(NodeId u) const {
  const auto& cond = dropoff_given_pickup_[static_cast<std::size_t>(u)];
  return cond.size() == 0 ? marginal_dropoff_ : cond;
}

DemandModel DemandModel::with_initial_location(Categorical initial) const {
  if (initial.size() != pickup_.size()) throw Error(ErrorCode::DomainMismatch, "initial location support mismatch");
  DemandModel m = *this;
  m.initial_location_ = std::move(initial);
  return m;
}

DemandModel estimate_from_trips(const TripLog& log, const CityGraph& graph) {
  if (log.trips.empty()) throw Error(ErrorCode::EmptyLog, "trip log has no trips");
  const auto n = static_cast<std::size_t>(graph.node_count());

  int horizon = log.horizon;
  for (const Trip& trip : log.trips) {
    if (!graph.valid_node(trip.pickup) || !graph.valid_node(trip.dropoff))
      throw Error(ErrorCode::InvalidNode, "trip references a node outside the graph");
    if (trip.t < 1) throw Error(ErrorCode::InvalidArgument, "trip time must be >= 1");
    if (log.horizon == 0) horizon = std::max(horizon, trip.t);
    else if (trip.t > log.horizon) throw Error(ErrorCode::InvalidArgument, "trip time beyond the log horizon");
  }

  std::vector<int> per_step(static_cast<std::size_t>(horizon), 0);
  std::vector<double> pickup(n, 0.0);
  std::vector<std::vector<double>> pair(n);
  for (const Trip& trip : log.trips) {
    ++per_step[static_cast<std::size_t>(trip.t - 1)];
    const auto u = static_cast<std::size_t>(trip.pickup);
    pickup[u] += 1.0;
    if (pair[u].empty()) pair[u].assign(n, 0.0);
    pair[u][static_cast<std::size_t>(trip.dropoff)] += 1.0;
  }

  const int max_count = *std::max_element(per_step.begin(), per_step.end());
  std::vector<double> eta(static_cast<std::size_t>(max_count) + 1, 0.0);
  for (int c : per_step) eta[static_cast<std::size_t>(c)] += 1.0;

  std::vector<Categorical> cond(n);
  for (std::size_t u = 0; u < n; ++u)
    if (!pair[u].empty()) cond[u] = Categorical::from_weights(std::move(pair[u]));

  return DemandModel::make(Categorical::from_weights(std::move(eta)), Categorical::from_weights(std::move(pickup)),
                           std::move(cond));
}

TripLog read_trip_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyLog, "trip log is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,pickup,dropoff") throw Error(ErrorCode::Parse, "trip log header must be \"t,pickup,dropoff\"");

  TripLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    long long t = 0, p = 0, d = 0;
    if (!(row >> t >> p >> d)) throw Error(ErrorCode::Parse, "malformed trip at line " + std::to_string(line_no));
    if (t < 1) throw Error(ErrorCode::Parse, "trip time must be >= 1 at line " + std::to_string(line_no));
    log.trips.push_back({static_cast<int>(t), static_cast<NodeId>(p - 1), static_cast<NodeId>(d - 1)});
  }
  return log;
}

TripLog load_trip_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trip log " + path);
  return read_trip_csv(in);
}

void write_trip_csv(std::ostream& out, const TripLog& log) {
  out << "t,pickup,dropoff\n";
  for (const Trip& trip : log.trips) out << trip.t << ',' << (trip.pickup + 1) << ',' << (trip.dropoff + 1) << '\n';
}

int sample_arrivals(const DemandModel& model, Rng& rng) { return static_cast<int>(model.eta().sample(rng)); }

Request sample_request(const DemandModel& model, int t, Rng& rng, RequestId id) {
  Request r;
  r.id = id;
  r.pickup = static_cast<NodeId>(model.pickup().sample(rng));
  r.dropoff = static_cast<NodeId>(model.dropoff_given_pickup(r.pickup).sample(rng));
  r.arrival_time = t;
  r.picked_up = false;
  return r;
}

std::vector<Request> certainty_equivalence_requests(const DemandModel& model, int t, int horizon, Rng& rng,
                                                    RequestId first_id) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "certainty-equivalence horizon must be >= 1");
  const long count = std::lround(static_cast<double>(horizon) * model.expected_arrivals());
  std::vector<Request> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, count)));
  for (long i = 0; i < count; ++i) {
    // Evenly spaced over (t, t + horizon]; the last one lands on t + horizon.
    const long offset = ((i + 1) * horizon + count - 1) / count;
    out.push_back(sample_request(model, t + static_cast<int>(offset), rng, first_id + i));
  }
  return out;
}

ExpectationTerms expectation_terms(const DemandModel& model, const CityGraph& graph) {
  if (model.node_count() != graph.node_count())
    throw Error(ErrorCode::DomainMismatch, "demand model and graph have different node counts");
  const NodeId n = graph.node_count();
  const auto& xi = model.initial_location();
  const auto& lrand = model.lrand();
  const auto& rho = model.pickup();

  ExpectationTerms e;
  e.arrivals = model.expected_arrivals();
  for (NodeId u = 0; u < n; ++u) {
    const double pxi = xi[static_cast<std::size_t>(u)];
    const double pl = lrand[static_cast<std::size_t>(u)];
    const double pr = rho[static_cast<std::size_t>(u)];
    const Categorical& cond = model.dropoff_given_pickup(u);
    for (NodeId v = 0; v < n; ++v) {
      const double d = graph.distance(u, v);
      const double qv = rho[static_cast<std::size_t>(v)];
      e.initial_to_pickup += pxi * qv * d;
      e.lrand_to_pickup += pl * qv * d;
      if (pr > 0.0) e.pickup_to_dropoff += pr * cond[static_cast<std::size_t>(v)] * d;
    }
  }
  return e;
}

Categorical bracketing_arrivals(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error(ErrorCode::InvalidArgument, "arrival rate must be >= 0");
  const double low = std::floor(rate);
  const double frac = rate - low;
  std::vector<double> w(static_cast<std::size_t>(low) + 2, 0.0);
  w[static_cast<std::size_t>(low)] = 1.0 - frac;
  w[static_cast<std::size_t>(low) + 1] = frac;
  if (frac == 0.0) w.pop_back();
  return Categorical::from_weights(std::move(w));
}

DemandModel synthetic_model(const CityGraph& graph, const SyntheticDemand& params) {
  if (!graph.has_coordinates()) throw Error(ErrorCode::MissingCoordinates, "synthetic demand needs node coordinates");
  const auto pts = graph.coordinates();
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const Point& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double extent = std::max({xmax - xmin, ymax - ymin, 1.0});
  const double sigma = params.hotspot_width * extent;

  auto bump = [&](Point h) {
    const Point c{xmin + h.x * (xmax - xmin), ymin + h.y * (ymax - ymin)};
    std::vector<double> w;
    w.reserve(pts.size());
    for (const Point& p : pts) {
      const double r2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
      w.push_back(1.0 + params.hotspot_gain * std::exp(-r2 / (2.0 * sigma * sigma)));
    }
    return Categorical::from_weights(std::move(w));
  };

  const Categorical pickup = bump(params.pickup_hotspot);
  const Categorical dropoff = bump(params.dropoff_hotspot);
  std::vector<Categorical> cond(pts.size(), dropoff);
  return DemandModel::make(bracketing_arrivals(params.arrival_rate), pickup, std::move(cond));
}

TripLog generate_trips(const DemandModel& model, int horizon, std::uint64_t seed) {
  Rng rng(seed);
  TripLog log;
  log.horizon = horizon;
  for (int t = 1; t <= horizon; ++t) {
    const int count = sample_arrivals(model, rng);
    for (int i = 0; i < count; ++i) {
      const Request r = sample_request(model, t, rng);
      log.trips.push_back({t, r.pickup, r.dropoff});
    }
  }
  return log;
}

}  // namespace fleetroll
