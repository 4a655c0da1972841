#pragma once

#include <optional>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/sim.hpp"

namespace testing_support {

using namespace fleetroll;

/// Bidirectional path 0-1-...-(n-1) with coordinates (i, 0).
inline CityGraph line_graph(int n) {
  GraphSpec s;
  s.node_count = n;
  for (int i = 0; i + 1 < n; ++i) {
    s.edges.push_back({i, i + 1});
    s.edges.push_back({i + 1, i});
  }
  for (int i = 0; i < n; ++i) s.coordinates.push_back({static_cast<double>(i), 0.0});
  return CityGraph::build(s);
}

inline CityGraph grid(int k) { return CityGraph::build(grid_spec(k)); }

inline Categorical uniform(int n) { return Categorical::from_weights(std::vector<double>(static_cast<std::size_t>(n), 1.0)); }

/// Demand model with no arrivals at all.
inline DemandModel zero_demand(int n) {
  return DemandModel::make(Categorical::point(1, 0), uniform(n), std::vector<Categorical>(static_cast<std::size_t>(n), uniform(n)));
}

inline DemandModel uniform_demand(int n, double rate) {
  return DemandModel::make(bracketing_arrivals(rate), uniform(n), std::vector<Categorical>(static_cast<std::size_t>(n), uniform(n)));
}

inline FleetState free_fleet(std::vector<NodeId> at, int clock = 1) {
  FleetState x;
  x.clock = clock;
  for (NodeId v : at) x.add_taxi(v);
  return x;
}

inline Request request(RequestId id, NodeId pickup, NodeId dropoff, int t = 1) {
  Request r;
  r.id = id;
  r.pickup = pickup;
  r.dropoff = dropoff;
  r.arrival_time = t;
  return r;
}

}  // namespace testing_support
