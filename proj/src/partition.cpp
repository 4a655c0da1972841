#include "fleetroll/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "fleetroll/error.hpp"

namespace fleetroll {

namespace {

constexpr double kMassEps = 1e-12;

// Cost of serving `remaining` demand from c nearest-first up to `capacity`.
double fill_cost(const CityGraph& g, NodeId c, const std::vector<double>& remaining, double capacity,
                 std::vector<double>* served) {
  const NodeId n = g.node_count();
  std::vector<NodeId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return g.distance(c, a) < g.distance(c, b); });
  double left = capacity;
  double cost = 0.0;
  for (NodeId v : order) {
    if (left <= kMassEps) break;
    const double take = std::min(left, remaining[static_cast<std::size_t>(v)]);
    if (take <= 0.0) continue;
    cost += take * g.distance(c, v);
    left -= take;
    if (served) (*served)[static_cast<std::size_t>(v)] += take;
  }
  return cost;
}

std::vector<NodeId> facility_location(const CityGraph& g, const std::vector<double>& demand, int K) {
  const NodeId n = g.node_count();
  const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
  const double capacity = total / K;
  std::vector<double> remaining = demand;
  std::vector<char> open(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> centers;
  while (static_cast<int>(centers.size()) < K) {
    const double left = std::accumulate(remaining.begin(), remaining.end(), 0.0);
    NodeId pick = kNoNode;
    if (left > kMassEps * std::max(1.0, total)) {
      double best = std::numeric_limits<double>::infinity();
      for (NodeId c = 0; c < n; ++c) {
        if (open[static_cast<std::size_t>(c)]) continue;
        const double cost = fill_cost(g, c, remaining, capacity, nullptr);
        if (cost < best) {
          best = cost;
          pick = c;
        }
      }
    } else {
      // No demand left to place: spread the remaining centers out.
      int far = -1;
      for (NodeId c = 0; c < n; ++c) {
        if (open[static_cast<std::size_t>(c)]) continue;
        int nearest = std::numeric_limits<int>::max();
        for (NodeId o : centers) nearest = std::min(nearest, g.distance(o, c));
        if (centers.empty()) nearest = 0;
        if (nearest > far) {
          far = nearest;
          pick = c;
        }
      }
    }
    std::vector<double> served(static_cast<std::size_t>(n), 0.0);
    fill_cost(g, pick, remaining, capacity, &served);
    for (std::size_t v = 0; v < remaining.size(); ++v) remaining[v] = std::max(0.0, remaining[v] - served[v]);
    open[static_cast<std::size_t>(pick)] = 1;
    centers.push_back(pick);
  }
  return centers;
}

std::vector<int> assign_nearest(const CityGraph& g, const std::vector<NodeId>& centers) {
  std::vector<int> out(static_cast<std::size_t>(g.node_count()), 0);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    int best = -1;
    for (int k = 0; k < static_cast<int>(centers.size()); ++k) {
      const NodeId c = centers[static_cast<std::size_t>(k)];
      if (best < 0) {
        best = k;
        continue;
      }
      const NodeId cb = centers[static_cast<std::size_t>(best)];
      const int dk = g.distance(c, v);
      const int db = g.distance(cb, v);
      if (dk < db || (dk == db && c < cb)) best = k;
    }
    out[static_cast<std::size_t>(v)] = best;
  }
  return out;
}

double objective(const CityGraph& g, const std::vector<double>& w, const std::vector<NodeId>& centers,
                 const std::vector<int>& assignment) {
  double s = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v)
    s += w[static_cast<std::size_t>(v)] *
         g.distance(centers[static_cast<std::size_t>(assignment[static_cast<std::size_t>(v)])], v);
  return s;
}

}  // namespace

std::vector<NodeId> PartitionSpec::members(int k) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < assignment.size(); ++v)
    if (assignment[v] == k) out.push_back(static_cast<NodeId>(v));
  return out;
}

int sector_count(int m, int m_lim) {
  if (m < 1 || m_lim < 1) throw Error(ErrorCode::InvalidArgument, "fleet size and m_lim must be >= 1");
  return (m + m_lim - 1) / m_lim;
}

PartitionSpec get_partitions(const CityGraph& graph, const DemandModel& model, int m_lim, int K, int max_iterations) {
  const NodeId n = graph.node_count();
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (m_lim < 1) throw Error(ErrorCode::InvalidArgument, "m_lim must be >= 1");
  if (K > n)
    throw Error(ErrorCode::KExceedsNodes, "K=" + std::to_string(K) + " exceeds node count " + std::to_string(n));
  if (model.node_count() != n) throw Error(ErrorCode::DomainMismatch, "demand model and graph differ in node count");

  std::vector<double> w(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) w[static_cast<std::size_t>(v)] = model.pickup()[static_cast<std::size_t>(v)];

  PartitionSpec spec;
  spec.K = K;
  spec.m_lim = m_lim;
  spec.centers = facility_location(graph, w, K);
  spec.assignment = assign_nearest(graph, spec.centers);

  for (int it = 0; it < max_iterations; ++it) {
    std::vector<NodeId> next = spec.centers;
    for (int k = 0; k < K; ++k) {
      const auto members = spec.members(k);
      double best = std::numeric_limits<double>::infinity();
      for (NodeId c : members) {
        double s = 0.0;
        for (NodeId v : members) s += w[static_cast<std::size_t>(v)] * graph.distance(c, v);
        if (s < best - 1e-12) {
          best = s;
          next[static_cast<std::size_t>(k)] = c;
        }
      }
      // Keep the current center on ties so the objective cannot oscillate.
      double cur = 0.0;
      for (NodeId v : members) cur += w[static_cast<std::size_t>(v)] * graph.distance(spec.centers[k], v);
      if (cur <= best + 1e-12) next[static_cast<std::size_t>(k)] = spec.centers[k];
    }
    auto assignment = assign_nearest(graph, next);
    const bool fixed = next == spec.centers && assignment == spec.assignment;
    spec.centers = std::move(next);
    spec.assignment = std::move(assignment);
    spec.objective_history.push_back(objective(graph, w, spec.centers, spec.assignment));
    if (fixed) break;
  }
  if (spec.objective_history.empty())
    spec.objective_history.push_back(objective(graph, w, spec.centers, spec.assignment));
  return spec;
}

int sector_of(const PartitionSpec& spec, NodeId v) {
  if (v < 0 || static_cast<std::size_t>(v) >= spec.assignment.size())
    throw Error(ErrorCode::InvalidNode, "node " + std::to_string(v + 1) + " is outside the partition");
  return spec.sector_of(v);
}

void write_partition_csv(std::ostream& out, const PartitionSpec& spec) {
  out << "node,sector,center\n";
  for (std::size_t v = 0; v < spec.assignment.size(); ++v) {
    const bool is_center =
        std::find(spec.centers.begin(), spec.centers.end(), static_cast<NodeId>(v)) != spec.centers.end();
    out << v + 1 << ',' << spec.assignment[v] + 1 << ',' << (is_center ? 1 : 0) << '\n';
  }
}

}  // namespace fleetroll
