#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"

namespace fleetroll {

struct PartitionSpec {
  int K = 1;
  int m_lim = 1;
  std::vector<NodeId> centers;          // centers[k] for sector k (0-based)
  std::vector<int> assignment;          // node -> sector (0-based)
  std::vector<double> objective_history;  // sum_v p(v) d(center(v), v) after each k-medoids iteration

  int sector_of(NodeId v) const { return assignment[static_cast<std::size_t>(v)]; }
  std::vector<NodeId> members(int k) const;
};

/// Number of sectors for a fleet of m taxis with at most m_lim per sector.
int sector_count(int m, int m_lim);

/// Greedy capacitated facility location for the initial centers, then
/// weighted k-medoids on graph distance. Deterministic; ties go to the
/// smallest node index.
PartitionSpec get_partitions(const CityGraph& graph, const DemandModel& model, int m_lim, int K,
                             int max_iterations = 100);

int sector_of(const PartitionSpec& spec, NodeId v);

/// CSV "node,sector,center" with 1-based ids; center is 1 for center nodes.
void write_partition_csv(std::ostream& out, const PartitionSpec& spec);

}  // namespace fleetroll
