#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fleetroll {

/// Node index, 0-based internally; files and the CLI use 1-based indices.
using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct GraphSpec {
  NodeId node_count = 0;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<Point> coordinates;  // empty or one per node
};

/// All-pairs hop distances and shortest-path next hops on a unit-weight
/// directed graph. Immutable once built.
class DistanceOracle {
 public:
  DistanceOracle() = default;
  explicit DistanceOracle(const std::vector<std::vector<NodeId>>& out_neighbors);

  NodeId node_count() const { return n_; }
  int distance(NodeId i, NodeId j) const { return dist_[index(i, j)]; }
  /// Neighbor of i on a shortest path to j, smallest index among ties. kNoNode when i == j.
  NodeId next_hop(NodeId i, NodeId j) const { return hop_[index(i, j)]; }
  /// Some pair is unreachable.
  bool has_unreachable() const { return unreachable_; }

  static constexpr int kUnreachable = -1;

 private:
  std::size_t index(NodeId i, NodeId j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }

  NodeId n_ = 0;
  std::vector<std::int32_t> dist_;
  std::vector<NodeId> hop_;
  bool unreachable_ = false;
};

/// Strongly connected street network with unit travel time per edge.
class CityGraph {
 public:
  /// Validates endpoints and strong connectivity, then precomputes all-pairs distances.
  static CityGraph build(const GraphSpec& spec);

  NodeId node_count() const { return static_cast<NodeId>(neighbors_.size()); }
  std::size_t edge_count() const { return edge_count_; }
  bool valid_node(NodeId v) const { return v >= 0 && v < node_count(); }

  /// Out-neighbors, ascending.
  std::span<const NodeId> neighbors(NodeId v) const { return neighbors_[static_cast<std::size_t>(v)]; }
  bool has_edge(NodeId i, NodeId j) const;

  int distance(NodeId i, NodeId j) const { return oracle_->distance(i, j); }
  const DistanceOracle& oracle() const { return *oracle_; }

  /// Throws SameNode when i == j.
  NodeId next_hop(NodeId i, NodeId j) const;
  /// Nodes visited walking next hops from i to j, excluding i, ending with j.
  std::vector<NodeId> shortest_path(NodeId from, NodeId to) const;

  bool has_coordinates() const { return !coordinates_.empty(); }
  std::span<const Point> coordinates() const { return coordinates_; }

  bool has_sectors() const { return !sector_of_.empty(); }
  int sector_count() const { return sector_count_; }
  /// 0-based sector id. Throws SectorsUnassigned if no sectors are attached.
  int sector(NodeId v) const;
  std::span<const int> sectors() const { return sector_of_; }

  /// Copy sharing the distance oracle, with sectors attached. Sectors must be
  /// 0..K-1, each nonempty.
  CityGraph with_sectors(std::vector<int> sector_of) const;

  /// Boundary entry node: among nodes of sector(to) lying on some shortest
  /// from->to path, the one closest to `from`; ties by smallest index.
  NodeId next_hop_in_partition(NodeId from, NodeId to) const;

  GraphSpec spec() const;

 private:
  CityGraph() = default;

  std::vector<std::vector<NodeId>> neighbors_;
  std::size_t edge_count_ = 0;
  std::vector<Point> coordinates_;
  std::vector<int> sector_of_;
  int sector_count_ = 0;
  std::shared_ptr<const DistanceOracle> oracle_;
};

/// k x k grid with bidirectional edges; node (row r, col c) has index r*k + c
/// and coordinates (c, r).
GraphSpec grid_spec(int k);

/// Edge-list text format: "n m" then m lines "i j", 1-indexed.
GraphSpec read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const GraphSpec& spec);
GraphSpec load_edge_list(const std::string& path);

/// Coordinates text format: one "i x y" line per node, 1-indexed.
std::vector<Point> read_coordinates(std::istream& in, NodeId node_count);
void write_coordinates(std::ostream& out, std::span<const Point> coordinates);

}  // namespace fleetroll
