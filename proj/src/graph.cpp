#include "fleetroll/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fleetroll/error.hpp"

namespace fleetroll {

DistanceOracle::DistanceOracle(const std::vector<std::vector<NodeId>>& out_neighbors)
    : n_(static_cast<NodeId>(out_neighbors.size())) {
  const auto n = static_cast<std::size_t>(n_);
  dist_.assign(n * n, kUnreachable);
  hop_.assign(n * n, kNoNode);

  std::vector<NodeId> queue(n);
  for (NodeId s = 0; s < n_; ++s) {
    std::int32_t* row = dist_.data() + static_cast<std::size_t>(s) * n;
    std::size_t head = 0, tail = 0;
    row[s] = 0;
    queue[tail++] = s;
    while (head < tail) {
      const NodeId u = queue[head++];
      for (NodeId w : out_neighbors[static_cast<std::size_t>(u)]) {
        if (row[w] == kUnreachable) {
          row[w] = row[u] + 1;
          queue[tail++] = w;
        }
      }
    }
    if (tail != n) unreachable_ = true;
  }

  // Next hop from i toward j: smallest-index neighbor k with d(k, j) = d(i, j) - 1.
  for (NodeId i = 0; i < n_; ++i) {
    for (NodeId j = 0; j < n_; ++j) {
      const int dij = distance(i, j);
      if (i == j || dij == kUnreachable) continue;
      for (NodeId k : out_neighbors[static_cast<std::size_t>(i)]) {
        if (distance(k, j) == dij - 1) {
          hop_[index(i, j)] = k;
          break;
        }
      }
    }
  }
}

CityGraph CityGraph::build(const GraphSpec& spec) {
  if (spec.node_count < 1) throw Error(ErrorCode::InvalidArgument, "graph needs at least one node");
  const auto n = static_cast<std::size_t>(spec.node_count);
  if (!spec.coordinates.empty() && spec.coordinates.size() != n)
    throw Error(ErrorCode::InvalidArgument, "coordinate count does not match node count");

  CityGraph g;
  g.neighbors_.resize(n);
  for (const auto& [i, j] : spec.edges) {
    if (i < 0 || j < 0 || i >= spec.node_count || j >= spec.node_count)
      throw Error(ErrorCode::InvalidEdge,
                  "edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ") has an endpoint out of range");
    if (i == j) throw Error(ErrorCode::InvalidEdge, "self-loop at node " + std::to_string(i + 1));
    g.neighbors_[static_cast<std::size_t>(i)].push_back(j);
  }
  for (auto& adj : g.neighbors_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    g.edge_count_ += adj.size();
  }
  g.coordinates_ = spec.coordinates;

  auto oracle = std::make_shared<DistanceOracle>(g.neighbors_);
  if (oracle->has_unreachable()) {
    for (NodeId i = 0; i < spec.node_count; ++i)
      for (NodeId j = 0; j < spec.node_count; ++j)
        if (oracle->distance(i, j) == DistanceOracle::kUnreachable)
          throw Error(ErrorCode::NotStronglyConnected,
                      "node " + std::to_string(j + 1) + " is unreachable from node " + std::to_string(i + 1));
  }
  g.oracle_ = std::move(oracle);
  return g;
}

bool CityGraph::has_edge(NodeId i, NodeId j) const {
  auto adj = neighbors(i);
  return std::binary_search(adj.begin(), adj.end(), j);
}

NodeId CityGraph::next_hop(NodeId i, NodeId j) const {
  if (i == j) throw Error(ErrorCode::SameNode, "next_hop requires distinct nodes");
  return oracle_->next_hop(i, j);
}

std::vector<NodeId> CityGraph::shortest_path(NodeId from, NodeId to) const {
  std::vector<NodeId> path;
  path.reserve(static_cast<std::size_t>(distance(from, to)));
  for (NodeId v = from; v != to;) {
    v = oracle_->next_hop(v, to);
    path.push_back(v);
  }
  return path;
}

int CityGraph::sector(NodeId v) const {
  if (sector_of_.empty()) throw Error(ErrorCode::SectorsUnassigned, "graph has no sector labels");
  return sector_of_[static_cast<std::size_t>(v)];
}

CityGraph CityGraph::with_sectors(std::vector<int> sector_of) const {
  if (sector_of.size() != neighbors_.size())
    throw Error(ErrorCode::InvalidArgument, "sector labels must cover every node");
  int k = 0;
  for (int s : sector_of) {
    if (s < 0) throw Error(ErrorCode::InvalidArgument, "negative sector id");
    k = std::max(k, s + 1);
  }
  std::vector<int> size(static_cast<std::size_t>(k), 0);
  for (int s : sector_of) ++size[static_cast<std::size_t>(s)];
  for (int s = 0; s < k; ++s)
    if (size[static_cast<std::size_t>(s)] == 0)
      throw Error(ErrorCode::InvalidArgument, "sector " + std::to_string(s + 1) + " is empty");

  CityGraph g = *this;
  g.sector_of_ = std::move(sector_of);
  g.sector_count_ = k;
  return g;
}

NodeId CityGraph::next_hop_in_partition(NodeId from, NodeId to) const {
  const int target = sector(to);
  if (sector(from) == target) throw Error(ErrorCode::SameSector, "endpoints lie in the same sector");
  // A node v lies on some shortest from->to path iff d(from,v) + d(v,to) = d(from,to).
  const int total = distance(from, to);
  NodeId best = kNoNode;
  int best_d = 0;
  for (NodeId v = 0; v < node_count(); ++v) {
    if (sector_of_[static_cast<std::size_t>(v)] != target) continue;
    const int dv = distance(from, v);
    if (dv + distance(v, to) != total) continue;
    if (best == kNoNode || dv < best_d) {
      best = v;
      best_d = dv;
    }
  }
  return best;
}

GraphSpec CityGraph::spec() const {
  GraphSpec s;
  s.node_count = node_count();
  for (NodeId i = 0; i < node_count(); ++i)
    for (NodeId j : neighbors(i)) s.edges.emplace_back(i, j);
  s.coordinates = coordinates_;
  return s;
}

GraphSpec grid_spec(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
  GraphSpec s;
  s.node_count = k * k;
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      const NodeId v = r * k + c;
      s.coordinates.push_back({static_cast<double>(c), static_cast<double>(r)});
      if (c + 1 < k) {
        s.edges.emplace_back(v, v + 1);
        s.edges.emplace_back(v + 1, v);
      }
      if (r + 1 < k) {
        s.edges.emplace_back(v, v + k);
        s.edges.emplace_back(v + k, v);
      }
    }
  }
  return s;
}

namespace {

std::string next_content_line(std::istream& in, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return line;
  }
  return {};
}

}  // namespace

GraphSpec read_edge_list(std::istream& in) {
  std::size_t line_no = 0;
  std::istringstream header(next_content_line(in, line_no));
  long long n = 0, m = 0;
  if (!(header >> n >> m) || n < 1 || m < 0)
    throw Error(ErrorCode::Parse, "edge list header must be \"n m_edges\" with n >= 1");

  GraphSpec spec;
  spec.node_count = static_cast<NodeId>(n);
  spec.edges.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    const std::string line = next_content_line(in, line_no);
    std::istringstream row(line);
    long long i = 0, j = 0;
    if (line.empty() || !(row >> i >> j))
      throw Error(ErrorCode::Parse, "expected edge \"i j\" at line " + std::to_string(line_no));
    std::string extra;
    if (row >> extra)
      throw Error(ErrorCode::InvalidEdge, "weighted edges are not supported (line " + std::to_string(line_no) + ")");
    spec.edges.emplace_back(static_cast<NodeId>(i - 1), static_cast<NodeId>(j - 1));
  }
  return spec;
}

void write_edge_list(std::ostream& out, const GraphSpec& spec) {
  out << spec.node_count << ' ' << spec.edges.size() << '\n';
  for (const auto& [i, j] : spec.edges) out << (i + 1) << ' ' << (j + 1) << '\n';
}

GraphSpec load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open graph file " + path);
  return read_edge_list(in);
}

std::vector<Point> read_coordinates(std::istream& in, NodeId node_count) {
  std::vector<Point> pts(static_cast<std::size_t>(node_count));
  std::vector<bool> seen(pts.size(), false);
  std::size_t line_no = 0;
  for (std::string line = next_content_line(in, line_no); !line.empty(); line = next_content_line(in, line_no)) {
    std::istringstream row(line);
    long long i = 0;
    Point p;
    if (!(row >> i >> p.x >> p.y)) throw Error(ErrorCode::Parse, "expected \"i x y\" at line " + std::to_string(line_no));
    if (i < 1 || i > node_count) throw Error(ErrorCode::InvalidNode, "coordinate for unknown node " + std::to_string(i));
    pts[static_cast<std::size_t>(i - 1)] = p;
    seen[static_cast<std::size_t>(i - 1)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorCode::MissingCoordinates, "coordinates file does not cover every node");
  return pts;
}

void write_coordinates(std::ostream& out, std::span<const Point> coordinates) {
  for (std::size_t i = 0; i < coordinates.size(); ++i)
    out << (i + 1) << ' ' << coordinates[i].x << ' ' << coordinates[i].y << '\n';
}

}  // namespace fleetroll
