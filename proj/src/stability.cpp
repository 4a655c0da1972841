#include "fleetroll/stability.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include "json.hpp"
#include <queue>
#include <sstream>

#include "fleetroll/error.hpp"
#include "fleetroll/stats.hpp"

namespace fleetroll {

double TransportPlan::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < targets; ++j) s += at(i, j);
  return s;
}

double TransportPlan::col_sum(std::size_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < sources; ++i) s += at(i, j);
  return s;
}

namespace {

struct Arc {
  int to;
  int rev;
  double cap;
  double cost;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)) {}

  int add(int from, int to, double cap, double cost) {
    auto& a = adj_[static_cast<std::size_t>(from)];
    auto& b = adj_[static_cast<std::size_t>(to)];
    a.push_back({to, static_cast<int>(b.size()), cap, cost});
    b.push_back({from, static_cast<int>(a.size()) - 1, 0.0, -cost});
    return static_cast<int>(a.size()) - 1;
  }

  const Arc& arc(int from, int idx) const { return adj_[static_cast<std::size_t>(from)][static_cast<std::size_t>(idx)]; }

  // Pushes up to `want` units from s to t along successive shortest paths.
  double min_cost_flow(int s, int t, double want, double cap_eps) {
    const auto n = adj_.size();
    std::vector<double> pot(n, 0.0), dist(n);
    std::vector<int> prev_node(n), prev_arc(n);
    double sent = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    while (sent < want - cap_eps) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[static_cast<std::size_t>(s)] = 0.0;
      using Item = std::pair<double, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      heap.push({0.0, s});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[static_cast<std::size_t>(u)]) continue;
        const auto& out = adj_[static_cast<std::size_t>(u)];
        for (std::size_t e = 0; e < out.size(); ++e) {
          const Arc& a = out[e];
          if (a.cap <= cap_eps) continue;
          const double rc = std::max(0.0, a.cost + pot[static_cast<std::size_t>(u)] - pot[static_cast<std::size_t>(a.to)]);
          const double nd = d + rc;
          if (nd < dist[static_cast<std::size_t>(a.to)]) {
            dist[static_cast<std::size_t>(a.to)] = nd;
            prev_node[static_cast<std::size_t>(a.to)] = u;
            prev_arc[static_cast<std::size_t>(a.to)] = static_cast<int>(e);
            heap.push({nd, a.to});
          }
        }
      }
      if (dist[static_cast<std::size_t>(t)] == inf) break;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] < inf) pot[v] += dist[v];
      double push = want - sent;
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)])
        push = std::min(push, arc(prev_node[static_cast<std::size_t>(v)], prev_arc[static_cast<std::size_t>(v)]).cap);
      for (int v = t; v != s; v = prev_node[static_cast<std::size_t>(v)]) {
        Arc& a = adj_[static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)])]
                     [static_cast<std::size_t>(prev_arc[static_cast<std::size_t>(v)])];
        a.cap -= push;
        adj_[static_cast<std::size_t>(a.to)][static_cast<std::size_t>(a.rev)].cap += push;
      }
      sent += push;
    }
    return sent;
  }

 private:
  std::vector<std::vector<Arc>> adj_;
};

void check_pmf(std::span<const double> p, const char* name) {
  for (double v : p)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidDistribution, std::string(name) + " has a negative or non-finite mass");
}

}  // namespace

WassersteinResult wasserstein_discrete(std::span<const double> p, std::span<const double> q, const GroundCost& cost) {
  check_pmf(p, "source pmf");
  check_pmf(q, "target pmf");
  double sp = 0.0, sq = 0.0;
  for (double v : p) sp += v;
  for (double v : q) sq += v;
  if (std::abs(sp - sq) > 1e-9 * std::max(1.0, std::max(sp, sq)))
    throw Error(ErrorCode::MarginalMismatch, "pmfs have different total mass");

  std::vector<std::size_t> src, dst;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) src.push_back(i);
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) dst.push_back(j);

  WassersteinResult out;
  out.plan.sources = p.size();
  out.plan.targets = q.size();
  out.plan.gamma.assign(p.size() * q.size(), 0.0);
  if (src.empty() || dst.empty()) return out;

  const int S = 0;
  const int T = 1 + static_cast<int>(src.size() + dst.size());
  FlowNetwork net(T + 1);
  const double total = std::min(sp, sq);
  for (std::size_t a = 0; a < src.size(); ++a) net.add(S, 1 + static_cast<int>(a), p[src[a]], 0.0);
  for (std::size_t b = 0; b < dst.size(); ++b)
    net.add(1 + static_cast<int>(src.size() + b), T, q[dst[b]], 0.0);
  std::vector<std::vector<int>> arc_of(src.size(), std::vector<int>(dst.size()));
  for (std::size_t a = 0; a < src.size(); ++a)
    for (std::size_t b = 0; b < dst.size(); ++b) {
      const double c = cost(src[a], dst[b]);
      if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "ground cost must be nonnegative");
      arc_of[a][b] = net.add(1 + static_cast<int>(a), 1 + static_cast<int>(src.size() + b), total, c);
    }
  net.min_cost_flow(S, T, total, 1e-15 * std::max(1.0, total));

  for (std::size_t a = 0; a < src.size(); ++a)
    for (std::size_t b = 0; b < dst.size(); ++b) {
      const double flow = total - net.arc(1 + static_cast<int>(a), arc_of[a][b]).cap;
      if (flow <= 0.0) continue;
      out.plan.gamma[src[a] * q.size() + dst[b]] = flow;
      out.plan.total_cost += flow * cost(src[a], dst[b]);
    }
  out.value = out.plan.total_cost;
  return out;
}

std::string_view to_string(Metric m) { return m == Metric::Graph ? "graph" : "euclidean"; }

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "graph") return Metric::Graph;
  if (name == "euclidean") return Metric::Euclidean;
  return std::nullopt;
}

StabilityReport compute_bounds(const ExpectationTerms& terms, double wasserstein, Metric metric) {
  StabilityReport r;
  r.terms = terms;
  r.metric = metric;
  r.wasserstein = wasserstein;
  r.D_max = std::max(terms.initial_to_pickup, terms.lrand_to_pickup) + terms.pickup_to_dropoff;
  r.D_min = wasserstein + terms.pickup_to_dropoff;
  // Guard the ceiling against products that land a rounding error above an integer.
  const double suff = terms.arrivals * r.D_max;
  r.m_sufficient = static_cast<int>(std::ceil(suff - 1e-9 * std::max(1.0, suff)));
  r.instability_threshold = terms.arrivals * r.D_min;
  r.min_candidate_fleet = static_cast<int>(std::floor(r.instability_threshold)) + 1;
  return r;
}

StabilityReport compute_bounds(const DemandModel& model, const CityGraph& graph, Metric metric) {
  const ExpectationTerms terms = expectation_terms(model, graph);
  GroundCost cost;
  if (metric == Metric::Euclidean) {
    if (!graph.has_coordinates())
      throw Error(ErrorCode::MissingCoordinates, "the euclidean metric needs node coordinates");
    const auto xy = graph.coordinates();
    cost = [xy](std::size_t i, std::size_t j) { return std::hypot(xy[i].x - xy[j].x, xy[i].y - xy[j].y); };
  } else {
    cost = [&graph](std::size_t i, std::size_t j) {
      return static_cast<double>(graph.distance(static_cast<NodeId>(i), static_cast<NodeId>(j)));
    };
  }
  const auto wd = wasserstein_discrete(model.marginal_dropoff().masses(), model.pickup().masses(), cost);
  return compute_bounds(terms, wd.value, metric);
}

std::string stability_report_json(const StabilityReport& r) {
  nlohmann::ordered_json j;
  j["E_eta"] = r.terms.arrivals;
  j["E_d_initial_pickup"] = r.terms.initial_to_pickup;
  j["E_d_lrand_pickup"] = r.terms.lrand_to_pickup;
  j["E_d_pickup_dropoff"] = r.terms.pickup_to_dropoff;
  j["metric"] = std::string(to_string(r.metric));
  j["WD"] = r.wasserstein;
  j["D_max"] = r.D_max;
  j["D_min"] = r.D_min;
  j["m_sufficient"] = r.m_sufficient;
  j["instability_threshold"] = r.instability_threshold;
  j["min_candidate_fleet"] = r.min_candidate_fleet;
  return j.dump(2);
}

std::string stability_report_table(const StabilityReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  auto row = [&os](const char* k, double v) { os << std::left << std::setw(28) << k << v << '\n'; };
  row("E[eta]", r.terms.arrivals);
  row("E[d(xi,rho)]", r.terms.initial_to_pickup);
  row("E[d(l_rand,rho)]", r.terms.lrand_to_pickup);
  row("E[d(rho,delta)]", r.terms.pickup_to_dropoff);
  os << std::left << std::setw(28) << "metric" << to_string(r.metric) << '\n';
  row("WD(p_delta,p_rho)", r.wasserstein);
  row("D_max", r.D_max);
  row("D_min", r.D_min);
  os << std::left << std::setw(28) << "m_sufficient (m >=)" << r.m_sufficient << '\n';
  row("unstable below (m <)", r.instability_threshold);
  os << std::left << std::setw(28) << "smallest fleet above" << r.min_candidate_fleet << '\n';
  return os.str();
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable: return "STABLE";
    case Verdict::Unstable: return "UNSTABLE";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

StabilityVerdict empirical_stability(std::span<const EpisodeTrace> traces, int window) {
  if (traces.size() < 5) throw Error(ErrorCode::TooFewTraces, "empirical stability needs at least 5 traces");
  const int T = traces.front().horizon;
  for (const auto& tr : traces)
    if (tr.horizon != T || static_cast<int>(tr.steps.size()) != T)
      throw Error(ErrorCode::InvalidArgument, "traces must share the same horizon");
  if (window < 1 || 2 * window > T) throw Error(ErrorCode::InvalidArgument, "window must be in [1, T/2]");

  StabilityVerdict v;
  v.traces = static_cast<int>(traces.size());
  v.window = window;
  std::vector<double> first, last, xs, ys;
  for (const auto& tr : traces) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < window; ++i) {
      a += tr.steps[static_cast<std::size_t>(i)].outstanding;
      b += tr.steps[static_cast<std::size_t>(T - window + i)].outstanding;
    }
    first.push_back(a / window);
    last.push_back(b / window);
    for (const StepRecord& s : tr.steps) {
      xs.push_back(s.t);
      ys.push_back(s.outstanding);
    }
  }
  v.first_window_mean = mean(first);
  v.last_window_mean = mean(last);
  v.pooled_std_error = std::sqrt(std::pow(std_error(first), 2) + std::pow(std_error(last), 2));
  const SlopeTest slope = slope_test(xs, ys);
  v.slope = slope.slope;
  v.slope_p = slope.p_positive;
  if (v.last_window_mean <= v.first_window_mean + 2.0 * v.pooled_std_error)
    v.verdict = Verdict::Stable;
  else if (slope.slope > 0 && slope.p_positive < 0.05)
    v.verdict = Verdict::Unstable;
  return v;
}

}  // namespace fleetroll
