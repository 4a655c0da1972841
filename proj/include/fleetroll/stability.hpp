#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fleetroll/demand.hpp"
#include "fleetroll/graph.hpp"
#include "fleetroll/sim.hpp"

namespace fleetroll {

struct TransportPlan {
  std::size_t sources = 0;
  std::size_t targets = 0;
  std::vector<double> gamma;  // row-major sources x targets
  double total_cost = 0.0;

  double at(std::size_t i, std::size_t j) const { return gamma[i * targets + j]; }
  double row_sum(std::size_t i) const;
  double col_sum(std::size_t j) const;
};

struct WassersteinResult {
  double value = 0.0;
  TransportPlan plan;
};

using GroundCost = std::function<double(std::size_t, std::size_t)>;

/// Exact optimal transport between pmfs p and q (same length) by successive
/// shortest paths on the bipartite support graph.
WassersteinResult wasserstein_discrete(std::span<const double> p, std::span<const double> q, const GroundCost& cost);

enum class Metric { Graph, Euclidean };

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

struct StabilityReport {
  ExpectationTerms terms;
  Metric metric = Metric::Graph;
  double wasserstein = 0.0;  // WD(p_dropoff, p_pickup)
  double D_max = 0.0;
  double D_min = 0.0;
  int m_sufficient = 0;          // ceil(E[eta] D_max)
  double instability_threshold = 0.0;  // E[eta] D_min; fleets below it are unstable
  int min_candidate_fleet = 0;   // smallest integer strictly above the threshold

  double E_eta() const { return terms.arrivals; }
};

StabilityReport compute_bounds(const ExpectationTerms& terms, double wasserstein, Metric metric = Metric::Graph);
StabilityReport compute_bounds(const DemandModel& model, const CityGraph& graph, Metric metric = Metric::Graph);

std::string stability_report_json(const StabilityReport& report);
std::string stability_report_table(const StabilityReport& report);

enum class Verdict { Stable, Unstable, Inconclusive };

std::string_view to_string(Verdict v);

struct StabilityVerdict {
  Verdict verdict = Verdict::Inconclusive;
  double first_window_mean = 0.0;
  double last_window_mean = 0.0;
  double pooled_std_error = 0.0;
  double slope = 0.0;
  double slope_p = 1.0;
  int traces = 0;
  int window = 0;
};

/// Compares mean outstanding requests in the first and last `window` steps
/// across traces, falling back to a pooled trend test.
StabilityVerdict empirical_stability(std::span<const EpisodeTrace> traces, int window);

}  // namespace fleetroll
