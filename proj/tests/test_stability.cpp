#include <cmath>

#include "doctest.h"
#include "fleetroll/error.hpp"
#include "fleetroll/policies.hpp"
#include "fleetroll/rng.hpp"
#include "fleetroll/stability.hpp"
#include "fleetroll/stats.hpp"
#include "helpers.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace fleetroll;
using namespace testing_support;

namespace {

GroundCost line_cost() {
  return [](std::size_t i, std::size_t j) { return std::abs(static_cast<double>(i) - static_cast<double>(j)); };
}

std::vector<double> random_pmf(Rng& rng, std::size_t n, std::size_t support) {
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < support; ++k) p[rng.below(n)] += rng.uniform() + 0.05;
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

EpisodeTrace constant_trace(int T, const std::function<int(int)>& outstanding) {
  EpisodeTrace tr;
  tr.horizon = T;
  for (int t = 1; t <= T; ++t) {
    StepRecord s;
    s.t = t;
    s.outstanding = outstanding(t);
    tr.steps.push_back(s);
  }
  return tr;
}

}  // namespace

TEST_CASE("identical pmfs cost nothing and use the identity plan") {
  const std::vector<double> p{0.2, 0.5, 0.3};
  const WassersteinResult r = wasserstein_discrete(p, p, line_cost());
  CHECK(r.value == doctest::Approx(0.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.plan.at(i, j) == doctest::Approx(i == j ? p[i] : 0.0));
}

TEST_CASE("point masses are forced to couple") {
  const std::vector<double> p{0, 1, 0, 0}, q{0, 0, 0, 1};
  CHECK(wasserstein_discrete(p, q, line_cost()).value == doctest::Approx(2.0));
}

TEST_CASE("splitting mass around a middle point") {
  const std::vector<double> p{0.5, 0.0, 0.5}, q{0.0, 1.0, 0.0};
  const WassersteinResult r = wasserstein_discrete(p, q, line_cost());
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.plan.at(0, 1) == doctest::Approx(0.5));
  CHECK(r.plan.at(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("transport input errors") {
  const std::vector<double> p{0.5, 0.5}, q{0.5, 0.6}, neg{1.2, -0.2};
  CHECK(code_of([&] { wasserstein_discrete(p, q, line_cost()); }) == ErrorCode::MarginalMismatch);
  CHECK(code_of([&] { wasserstein_discrete(neg, p, line_cost()); }) == ErrorCode::InvalidDistribution);
}

TEST_CASE("transport plans are feasible and priced correctly") {
  Rng rng(99);
  const CityGraph g = grid(4);
  const GroundCost cost = [&](std::size_t i, std::size_t j) {
    return static_cast<double>(g.distance(static_cast<NodeId>(i), static_cast<NodeId>(j)));
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_pmf(rng, 16, 1 + rng.below(10));
    const auto q = random_pmf(rng, 16, 1 + rng.below(10));
    const WassersteinResult r = wasserstein_discrete(p, q, cost);
    double recomputed = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
      CHECK(std::abs(r.plan.row_sum(i) - p[i]) <= 1e-8);
      CHECK(std::abs(r.plan.col_sum(i) - q[i]) <= 1e-8);
      for (std::size_t j = 0; j < 16; ++j) {
        CHECK(r.plan.at(i, j) >= -1e-12);
        recomputed += r.plan.at(i, j) * cost(i, j);
      }
    }
    CHECK(recomputed == doctest::Approx(r.value).epsilon(1e-9));
    CHECK(r.plan.total_cost == doctest::Approx(r.value).epsilon(1e-9));
  }
}

TEST_CASE("transport value matches vertex enumeration on small supports") {
  Rng rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 6;
    const auto p = random_pmf(rng, n, 1 + rng.below(4));
    const auto q = random_pmf(rng, n, 1 + rng.below(4));
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i][j] = i == j ? 0.0 : 1.0 + rng.below(5);
    std::vector<double> a, b;
    std::vector<std::size_t> si, sj;
    for (std::size_t i = 0; i < n; ++i)
      if (p[i] > 0) a.push_back(p[i]), si.push_back(i);
    for (std::size_t j = 0; j < n; ++j)
      if (q[j] > 0) b.push_back(q[j]), sj.push_back(j);
    std::vector<std::vector<double>> sub(si.size(), std::vector<double>(sj.size()));
    for (std::size_t i = 0; i < si.size(); ++i)
      for (std::size_t j = 0; j < sj.size(); ++j) sub[i][j] = c[si[i]][sj[j]];
    const double expected = oracle::TransportEnumerator(a, b, sub).solve();
    const double got = wasserstein_discrete(p, q, [&](std::size_t i, std::size_t j) { return c[i][j]; }).value;
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("euclidean transport never exceeds graph transport on grids") {
  Rng rng(5);
  const CityGraph g = grid(5);
  const auto xy = g.coordinates();
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_pmf(rng, 25, 6), q = random_pmf(rng, 25, 6);
    const double graph = wasserstein_discrete(p, q, [&](std::size_t i, std::size_t j) {
                           return static_cast<double>(g.distance(static_cast<NodeId>(i), static_cast<NodeId>(j)));
                         }).value;
    const double euclid = wasserstein_discrete(p, q, [&](std::size_t i, std::size_t j) {
                            return std::hypot(xy[i].x - xy[j].x, xy[i].y - xy[j].y);
                          }).value;
    CHECK(euclid <= graph + 1e-9);
  }
}

TEST_CASE("bounds on a two-node model by hand") {
  // Pickups (0.75, 0.25), every trip crosses the edge, so dropoffs are (0.25, 0.75).
  const CityGraph g = line_graph(2);
  const DemandModel m = DemandModel::make(bracketing_arrivals(0.5), Categorical::from_weights({3, 1}),
                                          {Categorical::point(2, 1), Categorical::point(2, 0)});
  const StabilityReport r = compute_bounds(m, g);
  CHECK(r.terms.initial_to_pickup == doctest::Approx(0.625));
  CHECK(r.terms.lrand_to_pickup == doctest::Approx(0.625));
  CHECK(r.terms.pickup_to_dropoff == doctest::Approx(1.0));
  CHECK(r.wasserstein == doctest::Approx(0.5));
  CHECK(r.D_max == doctest::Approx(1.625));
  CHECK(r.D_min == doctest::Approx(1.5));
  CHECK(r.m_sufficient == 1);
  CHECK(r.instability_threshold == doctest::Approx(0.75));
  CHECK(r.min_candidate_fleet == 1);
  CHECK(r.D_min <= r.D_max);
}

TEST_CASE("bounds on a 3x3 grid agree with independent expectations") {
  const CityGraph g = grid(3);
  std::vector<std::vector<int>> adj(9);
  for (NodeId v = 0; v < 9; ++v)
    for (NodeId w : g.neighbors(v)) adj[static_cast<std::size_t>(v)].push_back(w);
  const auto d = oracle::bfs_all_pairs(adj);
  const std::vector<double> pick{0.5, 0, 0, 0, 0.3, 0, 0, 0, 0.2};
  std::vector<Categorical> cond(9, Categorical::point(9, 4));
  cond[0] = Categorical::from_weights({0, 0, 1, 0, 0, 0, 1, 0, 0});
  cond[4] = Categorical::point(9, 8);
  cond[8] = Categorical::from_weights({1, 0, 0, 0, 0, 0, 0, 0, 3});
  const DemandModel m = DemandModel::make(bracketing_arrivals(1.5), Categorical::from_weights(pick), cond);
  std::vector<double> drop(9, 0.0);
  double pd = 0.0;
  for (std::size_t u = 0; u < 9; ++u)
    for (std::size_t v = 0; v < 9; ++v) {
      const double mass = pick[u] * cond[u][v];
      drop[v] += mass;
      pd += mass * d[u][v];
    }
  double xr = 0.0;
  for (std::size_t u = 0; u < 9; ++u)
    for (std::size_t v = 0; v < 9; ++v) xr += drop[u] * pick[v] * d[u][v];
  std::vector<double> a, b;
  std::vector<std::size_t> si, sj;
  for (std::size_t i = 0; i < 9; ++i) {
    if (drop[i] > 0) a.push_back(drop[i]), si.push_back(i);
    if (pick[i] > 0) b.push_back(pick[i]), sj.push_back(i);
  }
  std::vector<std::vector<double>> c(si.size(), std::vector<double>(sj.size()));
  for (std::size_t i = 0; i < si.size(); ++i)
    for (std::size_t j = 0; j < sj.size(); ++j) c[i][j] = d[si[i]][sj[j]];
  const double wd = oracle::TransportEnumerator(a, b, c).solve();

  const StabilityReport r = compute_bounds(m, g);
  CHECK(r.terms.pickup_to_dropoff == doctest::Approx(pd));
  CHECK(r.terms.initial_to_pickup == doctest::Approx(xr));
  CHECK(r.wasserstein == doctest::Approx(wd));
  CHECK(r.D_max == doctest::Approx(xr + pd));
  CHECK(r.D_min == doctest::Approx(wd + pd));
  CHECK(r.m_sufficient == static_cast<int>(std::ceil(1.5 * (xr + pd) - 1e-9)));
  CHECK(r.D_min <= r.D_max + 1e-12);
}

TEST_CASE("published city-scale terms give the published fleet bounds") {
  ExpectationTerms t;
  t.initial_to_pickup = 15;
  t.lrand_to_pickup = 13;
  t.pickup_to_dropoff = 15;
  t.arrivals = 1;
  const StabilityReport r = compute_bounds(t, 1.87);
  CHECK(r.D_max == doctest::Approx(30));
  CHECK(r.m_sufficient == 30);
  CHECK(r.instability_threshold == doctest::Approx(16.87));
  CHECK(r.min_candidate_fleet == 17);
}

TEST_CASE("integer products do not round up past themselves") {
  ExpectationTerms t;
  t.initial_to_pickup = 1.0;
  t.lrand_to_pickup = 1.0;
  t.pickup_to_dropoff = 2.0;
  t.arrivals = 1.0;
  const StabilityReport r = compute_bounds(t, 1.0);
  CHECK(r.m_sufficient == 3);
  CHECK(r.min_candidate_fleet == 4);
}

TEST_CASE("single-node city has zero bounds") {
  GraphSpec s;
  s.node_count = 1;
  s.coordinates = {{0, 0}};
  const CityGraph g = CityGraph::build(s);
  const DemandModel m = DemandModel::make(bracketing_arrivals(2.0), Categorical::point(1, 0), {Categorical::point(1, 0)});
  for (Metric metric : {Metric::Graph, Metric::Euclidean}) {
    const StabilityReport r = compute_bounds(m, g, metric);
    CHECK(r.D_max == 0.0);
    CHECK(r.D_min == 0.0);
    CHECK(r.m_sufficient == 0);
    CHECK(r.min_candidate_fleet == 1);
  }
}

TEST_CASE("sufficient bound dominates the necessary one when initial equals dropoff") {
  const CityGraph g = grid(5);
  for (double rate : {0.3, 0.8, 1.7}) {
    const StabilityReport r = compute_bounds(synthetic_model(g, {rate}), g);
    CHECK(r.D_min <= r.D_max + 1e-12);
    CHECK(r.instability_threshold <= r.m_sufficient + 1e-12);
    const StabilityReport e = compute_bounds(synthetic_model(g, {rate}), g, Metric::Euclidean);
    CHECK(e.wasserstein <= r.wasserstein + 1e-9);
  }
}

TEST_CASE("euclidean metric needs coordinates") {
  GraphSpec s;
  s.node_count = 2;
  s.edges = {{0, 1}, {1, 0}};
  const CityGraph g = CityGraph::build(s);
  const DemandModel m = uniform_demand(2, 0.5);
  CHECK(code_of([&] { compute_bounds(m, g, Metric::Euclidean); }) == ErrorCode::MissingCoordinates);
  CHECK_NOTHROW(compute_bounds(m, g, Metric::Graph));
}

TEST_CASE("metric names") {
  CHECK(parse_metric("graph") == Metric::Graph);
  CHECK(parse_metric("euclidean") == Metric::Euclidean);
  CHECK(!parse_metric("manhattan").has_value());
  CHECK(to_string(Metric::Euclidean) == "euclidean");
}

TEST_CASE("report json keys") {
  const CityGraph g = grid(3);
  const auto j = nlohmann::ordered_json::parse(stability_report_json(compute_bounds(synthetic_model(g), g)));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"E_eta", "E_d_initial_pickup", "E_d_lrand_pickup", "E_d_pickup_dropoff",
                                         "metric", "WD", "D_max", "D_min", "m_sufficient", "instability_threshold",
                                         "min_candidate_fleet"});
  CHECK(!stability_report_table(compute_bounds(synthetic_model(g), g)).empty());
}

TEST_CASE("statistics match reference values") {
  CHECK(student_t_cdf(1.5, 7) == doctest::Approx(0.911350756505015).epsilon(1e-10));
  CHECK(student_t_cdf(-2.2, 3) == doctest::Approx(0.05758597598823535).epsilon(1e-10));
  CHECK(student_t_cdf(0.3, 40) == doctest::Approx(0.6171346416144904).epsilon(1e-10));
  const std::vector<double> a{3, 5, 2, 8, 4, 6}, b{4, 7, 2, 9, 6, 6};
  const PairedTest pt = paired_t_test(a, b);
  CHECK(pt.t == doctest::Approx(-2.7386127875258306));
  CHECK(pt.p_less == doctest::Approx(0.02042970192964792));
  CHECK(pt.df == 5);
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, y{2, 1, 4, 3, 6, 5, 7, 9, 8, 11};
  const SlopeTest st = slope_test(x, y);
  CHECK(st.slope == doctest::Approx(1.006060606060606));
  CHECK(st.intercept == doctest::Approx(0.0666666666666664));
  CHECK(st.std_error == doctest::Approx(0.11610450945859423));
  CHECK(st.p_positive == doctest::Approx(1.2233802117799594e-05));
  CHECK(mean(a) == doctest::Approx(14.0 / 3));
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), Error);
  CHECK_THROWS_AS(slope_test(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("empirical verdicts on constructed traces") {
  std::vector<EpisodeTrace> flat(6, constant_trace(40, [](int) { return 0; }));
  CHECK(empirical_stability(flat, 10).verdict == Verdict::Stable);
  std::vector<EpisodeTrace> growing(6, constant_trace(40, [](int t) { return t; }));
  const StabilityVerdict v = empirical_stability(growing, 10);
  CHECK(v.verdict == Verdict::Unstable);
  CHECK(v.slope == doctest::Approx(1.0));
  CHECK(v.first_window_mean == doctest::Approx(5.5));
  CHECK(v.last_window_mean == doctest::Approx(35.5));
  CHECK(to_string(Verdict::Inconclusive) == "INCONCLUSIVE");
}

TEST_CASE("empirical stability input errors") {
  std::vector<EpisodeTrace> few(4, constant_trace(20, [](int) { return 1; }));
  CHECK(code_of([&] { empirical_stability(few, 5); }) == ErrorCode::TooFewTraces);
  std::vector<EpisodeTrace> five(5, constant_trace(20, [](int) { return 1; }));
  CHECK(code_of([&] { empirical_stability(five, 11); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { empirical_stability(five, 0); }) == ErrorCode::InvalidArgument);
  five[2] = constant_trace(21, [](int) { return 1; });
  CHECK(code_of([&] { empirical_stability(five, 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("simulated fleets land on the predicted side of the bounds") {
  const CityGraph g = grid(5);
  const DemandModel model = synthetic_model(g);
  const StabilityReport r = compute_bounds(model, g);
  const int small = std::max(1, static_cast<int>(std::floor(0.5 * r.instability_threshold)));
  auto verdict = [&](int m) {
    std::vector<EpisodeTrace> traces;
    IARAPolicy p(g);
    EpisodeOptions opts;
    opts.keep_controls = false;
    for (std::uint64_t s = 1; s <= 20; ++s) traces.push_back(run_episode(g, model, p, m, 300, s, opts));
    return empirical_stability(traces, 150).verdict;
  };
  CHECK(verdict(r.m_sufficient) == Verdict::Stable);
  CHECK(verdict(small) == Verdict::Unstable);
}
