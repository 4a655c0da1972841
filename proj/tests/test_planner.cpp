#include <sstream>

#include "doctest.h"
#include "fleetroll/error.hpp"
#include "fleetroll/planner.hpp"
#include "helpers.hpp"

using namespace fleetroll;
using namespace testing_support;

namespace {

RolloutConfig config(int t_h, int num_mc, std::uint64_t seed = 1) {
  RolloutConfig c;
  c.horizon = t_h;
  c.num_mc = num_mc;
  c.seed = seed;
  return c;
}

// 6-node line split into {0,1,2} and {3,4,5}.
CityGraph split_line() { return line_graph(6).with_sectors({0, 0, 0, 1, 1, 1}); }

}  // namespace

TEST_CASE("transit is scheduled hop by hop to the entry node") {
  const CityGraph g = split_line();
  const DemandModel m = zero_demand(6);
  FleetState x = free_fleet({0});
  x.outstanding = {request(0, 5, 4)};
  HighLevelPlan plan;
  const NodeId expected[] = {1, 2, 3};
  for (int step = 0; step < 3; ++step) {
    const TwoPhaseStep s = two_phase_control(x, g, m, config(3, 2), plan, 9);
    REQUIRE(s.plan.transit.size() == 1);
    const Transit& tr = s.plan.transit[0];
    CHECK(tr.taxi == 0);
    CHECK(tr.d_hat == 3);
    CHECK(tr.path == std::vector<NodeId>{1, 2, 3});
    CHECK(tr.start_clock == 1);
    CHECK(tr.remaining(x.clock) == 3 - step);
    CHECK(s.control[0] == TaxiControl::move_to(expected[step]));
    plan = s.plan;
    apply_transition(x, s.control, {}, g);
  }
  CHECK(x.location[0] == 3);
  // Arrived: the transit is pruned and the sector planner takes over.
  const TwoPhaseStep s = two_phase_control(x, g, m, config(3, 2), plan, 9);
  CHECK(s.plan.transit.empty());
  CHECK(s.control[0] == TaxiControl::move_to(4));
}

TEST_CASE("same-sector matches start no transit") {
  const CityGraph g = split_line();
  FleetState x = free_fleet({0, 5});
  x.outstanding = {request(0, 2, 4), request(1, 4, 0)};
  CHECK(high_level_plan(x, g, zero_demand(6), 3, {}, 1).transit.empty());
}

TEST_CASE("taxis already in transit are not rematched") {
  const CityGraph g = split_line();
  FleetState x = free_fleet({1});
  x.clock = 2;
  x.outstanding = {request(0, 1, 0)};
  HighLevelPlan prev;
  prev.transit.push_back({0, 3, {1, 2, 3}, 1});
  const HighLevelPlan plan = high_level_plan(x, g, zero_demand(6), 3, prev, 1);
  REQUIRE(plan.transit.size() == 1);
  CHECK(plan.transit[0].path == prev.transit[0].path);
  CHECK(plan.transit[0].hop_at(2) == 2);
}

TEST_CASE("sector problem holds local taxis, local requests and inbound transits") {
  const CityGraph g = split_line();
  FleetState x = free_fleet({1, 2, 4, 0});
  x.trip_timer[2] = 2;
  x.destination[2] = 5;
  x.serving[2] = 7;
  x.outstanding = {request(3, 0, 5), request(4, 5, 1), request(6, 3, 3)};
  HighLevelPlan plan;
  plan.transit.push_back({1, 3, {3}, 1});
  std::vector<char> r0, r1;
  const LocalProblem p0 = sector_problem(x, g, plan, 0, r0);
  const LocalProblem p1 = sector_problem(x, g, plan, 1, r1);
  CHECK(p0.taxi_ids == std::vector<TaxiId>{0, 3});
  CHECK(p1.taxi_ids == std::vector<TaxiId>{2});
  CHECK(p1.state.trip_timer == std::vector<int>{2});
  REQUIRE(p0.state.outstanding.size() == 1);
  CHECK(p0.state.outstanding[0].id == 3);
  REQUIRE(p1.state.outstanding.size() == 2);
  CHECK(p0.inbound.empty());
  REQUIRE(p1.inbound.size() == 1);
  CHECK(p1.inbound[0].id == 1);
  CHECK(p1.inbound[0].node == 3);
  CHECK(p1.inbound[0].offset == 1);
  CHECK(p0.in_region(2));
  CHECK(!p0.in_region(3));
}

TEST_CASE("sector with no taxis contributes no controls") {
  const CityGraph g = split_line();
  FleetState x = free_fleet({0, 1});
  x.outstanding = {request(0, 2, 0)};
  CHECK(low_level_plan(x, g, zero_demand(6), {}, 1, config(2, 2)).empty());
  CHECK(low_level_plan(x, g, zero_demand(6), {}, 0, config(2, 2)).size() == 2);
}

TEST_CASE("one sector reduces to global rollout") {
  const CityGraph base = grid(4);
  const CityGraph g = base.with_sectors(std::vector<int>(16, 0));
  const DemandModel m = uniform_demand(16, 0.6);
  FleetState x = free_fleet({0, 6, 13});
  x.outstanding = {request(0, 3, 5), request(1, 9, 12), request(2, 15, 0)};
  const auto low = low_level_plan(x, g, m, {}, 0, config(4, 8));
  const Control global = one_at_a_time_control(x, base, m, config(4, 8));
  REQUIRE(low.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(low[i].first == static_cast<TaxiId>(i));
    CHECK(low[i].second == global[i]);
  }
}

TEST_CASE("one-sector two-phase episodes match rollout episodes") {
  const CityGraph g = grid(4);
  const DemandModel m = synthetic_model(g, {0.5});
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RolloutPolicy r(g, m, config(5, 5));
    const EpisodeTrace a = run_episode(g, m, r, 3, 20, seed);
    const EpisodeTrace b = run_two_phase(g, m, 3, 20, 3, config(5, 5), seed);
    CHECK(a.same_outcome(b));
    CHECK(a.cost == b.cost);
  }
}

TEST_CASE("merged controls are legal and sector moves stay inside the sector") {
  const CityGraph g0 = grid(6);
  const DemandModel m = synthetic_model(g0, {1.2});
  TwoPhasePolicy policy(g0, m, 6, 2, config(4, 4));
  const CityGraph& g = policy.sectored_graph();
  CHECK(g.sector_count() == 3);
  policy.begin_episode({11, 6, 30});
  Rng init(3);
  FleetState x;
  for (int l = 0; l < 6; ++l) x.add_taxi(static_cast<NodeId>(m.initial_location().sample(init)));
  const auto arrivals = sample_arrival_sequence(m, 30, 4);
  for (const Request& r : arrivals[0]) x.outstanding.push_back(r);
  for (int t = 1; t < 30; ++t) {
    const Control u = policy.decide(x);
    check_control(x, u, g);
    for (TaxiId l = 0; l < 6; ++l) {
      const auto i = static_cast<std::size_t>(l);
      if (policy.plan().in_transit(l)) {
        CHECK(u[i] == TaxiControl::move_to(policy.plan().find(l)->hop_at(x.clock)));
      } else if (u[i].action == Action::MoveTo) {
        CHECK(g.sector(u[i].node) == g.sector(x.location[i]));
      }
    }
    apply_transition(x, u, arrivals[static_cast<std::size_t>(t)], g);
  }
  CHECK(policy.sector_timings().size() == 29 * 3);
}

TEST_CASE("larger fleets split into more sectors and still run legally") {
  const CityGraph g = grid(8);
  const DemandModel m = synthetic_model(g, {2.0});
  std::vector<SectorTiming> timings;
  const EpisodeTrace t = run_two_phase(g, m, 30, 8, 10, config(2, 1), 5, &timings);
  CHECK(t.steps.size() == 8);
  CHECK(timings.size() == 7 * 3);
  std::ostringstream out;
  write_sector_timing_csv(out, timings);
  CHECK(out.str().rfind("t,sector,plan_ms\n1,1,", 0) == 0);
}

TEST_CASE("two-phase control needs sectors") {
  const CityGraph g = line_graph(4);
  try {
    two_phase_control(free_fleet({0}), g, zero_demand(4), config(2, 2), {}, 1);
    FAIL("expected SectorsUnassigned");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SectorsUnassigned);
  }
}

TEST_CASE("a lone local taxi and request ignore the sector boundary") {
  const CityGraph g = split_line();
  const CityGraph whole = line_graph(6);
  FleetState x = free_fleet({1});
  x.outstanding = {request(0, 0, 2)};
  const auto low = low_level_plan(x, g, zero_demand(6), {}, 0, config(3, 2));
  REQUIRE(low.size() == 1);
  CHECK(low[0].second == one_at_a_time_control(x, whole, zero_demand(6), config(3, 2))[0]);
  CHECK(low[0].second == TaxiControl::move_to(0));
}

TEST_CASE("all taxis in transit: the control is the scheduled hops") {
  const CityGraph g = split_line();
  FleetState x = free_fleet({0, 5});
  x.outstanding = {request(0, 1, 4)};
  HighLevelPlan prev;
  prev.transit.push_back({0, 3, {1, 2, 3}, 1});
  prev.transit.push_back({1, 2, {4, 3, 2}, 1});
  const TwoPhaseStep s = two_phase_control(x, g, uniform_demand(6, 0.8), config(3, 3), prev, 4);
  CHECK(s.control == Control{TaxiControl::move_to(1), TaxiControl::move_to(4)});
  CHECK(s.plan.transit.size() == 2);
}

TEST_CASE("sector sub-states split the outstanding requests") {
  const CityGraph g0 = grid(6);
  const DemandModel m = synthetic_model(g0, {1.5});
  TwoPhasePolicy policy(g0, m, 6, 2, config(2, 2));
  const CityGraph& g = policy.sectored_graph();
  policy.begin_episode({3, 6, 20});
  FleetState x = free_fleet({0, 7, 14, 21, 28, 35});
  const auto arrivals = sample_arrival_sequence(m, 20, 8);
  for (int t = 1; t < 20; ++t) {
    const Control u = policy.decide(x);
    std::size_t total = 0;
    std::vector<int> owners(6, 0);
    for (int k = 0; k < g.sector_count(); ++k) {
      std::vector<char> region;
      const LocalProblem p = sector_problem(x, g, policy.plan(), k, region);
      total += p.state.outstanding.size();
      for (TaxiId id : p.taxi_ids) ++owners[static_cast<std::size_t>(id)];
    }
    CHECK(total == x.outstanding.size());
    for (TaxiId l = 0; l < 6; ++l) CHECK(owners[static_cast<std::size_t>(l)] == (policy.plan().in_transit(l) ? 0 : 1));
    apply_transition(x, u, arrivals[static_cast<std::size_t>(t)], g);
  }
}

TEST_CASE("two-phase stays close to global rollout and plans faster") {
  const CityGraph g = grid(5);
  const DemandModel m = synthetic_model(g);
  const RolloutConfig cfg;
  double rollout_cost = 0, two_phase_cost = 0, rollout_ms = 0, two_phase_ms = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RolloutPolicy r(g, m, cfg);
    TwoPhasePolicy p(g, m, 6, 3, cfg);
    p.set_parallel(false);
    const EpisodeTrace a = run_episode(g, m, r, 6, 50, seed);
    const EpisodeTrace b = run_episode(g, m, p, 6, 50, seed);
    rollout_cost += static_cast<double>(a.cost);
    two_phase_cost += static_cast<double>(b.cost);
    rollout_ms += a.mean_plan_ms();
    two_phase_ms += b.mean_plan_ms();
  }
  MESSAGE("cost " << two_phase_cost / 20 << " vs " << rollout_cost / 20 << ", ms " << two_phase_ms / 20 << " vs "
                  << rollout_ms / 20);
  CHECK(two_phase_cost <= 1.10 * rollout_cost);
  CHECK(two_phase_ms < rollout_ms);
}

TEST_CASE("critical-path planning time plateaus once sectors are full") {
  // Critical path: step time with the sector loop replaced by its slowest sector.
  const CityGraph g = grid(5);
  const DemandModel m = synthetic_model(g);
  const int m_lim = 2;
  auto critical_ms = [&](int fleet) {
    TwoPhasePolicy p(g, m, fleet, m_lim, {});
    p.set_parallel(false);
    double sum = 0.0;
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const EpisodeTrace tr = run_episode(g, m, p, fleet, 30, seed);
      std::vector<double> total(31, 0.0), slowest(31, 0.0);
      for (const SectorTiming& s : p.sector_timings()) {
        total[static_cast<std::size_t>(s.t)] += s.plan_ms;
        slowest[static_cast<std::size_t>(s.t)] = std::max(slowest[static_cast<std::size_t>(s.t)], s.plan_ms);
      }
      for (int t = 1; t < 30; ++t) {
        const auto i = static_cast<std::size_t>(t);
        sum += tr.steps[i - 1].plan_ms - total[i] + slowest[i];
        ++n;
      }
    }
    return sum / n;
  };
  auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const std::vector<double> low_m{1, 2}, high_m{4, 5, 6, 7, 8};
  std::vector<double> low_t, high_t;
  for (double f : low_m) low_t.push_back(critical_ms(static_cast<int>(f)));
  for (double f : high_m) high_t.push_back(critical_ms(static_cast<int>(f)));
  const double rising = slope(low_m, low_t);
  const double plateau = slope(high_m, high_t);
  MESSAGE("slope " << rising << " ms/taxi up to m_lim, " << plateau << " beyond 2 m_lim");
  CHECK(rising > 0.0);
  CHECK(plateau <= 0.25 * rising);
}
