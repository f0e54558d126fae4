#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "redistrict/error.hpp"
#include "redistrict/fixtures.hpp"
#include "redistrict/metrics.hpp"
#include "redistrict/random.hpp"
#include "redistrict/smc.hpp"

using namespace redistrict;
using namespace redistrict::metrics;

namespace {

ConstraintConfig loose() {
  ConstraintConfig c;
  c.pop_tolerance = 0.05;
  return c;
}

// Path whose precincts carry explicit populations, race counts and votes.
struct Spec {
  RaceCounts race;
  std::int64_t dem;
  std::int64_t rep;
};

RegionData path_with(const std::vector<Spec>& specs, std::vector<std::string> counties = {}) {
  std::vector<PrecinctAttributes> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    PrecinctAttributes p;
    p.id = "p" + std::to_string(i);
    p.county = counties.empty() ? "c0" : counties[i];
    p.race = specs[i].race;
    p.votes_dem = specs[i].dem;
    p.votes_rep = specs[i].rep;
    p.turnout = 0.5;
    nodes.push_back(p);
    if (i > 0) edges.emplace_back("p" + std::to_string(i - 1), p.id);
  }
  return oracle::make_region(nodes, edges);
}

PlanEnsemble ensemble_of(std::vector<Plan> plans, std::vector<double> weights = {}) {
  PlanEnsemble e;
  e.plans = std::move(plans);
  e.weights = weights.empty() ? std::vector<double>(e.plans.size(), 1.0 / static_cast<double>(e.plans.size()))
                              : std::move(weights);
  return e;
}

}  // namespace

TEST(ParityDeviation, Examples) {
  const auto three = oracle::path_region({100, 100, 100});
  EXPECT_EQ(parity_deviation(Plan{3, {1, 2, 3}}, three.scenarios[0]).max_deviation, 0.0);

  const auto two = oracle::path_region({90, 110});
  const auto r = parity_deviation(Plan{2, {1, 2}}, two.scenarios[0]);
  EXPECT_NEAR(r.max_deviation, 0.10, 1e-15);
  EXPECT_EQ(r.deviation.size(), 2u);
  EXPECT_EQ(r.max_deviation, *std::max_element(r.deviation.begin(), r.deviation.end()));
}

TEST(ParityDeviation, ZeroPopulationAndSizeMismatchRejected) {
  auto region = oracle::path_region({1, 1});
  auto s = region.scenarios[0];
  s.population = {0, 0};
  s.race = {RaceCounts{}, RaceCounts{}};
  EXPECT_THROW(parity_deviation(Plan{2, {1, 2}}, s), ValidationError);
  EXPECT_THROW(parity_deviation(Plan{2, {1, 2, 2}}, region.scenarios[0]), ValidationError);
}

TEST(ParityDeviation, InvariantUnderRelabelingAndIntegerScaling) {
  fixtures::StateSpec spec;
  spec.rows = 5;
  spec.cols = 5;
  const auto region = fixtures::synthetic_state(spec);
  const auto e = sample_plans_smc(region.graph, region.scenarios[0], 3, loose(), 50, 1);
  auto scaled = region.scenarios[0];
  for (auto& p : scaled.population) p *= 7;
  for (auto& r : scaled.race) {
    for (auto& c : r) c *= 7;
  }
  for (const auto& p : e.plans) {
    const double base = parity_deviation(p, region.scenarios[0]).max_deviation;
    Plan relabeled = p;
    for (auto& d : relabeled.district) d = 4 - d;
    EXPECT_NEAR(parity_deviation(relabeled, region.scenarios[0]).max_deviation, base, 1e-15);
    EXPECT_NEAR(parity_deviation(p, scaled).max_deviation, base, 1e-12);
  }
}

TEST(Reevaluate, SameScenarioIsAllValidAndShiftedPlanFlipsWithTolerance) {
  fixtures::StateSpec spec;
  spec.rows = 5;
  spec.cols = 5;
  const auto region = fixtures::synthetic_state(spec);
  ConstraintConfig c;
  c.pop_tolerance = 0.02;
  const auto e = sample_plans_smc(region.graph, region.scenarios[0], 3, c, 100, 3);
  EXPECT_EQ(reevaluate_ensemble(e, region.scenarios[0], 0.02).invalid_fraction, 0.0);

  // One plan, two districts of 100; moving 2 persons gives deviation exactly 2%.
  const auto path = oracle::path_region({100, 100});
  auto shifted = path.scenarios[0];
  shifted.population = {102, 98};
  shifted.race = {RaceCounts{102, 0, 0, 0, 0}, RaceCounts{98, 0, 0, 0, 0}};
  const auto one = ensemble_of({Plan{2, {1, 2}}});
  EXPECT_EQ(reevaluate_ensemble(one, shifted, 0.001).invalid_fraction, 1.0);
  EXPECT_EQ(reevaluate_ensemble(one, shifted, 0.05).invalid_fraction, 0.0);
  EXPECT_NEAR(reevaluate_ensemble(one, shifted, 0.05).max_deviation[0], 0.02, 1e-15);
}

TEST(Reevaluate, InvalidFractionIsWeighted) {
  const auto path = oracle::path_region({100, 100, 100, 100});
  const auto e = ensemble_of({Plan{2, {1, 1, 2, 2}}, Plan{2, {1, 2, 2, 2}}}, {0.8, 0.2});
  EXPECT_NEAR(reevaluate_ensemble(e, path.scenarios[0], 0.01).invalid_fraction, 0.2, 1e-15);
}

TEST(CountySplits, Examples) {
  const auto whole = path_with({{{1}, 1, 1}, {{1}, 1, 1}, {{1}, 1, 1}, {{1}, 1, 1}}, {"a", "a", "b", "b"});
  EXPECT_EQ(county_splits(Plan{2, {1, 1, 2, 2}}, whole.graph), 0);
  EXPECT_EQ(county_splits(Plan{2, {1, 2, 2, 2}}, whole.graph), 1);

  // 3x3 grid with one county per row and column districts: every row split.
  auto nodes = fixtures::grid_graph(3, 3).nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].county = "row" + std::to_string(i / 3);
  const auto g = fixtures::grid_graph(3, 3);
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [u, v] : g.edges()) edges.emplace_back(g.node(u).id, g.node(v).id);
  const auto region = oracle::make_region(nodes, edges);
  EXPECT_EQ(county_splits(Plan{3, {1, 2, 3, 1, 2, 3, 1, 2, 3}}, region.graph), 3);
}

TEST(Compactness, Examples) {
  const auto g = fixtures::grid_graph(2, 2);
  EXPECT_EQ(compactness_cut_edges(Plan{1, {1, 1, 1, 1}}, g), 0.0);
  EXPECT_EQ(compactness_cut_edges(Plan{4, {1, 2, 3, 4}}, g), 1.0);
  EXPECT_EQ(compactness_cut_edges(Plan{2, {1, 2, 1, 2}}, g), 0.5);
  EXPECT_EQ(cut_edge_count(Plan{2, {1, 2, 1, 2}}, g), 2);
}

TEST(DemSeats, StrictMajorityAndTieIsNotAMajority) {
  const auto all60 = path_with({{{1}, 60, 40}, {{1}, 6, 4}});
  EXPECT_EQ(dem_majority_seats(Plan{2, {1, 2}}, all60.graph), 2);

  const auto mixed = path_with({{{1}, 40, 60}, {{1}, 60, 40}, {{1}, 50, 50}});
  EXPECT_EQ(dem_majority_seats(Plan{3, {1, 2, 3}}, mixed.graph), 1);

  const auto novotes = path_with({{{1}, 0, 0}, {{1}, 5, 1}});
  EXPECT_THROW(dem_majority_seats(Plan{2, {1, 2}}, novotes.graph), ValidationError);
}

TEST(DemSeats, MatchesHandAggregationOnSyntheticState) {
  fixtures::StateSpec spec;
  spec.rows = 6;
  spec.cols = 6;
  const auto region = fixtures::synthetic_state(spec);
  const auto e = sample_plans_smc(region.graph, region.scenarios[0], 4, loose(), 50, 4);
  for (const auto& p : e.plans) {
    std::vector<std::int64_t> dem(4, 0);
    std::vector<std::int64_t> rep(4, 0);
    for (std::size_t v = 0; v < p.district.size(); ++v) {
      dem[static_cast<std::size_t>(p.district[v] - 1)] += region.graph.node(static_cast<int>(v)).votes_dem;
      rep[static_cast<std::size_t>(p.district[v] - 1)] += region.graph.node(static_cast<int>(v)).votes_rep;
    }
    int seats = 0;
    for (int k = 0; k < 4; ++k) seats += dem[static_cast<std::size_t>(k)] > rep[static_cast<std::size_t>(k)];
    EXPECT_EQ(dem_majority_seats(p, region.graph), seats);
  }
}

TEST(MmdCount, Examples) {
  const auto white = oracle::path_region({10, 10, 10});
  EXPECT_EQ(mmd_count(Plan{2, {1, 1, 2}}, white.scenarios[0], MmdDefinition::black()), 0);

  const auto sixty = path_with({{{40, 60, 0, 0, 0}, 1, 1}, {{90, 10, 0, 0, 0}, 1, 1}});
  EXPECT_EQ(mmd_count(Plan{2, {1, 2}}, sixty.scenarios[0], MmdDefinition::black()), 1);

  // Exactly half is not a majority; the Black+Hispanic preset counts both.
  const auto half = path_with({{{50, 25, 25, 0, 0}, 1, 1}, {{100, 0, 0, 0, 0}, 1, 1}});
  EXPECT_EQ(mmd_count(Plan{2, {1, 2}}, half.scenarios[0], MmdDefinition::black()), 0);
  EXPECT_EQ(mmd_count(Plan{2, {1, 2}}, half.scenarios[0], MmdDefinition::black_hispanic()), 0);
  const auto over = path_with({{{49, 26, 25, 0, 0}, 1, 1}, {{100, 0, 0, 0, 0}, 1, 1}});
  EXPECT_EQ(mmd_count(Plan{2, {1, 2}}, over.scenarios[0], MmdDefinition::black_hispanic()), 1);
}

TEST(MmdCount, MatchesBruteForceTallyOnSegregatedFixture) {
  fixtures::StateSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  const auto region = fixtures::synthetic_state(spec);
  const auto& s = region.scenarios[0];
  const auto e = sample_plans_smc(region.graph, s, 4, loose(), 100, 5);
  int seen_mmd = 0;
  for (const auto& p : e.plans) {
    int count = 0;
    for (int d = 1; d <= 4; ++d) {
      std::int64_t black = 0;
      std::int64_t pop = 0;
      for (std::size_t v = 0; v < p.district.size(); ++v) {
        if (p.district[v] != d) continue;
        black += s.race[v][1];
        pop += s.population[v];
      }
      count += 2 * black > pop;
    }
    EXPECT_EQ(mmd_count(p, s, MmdDefinition::black()), count);
    seen_mmd += count;
  }
  EXPECT_GT(seen_mmd, 0);
}

TEST(LabelInvariance, PlanMetricsIgnoreLabelPermutations) {
  fixtures::StateSpec spec;
  spec.rows = 6;
  spec.cols = 6;
  spec.county_size = 3;
  const auto region = fixtures::synthetic_state(spec);
  const auto& s = region.scenarios[0];
  const auto e = sample_plans_smc(region.graph, s, 4, loose(), 30, 6);
  const std::vector<int> perm = {3, 1, 4, 2};
  for (const auto& p : e.plans) {
    Plan q = p;
    for (auto& d : q.district) d = perm[static_cast<std::size_t>(d - 1)];
    EXPECT_EQ(mmd_count(p, s, MmdDefinition::black()), mmd_count(q, s, MmdDefinition::black()));
    EXPECT_EQ(dem_majority_seats(p, region.graph), dem_majority_seats(q, region.graph));
    EXPECT_EQ(county_splits(p, region.graph), county_splits(q, region.graph));
    EXPECT_EQ(compactness_cut_edges(p, region.graph), compactness_cut_edges(q, region.graph));
  }
}

TEST(Hhi, Examples) {
  EXPECT_DOUBLE_EQ(hhi(RaceCounts{0, 0, 7, 0, 0}), 100.0);
  EXPECT_DOUBLE_EQ(hhi(RaceCounts{5, 5, 0, 0, 0}), 50.0);
  EXPECT_NEAR(hhi(RaceCounts{3, 3, 3, 3, 3}), 20.0, 1e-12);
  EXPECT_THROW(hhi(RaceCounts{}), ValidationError);
}

TEST(MembershipProb, IdenticalPlansGiveZeroOrOne) {
  const auto region = path_with({{{0, 10, 0, 0, 0}, 1, 1}, {{10, 0, 0, 0, 0}, 1, 1}, {{10, 0, 0, 0, 0}, 1, 1}});
  const auto e = ensemble_of({Plan{2, {1, 2, 2}}, Plan{2, {1, 2, 2}}});
  EXPECT_EQ(mmd_membership_prob(e, region.scenarios[0], MmdDefinition::black()), (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(MembershipProb, DifferenceExamples) {
  const std::vector<double> a = {0.2, 1.0, 0.0};
  EXPECT_EQ(prob_difference(a, a), (std::vector<double>{0.0, 0.0, 0.0}));
  const std::vector<double> b = {0.2, 0.0, 1.0};
  EXPECT_EQ(prob_difference(a, b), (std::vector<double>{0.0, 1.0, -1.0}));
  EXPECT_THROW(prob_difference(a, std::vector<double>{1.0}), ValidationError);
}

TEST(MembershipProb, MatchesNaivePerPlanLoop) {
  fixtures::StateSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  const auto region = fixtures::synthetic_state(spec);
  const auto& s = region.scenarios[0];
  const auto e = sample_plans_smc(region.graph, s, 4, loose(), 1000, 7);
  const auto got = mmd_membership_prob(e, s, MmdDefinition::black());
  std::vector<double> naive(region.graph.num_nodes(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto mmd = mmd_districts(e.plans[i], s, MmdDefinition::black());
    for (std::size_t v = 0; v < naive.size(); ++v) {
      if (mmd[static_cast<std::size_t>(e.plans[i].district[v] - 1)]) naive[v] += e.weights[i];
    }
  }
  for (std::size_t v = 0; v < naive.size(); ++v) EXPECT_NEAR(got[v], naive[v], 1e-12);
}

TEST(SeatsHistogram, Examples) {
  const auto region = path_with({{{1}, 6, 4}, {{1}, 4, 6}, {{1}, 6, 4}});
  const auto single = ensemble_of({Plan{2, {1, 2, 2}}});
  const auto seats = [&](const Plan& p) { return dem_majority_seats(p, region.graph); };
  EXPECT_EQ(seats_histogram(single, seats), (std::map<int, double>{{1, 1.0}}));

  const auto two = ensemble_of({Plan{2, {1, 2, 2}}, Plan{2, {1, 1, 2}}});
  // {1,2,2}: 6/4 and 10/10 -> 1 seat; {1,1,2}: 10/10 and 6/4 -> 1 seat.
  const auto h = seats_histogram(two, seats);
  EXPECT_EQ(h, (std::map<int, double>{{1, 1.0}}));
  const auto region2 = path_with({{{1}, 6, 4}, {{1}, 6, 4}, {{1}, 6, 4}});
  const auto seats2 = [&](const Plan& p) { return dem_majority_seats(p, region2.graph); };
  const auto mixed = ensemble_of({Plan{2, {1, 2, 2}}, Plan{3, {1, 2, 3}}});
  EXPECT_EQ(seats_histogram(mixed, seats2), (std::map<int, double>{{2, 0.5}, {3, 0.5}}));
}

TEST(SeatsHistogram, MatchesHandTallyOnGridEnsemble) {
  fixtures::StateSpec spec;
  spec.rows = 6;
  spec.cols = 6;
  const auto region = fixtures::synthetic_state(spec);
  const auto e = sample_plans_smc(region.graph, region.scenarios[0], 4, loose(), 300, 8);
  const auto seats = [&](const Plan& p) { return dem_majority_seats(p, region.graph); };
  std::map<int, double> tally;
  for (std::size_t i = 0; i < e.size(); ++i) tally[seats(e.plans[i])] += e.weights[i];
  const auto h = seats_histogram(e, seats);
  ASSERT_EQ(h.size(), tally.size());
  double total = 0.0;
  for (const auto& [k, v] : tally) {
    EXPECT_NEAR(h.at(k), v, 1e-12);
    total += h.at(k);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Confusion, SameScenarioIsDiagonalAndRowsSumTo100) {
  fixtures::StateSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  const auto region = fixtures::synthetic_state(spec);
  const auto& s = region.scenarios[0];
  const auto e = sample_plans_smc(region.graph, s, 4, loose(), 300, 9);
  const auto t = mmd_confusion(e, s, s, MmdDefinition::black());
  EXPECT_EQ(t.size, 5);
  for (int i = 0; i < t.size; ++i) {
    double row = 0.0;
    for (int j = 0; j < t.size; ++j) {
      row += t.at(i, j);
      if (i != j) EXPECT_EQ(t.at(i, j), 0.0);
    }
    if (t.row_plans[static_cast<std::size_t>(i)] > 0) {
      EXPECT_NEAR(row, 100.0, 1e-9);
      EXPECT_EQ(t.at(i, i), 100.0);
    } else {
      EXPECT_EQ(row, 0.0);
    }
  }
}

TEST(Confusion, DemotingOneMmdShiftsMassOneColumnLeft) {
  // Three districts, two majority-Black under A; under B the first loses its majority.
  const auto a = path_with({{{0, 10, 0, 0, 0}, 1, 1}, {{0, 10, 0, 0, 0}, 1, 1}, {{10, 0, 0, 0, 0}, 1, 1}});
  auto b = a.scenarios[0];
  b.id = "b";
  b.race[0] = RaceCounts{6, 4, 0, 0, 0};
  const auto e = ensemble_of({Plan{3, {1, 2, 3}}});
  const auto t = mmd_confusion(e, a.scenarios[0], b, MmdDefinition::black());
  EXPECT_EQ(t.at(2, 1), 100.0);
  EXPECT_EQ(t.at(2, 2), 0.0);
}

TEST(Confusion, MatchesBruteForceJointTally) {
  fixtures::StateSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  const auto region = fixtures::synthetic_state(spec);
  const auto& s = region.scenarios[0];
  auto noisy = s;
  Rng rng(3);
  for (std::size_t v = 0; v < noisy.race.size(); ++v) {
    const auto shift = std::min<std::int64_t>(noisy.race[v][0], static_cast<std::int64_t>(rng.index(120)));
    noisy.race[v][0] -= shift;
    noisy.race[v][1] += shift;
  }
  const auto e = sample_plans_smc(region.graph, s, 4, loose(), 500, 10);
  const auto t = mmd_confusion(e, s, noisy, MmdDefinition::black());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const int ia = mmd_count(e.plans[i], s, MmdDefinition::black());
    const int ib = mmd_count(e.plans[i], noisy, MmdDefinition::black());
    joint[{ia, ib}] += e.weights[i];
    rows[ia] += e.weights[i];
  }
  for (int i = 0; i < t.size; ++i) {
    for (int j = 0; j < t.size; ++j) {
      const auto it = joint.find({i, j});
      const double want = it == joint.end() ? 0.0 : 100.0 * it->second / rows[i];
      EXPECT_NEAR(t.at(i, j), want, 1e-9) << i << "," << j;
    }
  }
}

TEST(EffectiveSampleSize, KishAndAutocorrelation) {
  EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 4.0);
  EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{1.0, 0.0, 0.0}), 1.0);

  Rng rng(1);
  std::vector<double> iid(4000);
  for (auto& x : iid) x = rng.uniform();
  const double ess_iid = autocorrelation_ess(iid);
  EXPECT_GT(ess_iid, 3000.0);
  EXPECT_LE(ess_iid, 4000.0 * 1.5);

  // AR(1) with phi = 0.9 has ESS near n (1 - phi) / (1 + phi).
  std::vector<double> ar(20000);
  double x = 0.0;
  for (auto& y : ar) {
    x = 0.9 * x + (rng.uniform() - 0.5);
    y = x;
  }
  const double ess_ar = autocorrelation_ess(ar);
  EXPECT_GT(ess_ar, 20000.0 * 0.1 / 1.9 * 0.5);
  EXPECT_LT(ess_ar, 20000.0 * 0.1 / 1.9 * 2.0);
}
