#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "redistrict/error.hpp"
#include "redistrict/fixtures.hpp"
#include "redistrict/noise.hpp"
#include "redistrict/random.hpp"

using namespace redistrict;
using namespace redistrict::noise;

namespace {

RegionData state(int county_size = 5) {
  fixtures::StateSpec spec;
  spec.county_size = county_size;
  return fixtures::synthetic_state(spec);
}

NoiseSpec with(double scale, std::uint64_t seed) {
  NoiseSpec s;
  s.scale = scale;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(TwoSidedGeometric, MatchesClosedFormPmf) {
  // P(k) = (1 - a) / (1 + a) * a^|k|.
  const double a = geometric_alpha(2.0);
  Rng rng(11);
  std::map<std::int64_t, double> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) counts[std::clamp<std::int64_t>(rng.two_sided_geometric(a), -6, 6)] += 1.0;
  std::vector<double> observed;
  std::vector<double> expected;
  double inner = 0.0;
  for (std::int64_t k = -5; k <= 5; ++k) {
    const double p = (1.0 - a) / (1.0 + a) * std::pow(a, static_cast<double>(std::abs(k)));
    observed.push_back(counts[k]);
    expected.push_back(p);
    inner += p;
  }
  observed.push_back(counts[-6] + counts[6]);
  expected.push_back(1.0 - inner);
  EXPECT_GT(oracle::chi_square_p(observed, expected), 0.01);
}

TEST(TwoSidedGeometric, ZeroScaleIsNoNoise) {
  EXPECT_EQ(geometric_alpha(0.0), 0.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(rng.two_sided_geometric(0.0), 0);
}

TEST(ControlledRound, Examples) {
  EXPECT_EQ(controlled_round(std::vector<double>{1.5, 1.5, 1.0}, 4), (std::vector<std::int64_t>{2, 1, 1}));
  EXPECT_EQ(controlled_round(std::vector<double>{0.2, 0.3, 0.5}, 10), (std::vector<std::int64_t>{2, 3, 5}));
  EXPECT_EQ(controlled_round(std::vector<double>{1.0, 1.0, 1.0}, 2), (std::vector<std::int64_t>{1, 1, 0}));
  EXPECT_EQ(controlled_round(std::vector<double>{0.0, 0.0}, 0), (std::vector<std::int64_t>{0, 0}));
  EXPECT_THROW(controlled_round(std::vector<double>{0.0, 0.0}, 3), ValidationError);
  EXPECT_THROW(controlled_round(std::vector<double>{-1.0, 2.0}, 3), ValidationError);
}

TEST(ControlledRound, SumsExactlyAndStaysWithinOneOfProportional) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng.index(30));
    for (auto& x : v) x = rng.uniform() * 100.0;
    const auto target = static_cast<std::int64_t>(rng.index(5000));
    const auto out = controlled_round(v, target);
    EXPECT_EQ(std::accumulate(out.begin(), out.end(), std::int64_t{0}), target);
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_LT(std::abs(static_cast<double>(out[i]) - v[i] * static_cast<double>(target) / sum), 1.0 + 1e-9);
    }
  }
}

TEST(Perturb, ZeroScaleIsIdentity) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  const auto out = perturb_scenario(region.graph, truth, with(0.0, 9), "copy");
  EXPECT_EQ(out.id, "copy");
  EXPECT_EQ(out.race, truth.race);
  EXPECT_EQ(out.population, truth.population);
}

TEST(Perturb, InvariantsHoldAcrossScalesAndSeeds) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  for (double scale : {0.5, 3.0, 20.0, 200.0}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto out = perturb_scenario(region.graph, truth, with(scale, seed), "n");
      EXPECT_NO_THROW(out.validate(region.graph));
      EXPECT_EQ(out.total_population(), truth.total_population());
      for (std::size_t v = 0; v < out.race.size(); ++v) {
        EXPECT_EQ(total(out.race[v]), out.population[v]);
        for (auto c : out.race[v]) EXPECT_GE(c, 0);
      }
    }
  }
}

TEST(Perturb, TotalNotPinnedWhenDisabled) {
  const auto region = state();
  auto spec = with(10.0, 3);
  spec.total_population_exact = false;
  bool differs = false;
  for (std::uint64_t seed = 0; seed < 5 && !differs; ++seed) {
    spec.seed = seed;
    differs = perturb_scenario(region.graph, region.scenarios[0], spec, "n").total_population() !=
              region.scenarios[0].total_population();
  }
  EXPECT_TRUE(differs);
}

TEST(Perturb, PrecinctTotalsExactKeepsEveryPopulation) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  auto spec = with(40.0, 5);
  spec.precinct_totals_exact = true;
  const auto out = perturb_scenario(region.graph, truth, spec, "n");
  EXPECT_NO_THROW(out.validate(region.graph));
  EXPECT_EQ(out.population, truth.population);
  EXPECT_NE(out.race, truth.race);
  EXPECT_EQ(mean_relative_error(truth, out), 0.0);
  for (const auto& rc : out.race) {
    for (auto c : rc) EXPECT_GE(c, 0);
  }
  EXPECT_THROW(calibrate_scale(region.graph, truth, spec, 0.01, 5, 1), ValidationError);
}

TEST(Perturb, SameSeedSameOutputDifferentSeedDiffers) {
  const auto region = state();
  const auto a = perturb_scenario(region.graph, region.scenarios[0], with(4.0, 7), "n");
  const auto b = perturb_scenario(region.graph, region.scenarios[0], with(4.0, 7), "n");
  const auto c = perturb_scenario(region.graph, region.scenarios[0], with(4.0, 8), "n");
  EXPECT_EQ(a, b);
  EXPECT_NE(a.race, c.race);
}

TEST(Perturb, ErrorGrowsWithScale) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  double previous = 0.0;
  for (double scale : {0.0, 1.0, 4.0, 16.0, 64.0}) {
    double mae = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      mae += mean_absolute_cell_error(truth, perturb_scenario(region.graph, truth, with(scale, seed), "n"));
    }
    EXPECT_GE(mae, previous);
    previous = mae;
  }
  EXPECT_GT(previous, 0.0);
}

TEST(Perturb, PrecinctOnlyCellErrorMatchesGeometricMoment) {
  // Without clipping or total pinning, each cell error is a single
  // two-sided geometric draw with E|k| = 2a / (1 - a^2).
  const auto region = state();
  auto spec = with(3.0, 0);
  spec.levels = {Level::Precinct};
  spec.nonnegative_counts = false;
  spec.total_population_exact = false;
  double acc = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    spec.seed = static_cast<std::uint64_t>(r);
    acc += mean_absolute_cell_error(region.scenarios[0], perturb_scenario(region.graph, region.scenarios[0], spec, "n"));
  }
  const double a = geometric_alpha(3.0);
  EXPECT_NEAR(acc / reps, 2.0 * a / (1.0 - a * a), 0.1);
}

TEST(Perturb, CountyNoiseMovesEachCountyRaceInOneDirection) {
  // County-level only: every precinct change within a county for one race has
  // the sign of that county's draw.
  const auto region = state();
  auto spec = with(50.0, 4);
  spec.levels = {Level::County};
  spec.total_population_exact = false;
  spec.nonnegative_counts = false;
  const auto& truth = region.scenarios[0];
  const auto out = perturb_scenario(region.graph, truth, spec, "n");
  for (std::size_t c = 0; c < region.graph.num_counties(); ++c) {
    for (std::size_t r = 0; r < kNumRaces; ++r) {
      int pos = 0;
      int neg = 0;
      for (std::size_t v = 0; v < truth.race.size(); ++v) {
        if (static_cast<std::size_t>(region.graph.county_of(static_cast<int>(v))) != c) continue;
        const auto d = out.race[v][r] - truth.race[v][r];
        pos += d > 0;
        neg += d < 0;
      }
      EXPECT_TRUE(pos == 0 || neg == 0);
    }
  }
}

TEST(Perturb, MajorityProtectionReducesErrorOnPluralityRace) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  auto spec = with(8.0, 0);
  spec.levels = {Level::Precinct};
  spec.nonnegative_counts = false;
  spec.total_population_exact = false;
  auto plurality_error = [&](bool protect) {
    spec.majority_race_protected = protect;
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      spec.seed = seed;
      const auto out = perturb_scenario(region.graph, truth, spec, "n");
      for (std::size_t v = 0; v < truth.race.size(); ++v) {
        const auto top = static_cast<std::size_t>(
            std::max_element(truth.race[v].begin(), truth.race[v].end()) - truth.race[v].begin());
        acc += std::abs(static_cast<double>(out.race[v][top] - truth.race[v][top]));
      }
    }
    return acc;
  };
  EXPECT_LT(plurality_error(true), 0.75 * plurality_error(false));
}

TEST(Perturb, RejectsInvalidInputs) {
  const auto region = state();
  EXPECT_THROW(perturb_scenario(region.graph, region.scenarios[0], with(-1.0, 0), "n"), ValidationError);
  auto bad = region.scenarios[0];
  bad.population[0] += 1;
  EXPECT_THROW(perturb_scenario(region.graph, bad, with(1.0, 0), "n"), ValidationError);
}

TEST(Calibrate, HitsTargetErrorAndIsDeterministic) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  const NoiseSpec base;
  const double scale = calibrate_scale(region.graph, truth, base, 0.01, 10, 3);
  EXPECT_EQ(scale, calibrate_scale(region.graph, truth, base, 0.01, 10, 3));
  double acc = 0.0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    acc += mean_relative_error(truth, perturb_scenario(region.graph, truth, with(scale, seed), "n"));
  }
  EXPECT_NEAR(acc / 20.0, 0.01, 0.002);
  EXPECT_LT(calibrate_scale(region.graph, truth, base, 0.005, 10, 3), scale);
  EXPECT_THROW(calibrate_scale(region.graph, truth, base, 0.0, 10, 3), ValidationError);
}

TEST(ErrorSummary, IdentityGivesZeroMeansAndSds) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  for (auto cov : {Covariate::DemShare, Covariate::Turnout, Covariate::MinorityShare, Covariate::Hhi}) {
    const auto bins = error_summary(region.graph, truth, truth, cov, 4);
    std::size_t total_count = 0;
    for (const auto& b : bins) {
      total_count += b.count;
      if (b.count > 0) EXPECT_EQ(b.mean_error, 0.0);
      if (b.count > 1) EXPECT_EQ(b.sd_error, 0.0);
    }
    EXPECT_EQ(total_count, region.graph.num_nodes());
  }
}

TEST(ErrorSummary, ConstructedTurnoutFixture) {
  // Four precincts; the two low-turnout ones gain 5 people, the two
  // high-turnout ones lose 5.
  std::vector<PrecinctAttributes> nodes;
  const std::vector<double> turnout = {0.2, 0.25, 0.8, 0.9};
  for (int i = 0; i < 4; ++i) {
    PrecinctAttributes p;
    p.id = "p" + std::to_string(i);
    p.county = "c";
    p.race[0] = 100;
    p.votes_dem = 1;
    p.votes_rep = 1;
    p.turnout = turnout[static_cast<std::size_t>(i)];
    nodes.push_back(p);
  }
  const auto region = oracle::make_region(nodes, {{"p0", "p1"}, {"p1", "p2"}, {"p2", "p3"}});
  auto noisy = region.scenarios[0];
  for (int i = 0; i < 4; ++i) {
    const std::int64_t d = i < 2 ? 5 : -5;
    noisy.race[static_cast<std::size_t>(i)][0] += d;
    noisy.population[static_cast<std::size_t>(i)] += d;
  }
  const auto bins = error_summary(region.graph, region.scenarios[0], noisy, Covariate::Turnout, 2);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins[0].count, 2u);
  EXPECT_EQ(bins[1].count, 2u);
  EXPECT_DOUBLE_EQ(bins[0].mean_error, 5.0);
  EXPECT_DOUBLE_EQ(bins[1].mean_error, -5.0);
  EXPECT_DOUBLE_EQ(bins[0].low, 0.2);
  EXPECT_DOUBLE_EQ(bins[1].high, 0.9);

  // A three-way split leaves the middle bin empty; it prints as NA.
  const auto three = error_summary(region.graph, region.scenarios[0], noisy, Covariate::Turnout, 3);
  EXPECT_FALSE(three[1].defined);
  EXPECT_TRUE(std::isnan(three[1].mean_error));
  std::ostringstream out;
  write_error_summary_csv(out, three);
  EXPECT_NE(out.str().find(",0,NA,NA\n"), std::string::npos);
  EXPECT_EQ(out.str().rfind("bin_low,bin_high,count,mean_error,sd_error\n", 0), 0u);
}

TEST(ErrorSummary, MatchesGroupByOracle) {
  const auto region = state();
  const auto& truth = region.scenarios[0];
  const auto noisy = perturb_scenario(region.graph, truth, with(6.0, 2), "n");
  const int n_bins = 5;
  const auto bins = error_summary(region.graph, truth, noisy, Covariate::MinorityShare, n_bins);

  // Independent group-by: recompute the covariate from raw counts.
  std::vector<double> x(truth.race.size());
  for (std::size_t v = 0; v < x.size(); ++v) {
    x[v] = 1.0 - static_cast<double>(truth.race[v][0]) / static_cast<double>(truth.population[v]);
  }
  const double lo = *std::min_element(x.begin(), x.end());
  const double hi = *std::max_element(x.begin(), x.end());
  std::vector<std::vector<double>> groups(n_bins);
  for (std::size_t v = 0; v < x.size(); ++v) {
    int b = static_cast<int>((x[v] - lo) / (hi - lo) * n_bins);
    b = std::min(b, n_bins - 1);
    groups[static_cast<std::size_t>(b)].push_back(static_cast<double>(noisy.population[v] - truth.population[v]));
  }
  for (int b = 0; b < n_bins; ++b) {
    const auto& g = groups[static_cast<std::size_t>(b)];
    ASSERT_EQ(bins[static_cast<std::size_t>(b)].count, g.size());
    if (g.empty()) continue;
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    EXPECT_NEAR(bins[static_cast<std::size_t>(b)].mean_error, mean, 1e-9);
    if (g.size() > 1) {
      double ss = 0.0;
      for (double e : g) ss += (e - mean) * (e - mean);
      EXPECT_NEAR(bins[static_cast<std::size_t>(b)].sd_error, std::sqrt(ss / static_cast<double>(g.size() - 1)), 1e-9);
    }
  }
  EXPECT_THROW(error_summary(region.graph, truth, noisy, Covariate::Hhi, 1), ValidationError);
  EXPECT_EQ(parse_covariate("dem_share"), Covariate::DemShare);
  EXPECT_THROW(parse_covariate("income"), ValidationError);
}
