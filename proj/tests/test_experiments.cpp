#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "redistrict/error.hpp"
#include "redistrict/experiments.hpp"
#include "redistrict/fixtures.hpp"
#include "redistrict/metrics.hpp"

using namespace redistrict;
using namespace redistrict::experiments;

namespace {

RegionData small_state(std::uint64_t seed = 1) {
  fixtures::StateSpec spec;
  spec.rows = 6;
  spec.cols = 6;
  spec.county_size = 3;
  spec.seed = seed;
  return fixtures::synthetic_state(spec);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double sum_values(const nlohmann::ordered_json& obj) {
  double s = 0.0;
  for (const auto& [k, v] : obj.items()) s += v.get<double>();
  return s;
}

}  // namespace

TEST(PrepareScenarios, IdsMetadataAndSeedDependence) {
  const auto region = small_state();
  NoiseSetup setup;
  setup.scales = {0.0, 4.0};
  setup.calibrate_error = 0.01;
  nlohmann::ordered_json meta;
  const auto s = prepare_scenarios(region, setup, 3, &meta);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].id, "census");
  EXPECT_EQ(s[1].id, "noisy-s0");
  EXPECT_EQ(s[2].id, "noisy-s4");
  EXPECT_EQ(s[3].id, "noisy-cal");
  EXPECT_EQ(s[1].race, s[0].race);
  EXPECT_EQ(meta["noisy-s0"]["mean_relative_error"].get<double>(), 0.0);
  EXPECT_NEAR(meta["noisy-cal"]["mean_relative_error"].get<double>(), 0.01, 0.005);
  for (const auto& sc : s) EXPECT_EQ(sc.total_population(), s[0].total_population());

  const auto again = prepare_scenarios(region, setup, 3);
  EXPECT_EQ(again, s);
  EXPECT_NE(prepare_scenarios(region, setup, 4)[2].race, s[2].race);
}

TEST(PrepareScenarios, MixedPrecinctNoiseLeavesHomogeneousPrecinctsAlone) {
  const auto region = small_state();
  const auto& truth = region.scenarios[0];
  noise::NoiseSpec spec;
  spec.scale = 10.0;
  spec.seed = 2;
  const double ceiling = 60.0;
  const auto out = perturb_mixed_precincts(region.graph, truth, spec, ceiling, "m");
  EXPECT_EQ(out.total_population(), truth.total_population());
  int mixed = 0;
  int changed = 0;
  for (std::size_t v = 0; v < truth.race.size(); ++v) {
    EXPECT_EQ(total(out.race[v]), out.population[v]);
    if (metrics::hhi(truth.race[v]) >= ceiling) {
      EXPECT_EQ(out.race[v], truth.race[v]);
    } else {
      ++mixed;
      changed += out.race[v] != truth.race[v];
    }
  }
  EXPECT_GT(mixed, 0);
  EXPECT_GT(changed, 0);
}

TEST(ParityExperiment, SingleScenarioHasZeroInvalidFraction) {
  const auto region = small_state();
  ParityConfig cfg;
  cfg.n_districts = 3;
  cfg.n_plans = 60;
  cfg.tolerances = {0.02, 0.05};
  const auto r = run_parity_experiment(region, cfg);
  const auto& inv = r.summary["invalid_fraction"]["census"];
  EXPECT_EQ(inv["0.02"]["census"].get<double>(), 0.0);
  EXPECT_EQ(inv["0.05"]["census"].get<double>(), 0.0);
  EXPECT_EQ(r.summary["ensembles"].size(), 2u);
  // One invalid_fraction row per (gen, tol, eval) plus one max_deviation row per plan.
  EXPECT_EQ(r.rows.size(), 2u * (1u + 60u));
}

TEST(ParityExperiment, IdenticalScenarioCopiesAgree) {
  const auto region = small_state();
  ParityConfig cfg;
  cfg.n_districts = 3;
  cfg.n_plans = 60;
  cfg.tolerances = {0.02};
  cfg.noise.scales = {0.0};
  cfg.per_plan_rows = false;
  const auto r = run_parity_experiment(region, cfg);
  const auto& inv = r.summary["invalid_fraction"];
  EXPECT_EQ(inv["census"]["0.02"]["noisy-s0"].get<double>(), 0.0);
  EXPECT_EQ(inv["noisy-s0"]["0.02"]["census"].get<double>(), 0.0);
  EXPECT_EQ(r.rows.size(), 4u);
}

TEST(PartisanExperiment, HistogramsNormalizedAndCopiesIdentical) {
  const auto region = small_state();
  PartisanConfig cfg;
  cfg.n_districts = 4;
  cfg.n_plans = 80;
  cfg.tolerance = 0.05;
  cfg.noise.scales = {0.0, 5.0};
  Plan enacted{4, std::vector<int>(36)};
  for (int v = 0; v < 36; ++v) enacted.district[static_cast<std::size_t>(v)] = 1 + (v % 6) / 2 + (v >= 18 && (v % 6) >= 4);
  for (auto& d : enacted.district) d = std::min(d, 4);
  cfg.enacted = enacted;
  const auto r = run_partisan_experiment(region, cfg);
  const auto& h = r.summary["histograms"];
  EXPECT_NEAR(sum_values(h["census"]), 1.0, 1e-12);
  EXPECT_NEAR(sum_values(h["noisy-s5"]), 1.0, 1e-12);
  EXPECT_EQ(h["census"].dump(), h["noisy-s0"].dump());
  EXPECT_EQ(r.summary["enacted_seats"].get<int>(), metrics::dem_majority_seats(enacted, region.graph));
}

TEST(MmdExperiment, ReferenceAgainstItselfHasZeroDifferenceAndDiagonalConfusion) {
  const auto region = small_state();
  MmdConfig cfg;
  cfg.n_districts = 3;
  cfg.tolerance = 0.05;
  cfg.n_steps = 300;
  cfg.vra_weights = {0.0, 2.0};
  cfg.vra_target_mmds = 1;
  cfg.noise.scales = {0.0};
  const auto r = run_mmd_experiment(region, cfg);
  EXPECT_EQ(r.summary["max_abs_difference"]["0"]["noisy-s0"].get<double>(), 0.0);
  EXPECT_EQ(r.summary["max_abs_difference"]["2"]["noisy-s0"].get<double>(), 0.0);
  EXPECT_NEAR(sum_values(r.summary["mmd_histograms"]["0"]["census"]), 1.0, 1e-12);

  std::size_t confusion_tables = 0;
  for (const auto& t : r.tables) {
    if (t.name.rfind("confusion_", 0) != 0) {
      EXPECT_EQ(t.row_labels.size(), 36u);
      continue;
    }
    ++confusion_tables;
    EXPECT_EQ(t.corner, "mmd_census\\mmd_noisy-s0");
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j + 1 < t.cells[i].size(); ++j) {
        row += t.cells[i][j];
        if (i != j) EXPECT_EQ(t.cells[i][j], 0.0);
      }
      if (t.cells[i].back() > 0) EXPECT_NEAR(row, 100.0, 1e-9);
    }
  }
  EXPECT_EQ(confusion_tables, 2u);
}

TEST(MmdExperiment, NoisyScenarioRowsSumTo100) {
  const auto region = small_state();
  MmdConfig cfg;
  cfg.n_districts = 3;
  cfg.tolerance = 0.05;
  cfg.n_steps = 300;
  cfg.vra_weights = {0.0};
  cfg.noise.scales = {30.0};
  const auto r = run_mmd_experiment(region, cfg);
  for (const auto& t : r.tables) {
    if (t.name.rfind("confusion_", 0) != 0) continue;
    for (const auto& row : t.cells) {
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < row.size(); ++j) s += row[j];
      if (row.back() > 0) EXPECT_NEAR(s, 100.0, 1e-9);
      else EXPECT_EQ(s, 0.0);
    }
  }
}

TEST(ImputedVoters, RoundsPosteriorMassToVoterCount) {
  const auto region = oracle::path_region({5, 5});
  std::vector<bisg::VoterRecord> voters(3);
  voters[0].geography = "p0";
  voters[1].geography = "p0";
  voters[2].geography = "p1";
  const std::vector<bisg::RaceVector> post = {bisg::RaceVector{0.6, 0.4, 0, 0, 0}, bisg::RaceVector{0.5, 0.5, 0, 0, 0},
                                              bisg::RaceVector{0.1, 0.2, 0.7, 0, 0}};
  const auto s = imputed_voter_scenario(region.graph, voters, post, "imp");
  EXPECT_EQ(s.population, (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(s.race[0], (RaceCounts{1, 1, 0, 0, 0}));
  EXPECT_EQ(s.race[1], (RaceCounts{0, 0, 1, 0, 0}));
}

TEST(BisgExperiment, IdenticalScenariosGiveIdenticalAuroc) {
  const auto region = small_state();
  const auto tables = fixtures::synthetic_name_tables(15, 1);
  const auto voters = fixtures::synthetic_voters(region.graph, region.scenarios[0], tables, 40, 2);
  BisgConfig cfg;
  cfg.n_districts = 3;
  cfg.n_plans = 50;
  cfg.noise.scales = {0.0, 8.0};
  const auto r = run_bisg_experiment(region, voters, tables, cfg);
  const auto& a = r.summary["auroc"];
  EXPECT_EQ(a["census"].dump(), a["noisy-s0"].dump());
  for (const auto& [race, v] : a["census"].items()) {
    EXPECT_GT(v.get<double>(), 0.5) << race;
    EXPECT_LE(v.get<double>(), 1.0) << race;
  }
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].name, "confusion_imputed");
}

TEST(BisgExperiment, SingleRaceLabelsRejected) {
  const auto region = small_state();
  const auto tables = fixtures::synthetic_name_tables(5, 1);
  auto voters = fixtures::synthetic_voters(region.graph, region.scenarios[0], tables, 5, 2);
  for (auto& v : voters) v.true_race = Race::White;
  EXPECT_THROW(run_bisg_experiment(region, voters, tables, BisgConfig{}), ValidationError);
  voters[0].true_race.reset();
  EXPECT_THROW(run_bisg_experiment(region, voters, tables, BisgConfig{}), ValidationError);
}

TEST(Reports, DeterministicAndCarryProvenance) {
  const auto region = small_state();
  ParityConfig cfg;
  cfg.n_districts = 3;
  cfg.n_plans = 40;
  cfg.tolerances = {0.05};
  cfg.noise.scales = {6.0};
  cfg.seed = 17;
  const auto a = run_parity_experiment(region, cfg);
  const auto b = run_parity_experiment(region, cfg);
  const auto dir = std::filesystem::temp_directory_path() / "redistrict_test_reports";
  std::filesystem::remove_all(dir);
  const auto fa = a.write(dir / "a", ReportFormat::Csv);
  const auto fb = b.write(dir / "b", ReportFormat::Csv);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(slurp(fa[i]), slurp(fb[i])) << fa[i];

  const auto& p = a.provenance;
  EXPECT_EQ(p["experiment"], "parity");
  EXPECT_EQ(p["seed"].get<std::uint64_t>(), 17u);
  EXPECT_EQ(p["region_sha256"], sha256_hex(region_to_json(region.graph, region.scenarios).dump()));
  EXPECT_EQ(p["region_sha256"].get<std::string>().size(), 64u);
  EXPECT_NE(small_state(2).graph.nodes(), region.graph.nodes());
  EXPECT_NE(run_parity_experiment(small_state(2), cfg).provenance["region_sha256"], p["region_sha256"]);
  std::filesystem::remove_all(dir);
}
