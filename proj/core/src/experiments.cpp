#include "redistrict/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"
#include "redistrict/mergesplit.hpp"
#include "redistrict/random.hpp"
#include "redistrict/smc.hpp"

namespace redistrict::experiments {

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string key(double x) { return csv::format_double(x); }

nlohmann::ordered_json noise_setup_json(const NoiseSetup& s) {
  nlohmann::ordered_json j;
  j["base_scenario"] = s.base_scenario;
  j["scales"] = s.scales;
  j["calibrate_error"] = s.calibrate_error ? nlohmann::ordered_json(*s.calibrate_error) : nlohmann::ordered_json();
  j["majority_race_protected"] = s.majority_race_protected;
  j["preserve_precinct_totals"] = s.preserve_precinct_totals;
  j["mixed_hhi_ceiling"] = s.mixed_hhi_ceiling ? nlohmann::ordered_json(*s.mixed_hhi_ceiling) : nlohmann::ordered_json();
  return j;
}

nlohmann::ordered_json base_provenance(const RegionData& region, std::string_view experiment, std::uint64_t seed,
                                       nlohmann::ordered_json config) {
  nlohmann::ordered_json p;
  p["tool"] = "redistrict-lab";
  p["version"] = kToolVersion;
  p["experiment"] = experiment;
  p["seed"] = seed;
  p["region_sha256"] = sha256_hex(region_to_json(region.graph, region.scenarios).dump());
  p["precincts"] = region.graph.num_nodes();
  p["edges"] = region.graph.num_edges();
  p["config"] = std::move(config);
  return p;
}

std::vector<std::string> scenario_ids(const std::vector<PopulationScenario>& scenarios) {
  std::vector<std::string> ids;
  for (const auto& s : scenarios) ids.push_back(s.id);
  return ids;
}

}  // namespace

PopulationScenario perturb_mixed_precincts(const RegionGraph& graph, const PopulationScenario& scenario,
                                           const noise::NoiseSpec& spec, double hhi_ceiling, std::string new_id) {
  noise::NoiseSpec precinct_only = spec;
  precinct_only.levels = {noise::Level::Precinct};
  precinct_only.total_population_exact = false;
  auto noisy = noise::perturb_scenario(graph, scenario, precinct_only, new_id);

  std::vector<char> mixed(graph.num_nodes(), 0);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    mixed[v] = scenario.population[v] > 0 && metrics::hhi(scenario.race[v]) < hhi_ceiling;
    if (!mixed[v]) noisy.race[v] = scenario.race[v];
  }
  if (spec.total_population_exact && !spec.precinct_totals_exact) {
    // Restore the grand total using only the mixed precincts' cells.
    std::int64_t fixed_total = 0;
    std::vector<double> cells;
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
      if (!mixed[v]) {
        fixed_total += total(noisy.race[v]);
        continue;
      }
      for (auto c : noisy.race[v]) cells.push_back(static_cast<double>(c));
    }
    const auto want = scenario.total_population() - fixed_total;
    if (!cells.empty() && want > 0) {
      const auto rounded = noise::controlled_round(cells, want);
      std::size_t k = 0;
      for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        if (!mixed[v]) continue;
        for (std::size_t r = 0; r < kNumRaces; ++r) noisy.race[v][r] = rounded[k++];
      }
    }
  }
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) noisy.population[v] = total(noisy.race[v]);
  return noisy;
}

std::vector<PopulationScenario> prepare_scenarios(const RegionData& region, const NoiseSetup& setup,
                                                  std::uint64_t seed, nlohmann::ordered_json* meta) {
  std::vector<PopulationScenario> out = region.scenarios;
  const auto& base = setup.base_scenario.empty() ? region.scenarios.front() : region.scenario(setup.base_scenario);

  auto make = [&](double scale, std::string id, std::uint64_t noise_seed) {
    noise::NoiseSpec spec;
    spec.scale = scale;
    spec.seed = noise_seed;
    spec.majority_race_protected = setup.majority_race_protected;
    spec.precinct_totals_exact = setup.preserve_precinct_totals;
    auto s = setup.mixed_hhi_ceiling
                 ? perturb_mixed_precincts(region.graph, base, spec, *setup.mixed_hhi_ceiling, std::move(id))
                 : noise::perturb_scenario(region.graph, base, spec, std::move(id));
    if (meta) {
      (*meta)[s.id] = {{"base", base.id},
                       {"scale", scale},
                       {"mean_relative_error", noise::mean_relative_error(base, s)},
                       {"mean_absolute_cell_error", noise::mean_absolute_cell_error(base, s)}};
    }
    out.push_back(std::move(s));
  };

  for (std::size_t i = 0; i < setup.scales.size(); ++i) {
    make(setup.scales[i], "noisy-s" + key(setup.scales[i]), Rng::substream(seed, 0x701e, i).next());
  }
  if (setup.calibrate_error) {
    noise::NoiseSpec spec;
    spec.majority_race_protected = setup.majority_race_protected;
    spec.precinct_totals_exact = setup.preserve_precinct_totals;
    const double scale = noise::calibrate_scale(region.graph, base, spec, *setup.calibrate_error, 20, seed);
    make(scale, "noisy-cal", Rng::substream(seed, 0x701e, 0xca1).next());
  }
  return out;
}

// ---------------------------------------------------------------------------

MetricReport run_parity_experiment(const RegionData& region, const ParityConfig& config) {
  nlohmann::ordered_json cfg;
  cfg["n_districts"] = config.n_districts;
  cfg["n_plans"] = config.n_plans;
  cfg["tolerances"] = config.tolerances;
  cfg["noise"] = noise_setup_json(config.noise);
  cfg["max_county_splits"] =
      config.max_county_splits ? nlohmann::ordered_json(*config.max_county_splits) : nlohmann::ordered_json();

  MetricReport report;
  report.experiment = "parity";
  report.provenance = base_provenance(region, "parity", config.seed, cfg);

  nlohmann::ordered_json noise_meta = nlohmann::ordered_json::object();
  const auto scenarios = prepare_scenarios(region, config.noise, config.seed, &noise_meta);
  report.summary["scenarios"] = scenario_ids(scenarios);
  report.summary["noise"] = noise_meta;

  auto invalid = nlohmann::ordered_json::object();
  auto ensembles = nlohmann::ordered_json::array();
  for (const auto& gen : scenarios) {
    for (std::size_t t = 0; t < config.tolerances.size(); ++t) {
      const double tol = config.tolerances[t];
      ConstraintConfig cc;
      cc.pop_tolerance = tol;
      cc.max_county_splits = config.max_county_splits;
      const auto seed = Rng::substream(config.seed, 0x9a21, t).next();
      const auto ensemble =
          sample_plans_smc(region.graph, gen, config.n_districts, cc, config.n_plans, seed, SmcOptions{config.threads});
      ensembles.push_back({{"generating", gen.id}, {"tolerance", tol}, {"seed", seed},
                           {"ess", ensemble.provenance.diagnostics["ess"]}});

      for (const auto& eval : scenarios) {
        const auto re = metrics::reevaluate_ensemble(ensemble, eval, tol);
        invalid[gen.id][key(tol)][eval.id] = re.invalid_fraction;
        const std::string prefix = "gen=" + gen.id + "/tol=" + key(tol) + "/eval=" + eval.id;
        report.add("invalid_fraction/" + prefix, re.invalid_fraction);
        if (config.per_plan_rows) {
          for (std::size_t i = 0; i < re.max_deviation.size(); ++i) {
            report.add("max_deviation/" + prefix, re.max_deviation[i], i);
          }
        }
      }
    }
  }
  report.summary["invalid_fraction"] = std::move(invalid);
  report.summary["ensembles"] = std::move(ensembles);
  return report;
}

MetricReport run_partisan_experiment(const RegionData& region, const PartisanConfig& config) {
  nlohmann::ordered_json cfg;
  cfg["n_districts"] = config.n_districts;
  cfg["n_plans"] = config.n_plans;
  cfg["tolerance"] = config.tolerance;
  cfg["noise"] = noise_setup_json(config.noise);
  cfg["enacted_plan"] = config.enacted.has_value();

  MetricReport report;
  report.experiment = "partisan";
  report.provenance = base_provenance(region, "partisan", config.seed, cfg);

  nlohmann::ordered_json noise_meta = nlohmann::ordered_json::object();
  const auto scenarios = prepare_scenarios(region, config.noise, config.seed, &noise_meta);
  report.summary["scenarios"] = scenario_ids(scenarios);
  report.summary["noise"] = noise_meta;

  if (config.enacted) {
    validate_plan_labels(region.graph, *config.enacted);
    const int seats = metrics::dem_majority_seats(*config.enacted, region.graph);
    report.summary["enacted_seats"] = seats;
    report.add("enacted_seats", seats);
  } else {
    report.summary["enacted_seats"] = nullptr;
  }

  auto hists = nlohmann::ordered_json::object();
  ConstraintConfig cc;
  cc.pop_tolerance = config.tolerance;
  const auto seed = Rng::substream(config.seed, 0x5ea7).next();
  for (const auto& s : scenarios) {
    const auto ensemble =
        sample_plans_smc(region.graph, s, config.n_districts, cc, config.n_plans, seed, SmcOptions{config.threads});
    const auto hist = metrics::seats_histogram(
        ensemble, [&](const Plan& p) { return metrics::dem_majority_seats(p, region.graph); });
    auto h = nlohmann::ordered_json::object();
    for (const auto& [seats, mass] : hist) {
      h[std::to_string(seats)] = mass;
      report.add("dem_seats/scenario=" + s.id + "/seats=" + std::to_string(seats), mass);
    }
    hists[s.id] = std::move(h);
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      report.add("dem_seats/scenario=" + s.id, metrics::dem_majority_seats(ensemble.plans[i], region.graph), i);
    }
  }
  report.summary["histograms"] = std::move(hists);
  return report;
}

ReportTable confusion_report_table(const metrics::ConfusionTable& table, std::string name,
                                   const std::string& row_scenario, const std::string& col_scenario) {
  ReportTable t;
  t.name = std::move(name);
  t.corner = "mmd_" + row_scenario + "\\mmd_" + col_scenario;
  for (int j = 0; j < table.size; ++j) t.columns.push_back(std::to_string(j));
  t.columns.push_back("plans");
  for (int i = 0; i < table.size; ++i) {
    t.row_labels.push_back(std::to_string(i));
    std::vector<double> row;
    for (int j = 0; j < table.size; ++j) row.push_back(table.at(i, j));
    row.push_back(static_cast<double>(table.row_plans[static_cast<std::size_t>(i)]));
    t.cells.push_back(std::move(row));
  }
  return t;
}

MetricReport run_mmd_experiment(const RegionData& region, const MmdConfig& config) {
  nlohmann::ordered_json cfg;
  cfg["n_districts"] = config.n_districts;
  cfg["tolerance"] = config.tolerance;
  cfg["n_steps"] = config.n_steps;
  cfg["thin"] = config.thin;
  cfg["vra_weights"] = config.vra_weights;
  cfg["vra_target_mmds"] = config.vra_target_mmds;
  cfg["compactness_weight"] = config.compactness_weight;
  cfg["mmd_definition"] = config.mmd.name();
  cfg["noise"] = noise_setup_json(config.noise);

  MetricReport report;
  report.experiment = "mmd";
  report.provenance = base_provenance(region, "mmd", config.seed, cfg);

  nlohmann::ordered_json noise_meta = nlohmann::ordered_json::object();
  const auto scenarios = prepare_scenarios(region, config.noise, config.seed, &noise_meta);
  report.summary["scenarios"] = scenario_ids(scenarios);
  report.summary["noise"] = noise_meta;
  const auto& reference = scenarios.front();

  const auto init_seed = Rng::substream(config.seed, 0x1417).next();
  const auto chain_seed = Rng::substream(config.seed, 0xc4a1).next();

  ConstraintConfig start_cc;
  start_cc.pop_tolerance = config.tolerance;
  std::vector<Plan> initial;
  for (const auto& s : scenarios) {
    initial.push_back(sample_plans_smc(region.graph, s, config.n_districts, start_cc, 1, init_seed, SmcOptions{1}).plans[0]);
  }

  auto max_diff = nlohmann::ordered_json::object();
  auto hists = nlohmann::ordered_json::object();
  auto accept = nlohmann::ordered_json::object();
  for (double weight : config.vra_weights) {
    ConstraintConfig cc;
    cc.pop_tolerance = config.tolerance;
    cc.vra_weight = weight;
    cc.vra_target_mmds = config.vra_target_mmds;
    cc.compactness_weight = config.compactness_weight;
    cc.mmd = config.mmd;
    const ChainOptions opts{config.n_steps, config.thin, std::nullopt};
    const std::string wk = key(weight);

    std::vector<std::vector<double>> probs;
    std::vector<PlanEnsemble> chains;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      const auto& s = scenarios[si];
      chains.push_back(mergesplit_chain(region.graph, s, initial[si], cc, opts, chain_seed));
      const auto& ens = chains.back();
      accept[wk][s.id] = ens.provenance.diagnostics["acceptance_rate"];
      probs.push_back(metrics::mmd_membership_prob(ens, s, config.mmd));
      const auto hist = metrics::seats_histogram(ens, [&](const Plan& p) { return metrics::mmd_count(p, s, config.mmd); });
      auto h = nlohmann::ordered_json::object();
      for (const auto& [count, mass] : hist) {
        h[std::to_string(count)] = mass;
        report.add("mmd_count/w=" + wk + "/scenario=" + s.id + "/mmds=" + std::to_string(count), mass);
      }
      hists[wk][s.id] = std::move(h);
    }

    ReportTable prob_table;
    prob_table.name = "mmd_probability_w" + wk;
    prob_table.corner = "precinct_id";
    for (const auto& s : scenarios) prob_table.columns.push_back("p_" + s.id);
    for (std::size_t si = 1; si < scenarios.size(); ++si) {
      prob_table.columns.push_back("diff_" + reference.id + "_minus_" + scenarios[si].id);
    }
    std::vector<std::vector<double>> diffs;
    for (std::size_t si = 1; si < scenarios.size(); ++si) {
      diffs.push_back(metrics::prob_difference(probs[0], probs[si]));
      double m = 0.0;
      for (double d : diffs.back()) m = std::max(m, std::abs(d));
      max_diff[wk][scenarios[si].id] = m;
      report.add("max_abs_difference/w=" + wk + "/scenario=" + scenarios[si].id, m);

      const auto table = metrics::mmd_confusion(chains[si], reference, scenarios[si], config.mmd);
      report.tables.push_back(confusion_report_table(table, "confusion_w" + wk + "_" + scenarios[si].id,
                                                     reference.id, scenarios[si].id));
    }
    for (std::size_t v = 0; v < region.graph.num_nodes(); ++v) {
      prob_table.row_labels.push_back(region.graph.node(static_cast<int>(v)).id);
      std::vector<double> row;
      for (const auto& p : probs) row.push_back(p[v]);
      for (const auto& d : diffs) row.push_back(d[v]);
      prob_table.cells.push_back(std::move(row));
    }
    report.tables.push_back(std::move(prob_table));
  }
  report.summary["max_abs_difference"] = std::move(max_diff);
  report.summary["mmd_histograms"] = std::move(hists);
  report.summary["acceptance_rate"] = std::move(accept);
  return report;
}

// ---------------------------------------------------------------------------

PopulationScenario imputed_voter_scenario(const RegionGraph& graph, std::span<const bisg::VoterRecord> voters,
                                          std::span<const bisg::RaceVector> posteriors, std::string id) {
  if (voters.size() != posteriors.size()) throw ValidationError("imputation: voters and posteriors differ in length");
  std::vector<bisg::RaceVector> mass(graph.num_nodes(), bisg::RaceVector{});
  std::vector<std::int64_t> count(graph.num_nodes(), 0);
  for (std::size_t i = 0; i < voters.size(); ++i) {
    const auto v = static_cast<std::size_t>(graph.require_index(voters[i].geography));
    for (std::size_t r = 0; r < kNumRaces; ++r) mass[v][r] += posteriors[i][r];
    ++count[v];
  }
  PopulationScenario s;
  s.id = std::move(id);
  s.race.assign(graph.num_nodes(), RaceCounts{});
  s.population.assign(graph.num_nodes(), 0);
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    if (count[v] == 0) continue;
    const auto rounded = noise::controlled_round(mass[v], count[v]);
    std::copy(rounded.begin(), rounded.end(), s.race[v].begin());
    s.population[v] = count[v];
  }
  return s;
}

MetricReport run_bisg_experiment(const RegionData& region, std::span<const bisg::VoterRecord> voters,
                                 const bisg::NameTables& tables, const BisgConfig& config) {
  nlohmann::ordered_json cfg;
  cfg["noise"] = noise_setup_json(config.noise);
  cfg["n_districts"] = config.n_districts;
  cfg["n_plans"] = config.n_plans;
  cfg["tolerance"] = config.tolerance;
  cfg["mmd_definition"] = config.mmd.name();
  cfg["voters"] = voters.size();
  cfg["surnames"] = tables.surname.size();
  cfg["first_names"] = tables.first.size();
  cfg["middle_names"] = tables.middle.size();

  MetricReport report;
  report.experiment = "bisg";
  report.provenance = base_provenance(region, "bisg", config.seed, cfg);

  std::vector<Race> truth;
  truth.reserve(voters.size());
  for (const auto& v : voters) {
    if (!v.true_race) throw ValidationError("voter '" + v.voter_id + "' has no true_race label");
    truth.push_back(*v.true_race);
  }
  for (auto r : kAllRaces) {
    const bool present = std::find(truth.begin(), truth.end(), r) != truth.end();
    const bool absent = std::find_if(truth.begin(), truth.end(), [r](Race t) { return t != r; }) != truth.end();
    if (!present || !absent) {
      throw ValidationError("AUROC for race '" + std::string(race_key(r)) +
                            "' is undefined: voter labels are all one class for this race");
    }
  }

  nlohmann::ordered_json noise_meta = nlohmann::ordered_json::object();
  const auto scenarios = prepare_scenarios(region, config.noise, config.seed, &noise_meta);
  report.summary["scenarios"] = scenario_ids(scenarios);
  report.summary["noise"] = noise_meta;

  auto auroc_json = nlohmann::ordered_json::object();
  auto miss_json = nlohmann::ordered_json::object();
  std::vector<PopulationScenario> imputed;
  for (const auto& s : scenarios) {
    const auto prior = bisg::build_geo_prior(region.graph, s);
    std::vector<bisg::RaceVector> post;
    post.reserve(voters.size());
    for (const auto& v : voters) post.push_back(bisg::posterior_race(v, tables, prior));

    std::vector<double> scores(voters.size());
    std::vector<char> labels(voters.size());
    for (auto r : kAllRaces) {
      const auto ri = static_cast<std::size_t>(r);
      for (std::size_t i = 0; i < voters.size(); ++i) {
        scores[i] = post[i][ri];
        labels[i] = truth[i] == r;
      }
      const double a = bisg::auroc(scores, labels);
      auroc_json[s.id][std::string(race_key(r))] = a;
      report.add("auroc/scenario=" + s.id + "/race=" + std::string(race_key(r)), a);
    }
    std::vector<Race> predicted;
    predicted.reserve(post.size());
    for (const auto& p : post) predicted.push_back(bisg::classify(p));
    const double miss = bisg::misclassification_rate(predicted, truth);
    miss_json[s.id] = miss;
    report.add("misclassification/scenario=" + s.id, miss);
    report.summary["uniform_prior_fallbacks"][s.id] = prior.uniform_fallback.size();

    imputed.push_back(imputed_voter_scenario(region.graph, voters, post, "imputed-" + s.id));
  }

  report.summary["auroc"] = std::move(auroc_json);
  report.summary["misclassification"] = std::move(miss_json);

  // Plans drawn from the last (noisiest) scenario, MMDs counted on imputed voters.
  ConstraintConfig cc;
  cc.pop_tolerance = config.tolerance;
  const auto seed = Rng::substream(config.seed, 0xb156).next();
  const auto ensemble = sample_plans_smc(region.graph, scenarios.back(), config.n_districts, cc, config.n_plans, seed,
                                         SmcOptions{config.threads});
  const auto table = metrics::mmd_confusion(ensemble, imputed.front(), imputed.back(), config.mmd);
  report.summary["confusion_plans_from"] = scenarios.back().id;
  report.tables.push_back(
      confusion_report_table(table, "confusion_imputed", imputed.front().id, imputed.back().id));
  return report;
}

}  // namespace redistrict::experiments
