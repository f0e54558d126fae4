// redistrict-lab: command-line front end over the redistrict core library.
//
// Exit codes: 0 success, 1 unexpected failure, 2 validation error (including
// bad arguments), 3 sampler infeasibility.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "redistrict/bisg.hpp"
#include "redistrict/csv.hpp"
#include "redistrict/ensemble_io.hpp"
#include "redistrict/error.hpp"
#include "redistrict/experiments.hpp"
#include "redistrict/fixtures.hpp"
#include "redistrict/graph.hpp"
#include "redistrict/mergesplit.hpp"
#include "redistrict/metrics.hpp"
#include "redistrict/noise.hpp"
#include "redistrict/report.hpp"
#include "redistrict/smc.hpp"

namespace fs = std::filesystem;
using namespace redistrict;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

// Flags shared by every subcommand.
struct Common {
  std::string region;
  std::string scenario;
  std::size_t n_plans = 1000;
  std::vector<double> tolerances;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c, bool region_required = true) {
  auto* region = app->add_option("--region", c.region, "Region JSON file");
  if (region_required) region->required();
  app->add_option("--scenario", c.scenario, "Scenario id (default: first in the file)");
  app->add_option("--n-plans", c.n_plans, "Plans to sample")->check(CLI::PositiveNumber);
  app->add_option("--tolerance", c.tolerances, "Population parity tolerance(s) as fractions")->delimiter(',');
  app->add_option("--seed", c.seed, "64-bit RNG seed");
  app->add_option("--out", c.out, "Output file or directory");
  app->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", c.threads, "Worker threads (0: hardware concurrency)");
}

double single_tolerance(const Common& c, double fallback) {
  if (c.tolerances.empty()) return fallback;
  if (c.tolerances.size() > 1) throw ValidationError("this command takes a single --tolerance");
  return c.tolerances.front();
}

const PopulationScenario& pick_scenario(const RegionData& region, const std::string& id) {
  if (id.empty()) {
    if (region.scenarios.empty()) throw ValidationError("region has no scenarios");
    return region.scenarios.front();
  }
  return region.scenario(id);
}

metrics::MmdDefinition parse_mmd(const std::string& name) {
  if (name == "black") return metrics::MmdDefinition::black();
  if (name == "black_hispanic") return metrics::MmdDefinition::black_hispanic();
  throw ValidationError("unknown MMD definition '" + name + "' (black|black_hispanic)");
}

void write_json_out(const nlohmann::ordered_json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw ValidationError("cannot write " + out);
  f << doc.dump(2) << '\n';
}

void print_written(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

noise::NoiseSpec noise_spec_from(double scale, const std::vector<std::string>& levels, bool protect,
                                 std::uint64_t seed) {
  noise::NoiseSpec spec;
  spec.scale = scale;
  spec.seed = seed;
  spec.majority_race_protected = protect;
  if (!levels.empty()) {
    spec.levels.clear();
    for (const auto& l : levels) {
      if (l == "county") spec.levels.push_back(noise::Level::County);
      else if (l == "precinct") spec.levels.push_back(noise::Level::Precinct);
      else throw ValidationError("unknown noise level '" + l + "' (county|precinct)");
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  Common common;
  std::string synthetic;
  int rows = 10;
  int cols = 10;
  int county_size = 5;
};

int run_ingest(const IngestArgs& a) {
  if (!a.synthetic.empty()) {
    fixtures::StateSpec spec;
    spec.rows = a.rows;
    spec.cols = a.cols;
    spec.county_size = a.county_size;
    spec.layout = fixtures::parse_layout(a.synthetic);
    spec.seed = a.common.seed;
    const auto data = fixtures::synthetic_state(spec);
    if (a.common.out.empty()) throw ValidationError("--synthetic requires --out");
    save_region(a.common.out, data.graph, data.scenarios);
    std::cout << a.common.out << '\n';
    return 0;
  }
  if (a.common.region.empty()) throw ValidationError("--region is required unless --synthetic is given");
  const auto region = load_region_graph(a.common.region);
  nlohmann::ordered_json summary;
  summary["region"] = a.common.region;
  summary["sha256"] = sha256_file(a.common.region);
  summary["precincts"] = region.graph.num_nodes();
  summary["edges"] = region.graph.num_edges();
  summary["counties"] = region.graph.num_counties();
  for (const auto& s : region.scenarios) {
    summary["scenarios"].push_back({{"id", s.id}, {"total_population", s.total_population()}});
  }
  if (a.common.format == "csv") {
    std::cout << "key,value\nprecincts," << region.graph.num_nodes() << "\nedges," << region.graph.num_edges()
              << "\ncounties," << region.graph.num_counties() << '\n';
    for (const auto& s : region.scenarios) std::cout << "population:" << s.id << ',' << s.total_population() << '\n';
    if (!a.common.out.empty()) write_json_out(summary, a.common.out);
  } else {
    write_json_out(summary, a.common.out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// perturb

struct PerturbArgs {
  Common common;
  double scale = 1.0;
  std::optional<double> calibrate_error;
  std::vector<std::string> levels;
  bool majority_protected = false;
  bool preserve_totals = false;
  std::string new_id;
  std::string covariate;
  int bins = 10;
  std::string summary_out;
};

int run_perturb(const PerturbArgs& a) {
  auto region = load_region_graph(a.common.region);
  const auto& base = pick_scenario(region, a.common.scenario);
  auto spec = noise_spec_from(a.scale, a.levels, a.majority_protected, a.common.seed);
  spec.precinct_totals_exact = a.preserve_totals;
  if (a.calibrate_error) {
    spec.scale = noise::calibrate_scale(region.graph, base, spec, *a.calibrate_error, 20, a.common.seed);
  }
  const std::string id = a.new_id.empty() ? "noisy-s" + csv::format_double(spec.scale) : a.new_id;
  for (const auto& s : region.scenarios) {
    if (s.id == id) throw ValidationError("scenario '" + id + "' already exists");
  }
  auto noisy = noise::perturb_scenario(region.graph, base, spec, id);
  std::cerr << "scenario " << id << ": scale " << spec.scale << ", mean relative error "
            << noise::mean_relative_error(base, noisy) << '\n';

  if (!a.covariate.empty()) {
    const auto bins = noise::error_summary(region.graph, base, noisy, noise::parse_covariate(a.covariate), a.bins);
    if (a.summary_out.empty()) {
      noise::write_error_summary_csv(std::cout, bins);
    } else {
      std::ofstream f(a.summary_out);
      if (!f) throw ValidationError("cannot write " + a.summary_out);
      noise::write_error_summary_csv(f, bins);
    }
  }
  region.scenarios.push_back(std::move(noisy));
  save_region(a.common.out.empty() ? a.common.region : a.common.out, region.graph, region.scenarios);
  return 0;
}

// ---------------------------------------------------------------------------
// sample

struct SampleArgs {
  Common common;
  std::string sampler = "smc";
  int districts = 5;
  std::optional<int> max_county_splits;
  double compactness = 0.0;
  double vra_weight = 0.0;
  std::optional<int> vra_target;
  std::string mmd = "black";
  int retry_budget = 1000;
  std::string initial;
  std::size_t steps = 1000;
  std::size_t thin = 1;
  std::optional<std::size_t> burn_in;
};

int run_sample(const SampleArgs& a) {
  const auto region = load_region_graph(a.common.region);
  const auto& scenario = pick_scenario(region, a.common.scenario);
  ConstraintConfig cc;
  cc.pop_tolerance = single_tolerance(a.common, 0.01);
  cc.max_county_splits = a.max_county_splits;
  cc.compactness_weight = a.compactness;
  cc.vra_weight = a.vra_weight;
  cc.vra_target_mmds = a.vra_target;
  cc.mmd = parse_mmd(a.mmd);
  cc.retry_budget = a.retry_budget;
  if (a.common.out.empty()) throw ValidationError("sample requires --out <ensemble.csv>");

  PlanEnsemble ensemble;
  if (a.sampler == "smc") {
    ensemble = sample_plans_smc(region.graph, scenario, a.districts, cc, a.common.n_plans, a.common.seed,
                                SmcOptions{a.common.threads});
  } else {
    Plan initial;
    if (a.initial.empty()) {
      ConstraintConfig start = cc;
      start.compactness_weight = 0.0;
      start.vra_weight = 0.0;
      initial = sample_plans_smc(region.graph, scenario, a.districts, start, 1, a.common.seed, SmcOptions{1}).plans[0];
    } else {
      initial = read_plan_csv(a.initial, region.graph);
    }
    ensemble = mergesplit_chain(region.graph, scenario, initial, cc, ChainOptions{a.steps, a.thin, a.burn_in},
                                a.common.seed);
  }
  write_ensemble(a.common.out, region.graph, ensemble);
  std::cout << a.common.out << '\n' << a.common.out << ".json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  Common common;
  std::string ensemble;
  std::string plan;
  std::string mmd = "black";
};

int run_metrics(const MetricsArgs& a) {
  const auto region = load_region_graph(a.common.region);
  const auto& scenario = pick_scenario(region, a.common.scenario);
  const auto mmd = parse_mmd(a.mmd);

  PlanEnsemble ensemble;
  if (!a.ensemble.empty()) {
    ensemble = read_ensemble_csv(a.ensemble, region.graph);
  } else if (!a.plan.empty()) {
    ensemble.plans.push_back(read_plan_csv(a.plan, region.graph));
    ensemble.weights = {1.0};
  } else {
    throw ValidationError("metrics requires --ensemble or --plan");
  }
  const double tol = single_tolerance(a.common, ensemble.provenance.tolerance > 0 ? ensemble.provenance.tolerance : 0.01);

  MetricReport report;
  report.experiment = "metrics";
  report.provenance = {{"region_sha256", sha256_file(a.common.region)},
                       {"scenario", scenario.id},
                       {"tolerance", tol},
                       {"mmd_definition", mmd.name()},
                       {"source", a.ensemble.empty() ? a.plan : a.ensemble},
                       {"ensemble", provenance_to_json(ensemble.provenance)}};

  bool votes_ok = true;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto& p = ensemble.plans[i];
    report.add("weight", ensemble.weights[i], i);
    report.add("max_deviation", metrics::parity_deviation(p, scenario).max_deviation, i);
    report.add("contiguous", is_contiguous(region.graph, p) ? 1.0 : 0.0, i);
    report.add("county_splits", metrics::county_splits(p, region.graph), i);
    report.add("cut_edge_fraction", metrics::compactness_cut_edges(p, region.graph), i);
    report.add("mmd_count", metrics::mmd_count(p, scenario, mmd), i);
    try {
      report.add("dem_seats", metrics::dem_majority_seats(p, region.graph), i);
    } catch (const ValidationError&) {
      votes_ok = false;
    }
  }
  const auto re = metrics::reevaluate_ensemble(ensemble, scenario, tol);
  report.summary["plans"] = ensemble.size();
  report.summary["invalid_fraction"] = re.invalid_fraction;
  report.summary["kish_ess"] = metrics::effective_sample_size(ensemble.weights);
  for (const auto& [k, v] : metrics::seats_histogram(
           ensemble, [&](const Plan& p) { return metrics::mmd_count(p, scenario, mmd); })) {
    report.summary["mmd_histogram"][std::to_string(k)] = v;
  }
  if (votes_ok) {
    for (const auto& [k, v] : metrics::seats_histogram(
             ensemble, [&](const Plan& p) { return metrics::dem_majority_seats(p, region.graph); })) {
      report.summary["dem_seats_histogram"][std::to_string(k)] = v;
    }
  } else {
    report.summary["dem_seats_histogram"] = nullptr;
  }

  ReportTable probs;
  probs.name = "mmd_probability";
  probs.corner = "precinct_id";
  probs.columns = {"p_" + scenario.id};
  const auto p = metrics::mmd_membership_prob(ensemble, scenario, mmd);
  for (std::size_t v = 0; v < region.graph.num_nodes(); ++v) {
    probs.row_labels.push_back(region.graph.node(static_cast<int>(v)).id);
    probs.cells.push_back({p[v]});
  }
  report.tables.push_back(std::move(probs));

  print_written(report.write(a.common.out.empty() ? "." : a.common.out, parse_report_format(a.common.format)));
  return 0;
}

// ---------------------------------------------------------------------------
// bisg

struct BisgArgs {
  Common common;
  std::string voters;
  std::string surnames;
  std::string first_names;
  std::string middle_names;
  std::string make_fixture;
  int names_per_race = 40;
  int voters_per_precinct = 20;
};

bisg::NameTables load_tables(const std::string& surnames, const std::string& first, const std::string& middle) {
  if (surnames.empty()) throw ValidationError("--surnames is required");
  bisg::NameTables t;
  t.surname = bisg::NameTable::read_csv(surnames);
  if (!first.empty()) t.first = bisg::NameTable::read_csv(first);
  if (!middle.empty()) t.middle = bisg::NameTable::read_csv(middle);
  return t;
}

int run_bisg(const BisgArgs& a) {
  const auto region = load_region_graph(a.common.region);
  const auto& scenario = pick_scenario(region, a.common.scenario);

  if (!a.make_fixture.empty()) {
    const fs::path dir = a.make_fixture;
    fs::create_directories(dir);
    const auto tables = fixtures::synthetic_name_tables(a.names_per_race, a.common.seed);
    const auto voters =
        fixtures::synthetic_voters(region.graph, scenario, tables, a.voters_per_precinct, a.common.seed + 1);
    const std::vector<std::pair<std::string, const bisg::NameTable*>> files = {
        {"surnames.csv", &tables.surname}, {"first_names.csv", &tables.first}, {"middle_names.csv", &tables.middle}};
    for (const auto& [name, table] : files) {
      std::ofstream f(dir / name);
      table->write_csv(f);
      std::cout << (dir / name).string() << '\n';
    }
    std::ofstream f(dir / "voters.csv");
    bisg::write_voters_csv(f, voters);
    std::cout << (dir / "voters.csv").string() << '\n';
    return 0;
  }

  if (a.voters.empty()) throw ValidationError("bisg requires --voters (or --make-fixture)");
  const auto tables = load_tables(a.surnames, a.first_names, a.middle_names);
  const auto voters = bisg::read_voters_csv(a.voters);
  const auto prior = bisg::build_geo_prior(region.graph, scenario);
  for (const auto& g : prior.uniform_fallback) {
    std::cerr << "warning: precinct '" << g << "' has zero population; using a uniform prior\n";
  }
  std::vector<bisg::RaceVector> post;
  post.reserve(voters.size());
  for (const auto& v : voters) post.push_back(bisg::posterior_race(v, tables, prior));

  if (a.common.out.empty()) {
    bisg::write_predictions_csv(std::cout, voters, post);
  } else {
    std::ofstream f(a.common.out);
    if (!f) throw ValidationError("cannot write " + a.common.out);
    bisg::write_predictions_csv(f, voters, post);
    std::cout << a.common.out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  Common common;
  std::string name;
  std::optional<int> districts;
  std::vector<double> scales;
  std::optional<double> calibrate_error;
  bool majority_protected = false;
  bool preserve_totals = false;
  std::optional<double> mixed_hhi_ceiling;
  std::optional<int> max_county_splits;
  std::string enacted;
  std::size_t steps = 10000;
  std::size_t thin = 1;
  std::vector<double> vra_weights;
  int vra_target = 2;
  double compactness = 0.0;
  std::string mmd;
  bool no_per_plan = false;
  std::string voters;
  std::string surnames;
  std::string first_names;
  std::string middle_names;
};

int run_experiment(const ExperimentArgs& a, bool n_plans_set) {
  const auto region = load_region_graph(a.common.region);
  experiments::NoiseSetup noise;
  noise.base_scenario = a.common.scenario;
  noise.scales = a.scales;
  noise.calibrate_error = a.calibrate_error;
  noise.majority_race_protected = a.majority_protected;
  noise.mixed_hhi_ceiling = a.mixed_hhi_ceiling;
  noise.preserve_precinct_totals = a.preserve_totals;

  MetricReport report;
  if (a.name == "parity") {
    experiments::ParityConfig c;
    c.noise = noise;
    if (a.districts) c.n_districts = *a.districts;
    if (n_plans_set) c.n_plans = a.common.n_plans;
    if (!a.common.tolerances.empty()) c.tolerances = a.common.tolerances;
    c.max_county_splits = a.max_county_splits;
    c.per_plan_rows = !a.no_per_plan;
    c.seed = a.common.seed;
    c.threads = a.common.threads;
    report = experiments::run_parity_experiment(region, c);
  } else if (a.name == "partisan") {
    experiments::PartisanConfig c;
    c.noise = noise;
    if (a.districts) c.n_districts = *a.districts;
    if (n_plans_set) c.n_plans = a.common.n_plans;
    c.tolerance = single_tolerance(a.common, c.tolerance);
    if (!a.enacted.empty()) c.enacted = read_plan_csv(a.enacted, region.graph);
    c.seed = a.common.seed;
    c.threads = a.common.threads;
    report = experiments::run_partisan_experiment(region, c);
  } else if (a.name == "mmd") {
    experiments::MmdConfig c;
    c.noise = noise;
    if (a.districts) c.n_districts = *a.districts;
    c.tolerance = single_tolerance(a.common, c.tolerance);
    c.n_steps = a.steps;
    c.thin = a.thin;
    if (!a.vra_weights.empty()) c.vra_weights = a.vra_weights;
    c.vra_target_mmds = a.vra_target;
    c.compactness_weight = a.compactness;
    if (!a.mmd.empty()) c.mmd = parse_mmd(a.mmd);
    c.seed = a.common.seed;
    report = experiments::run_mmd_experiment(region, c);
  } else if (a.name == "bisg") {
    experiments::BisgConfig c;
    c.noise = noise;
    if (a.districts) c.n_districts = *a.districts;
    if (n_plans_set) c.n_plans = a.common.n_plans;
    c.tolerance = single_tolerance(a.common, c.tolerance);
    if (!a.mmd.empty()) c.mmd = parse_mmd(a.mmd);
    c.seed = a.common.seed;
    c.threads = a.common.threads;
    if (a.voters.empty()) throw ValidationError("experiment bisg requires --voters");
    const auto voters = bisg::read_voters_csv(a.voters);
    const auto tables = load_tables(a.surnames, a.first_names, a.middle_names);
    report = experiments::run_bisg_experiment(region, voters, tables, c);
  } else {
    throw ValidationError("unknown experiment '" + a.name + "' (parity|partisan|mmd|bisg)");
  }
  report.provenance["region_file"] = fs::path(a.common.region).filename().string();
  print_written(report.write(a.common.out.empty() ? "." : a.common.out, parse_report_format(a.common.format)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redistricting ensembles under noisy population data"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a region file, or generate a synthetic one");
  add_common(ingest_cmd, ingest.common, false);
  ingest_cmd->add_option("--synthetic", ingest.synthetic, "Generate a layout: uniform|segregated|checkerboard");
  ingest_cmd->add_option("--rows", ingest.rows, "Synthetic grid rows")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--cols", ingest.cols, "Synthetic grid columns")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--county-size", ingest.county_size, "Synthetic county block width")
      ->check(CLI::PositiveNumber);

  PerturbArgs perturb;
  auto* perturb_cmd = app.add_subcommand("perturb", "Append a noise-perturbed scenario to a region file");
  add_common(perturb_cmd, perturb.common);
  perturb_cmd->add_option("--scale", perturb.scale, "Noise scale (larger is noisier)")->check(CLI::NonNegativeNumber);
  perturb_cmd->add_option("--calibrate-error", perturb.calibrate_error,
                          "Choose the scale giving this mean relative precinct error");
  perturb_cmd->add_option("--levels", perturb.levels, "Noise levels: county,precinct")->delimiter(',');
  perturb_cmd->add_flag("--majority-protected", perturb.majority_protected, "Halve noise on the plurality race");
  perturb_cmd->add_flag("--preserve-precinct-totals", perturb.preserve_totals, "Noise only reshuffles race composition");
  perturb_cmd->add_option("--id", perturb.new_id, "Id of the new scenario");
  perturb_cmd->add_option("--error-covariate", perturb.covariate,
                          "Also emit a binned error summary: dem_share|turnout|minority_share|hhi");
  perturb_cmd->add_option("--bins", perturb.bins, "Bins for the error summary")->check(CLI::Range(2, 1000));
  perturb_cmd->add_option("--summary-out", perturb.summary_out, "Error summary CSV (default stdout)");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample a plan ensemble");
  add_common(sample_cmd, sample.common);
  sample_cmd->add_option("--sampler", sample.sampler, "smc|mergesplit")->check(CLI::IsMember({"smc", "mergesplit"}));
  sample_cmd->add_option("--districts", sample.districts, "Number of districts");
  sample_cmd->add_option("--max-county-splits", sample.max_county_splits, "Cap on split counties");
  sample_cmd->add_option("--compactness", sample.compactness, "Energy per cut edge");
  sample_cmd->add_option("--vra-weight", sample.vra_weight, "Energy per missing MMD");
  sample_cmd->add_option("--vra-target", sample.vra_target, "Target MMD count");
  sample_cmd->add_option("--mmd", sample.mmd, "MMD definition: black|black_hispanic");
  sample_cmd->add_option("--retry-budget", sample.retry_budget, "Tree redraws per step")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--initial", sample.initial, "Initial plan CSV for mergesplit");
  sample_cmd->add_option("--steps", sample.steps, "Chain steps for mergesplit");
  sample_cmd->add_option("--thin", sample.thin, "Record every n-th state")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--burn-in", sample.burn_in, "Discarded steps (default 10%)");

  MetricsArgs metrics_args;
  auto* metrics_cmd = app.add_subcommand("metrics", "Plan and ensemble metrics under a scenario");
  add_common(metrics_cmd, metrics_args.common);
  metrics_cmd->add_option("--ensemble", metrics_args.ensemble, "Ensemble CSV");
  metrics_cmd->add_option("--plan", metrics_args.plan, "Single plan CSV");
  metrics_cmd->add_option("--mmd", metrics_args.mmd, "MMD definition: black|black_hispanic");

  BisgArgs bisg_args;
  auto* bisg_cmd = app.add_subcommand("bisg", "Race posteriors for a voter file");
  add_common(bisg_cmd, bisg_args.common);
  bisg_cmd->add_option("--voters", bisg_args.voters, "Voter CSV");
  bisg_cmd->add_option("--surnames", bisg_args.surnames, "Surname table CSV");
  bisg_cmd->add_option("--first-names", bisg_args.first_names, "First-name table CSV");
  bisg_cmd->add_option("--middle-names", bisg_args.middle_names, "Middle-name table CSV");
  bisg_cmd->add_option("--make-fixture", bisg_args.make_fixture,
                       "Write synthetic name tables and voters to this directory instead");
  bisg_cmd->add_option("--names-per-race", bisg_args.names_per_race)->check(CLI::PositiveNumber);
  bisg_cmd->add_option("--voters-per-precinct", bisg_args.voters_per_precinct)->check(CLI::PositiveNumber);

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a scripted experiment: parity|partisan|mmd|bisg");
  add_common(exp_cmd, exp.common);
  exp_cmd->add_option("name", exp.name, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"parity", "partisan", "mmd", "bisg"}));
  exp_cmd->add_option("--districts", exp.districts, "Number of districts");
  exp_cmd->add_option("--scales", exp.scales, "Noise scales, one perturbed scenario each")->delimiter(',');
  exp_cmd->add_option("--calibrate-error", exp.calibrate_error, "Add a scenario calibrated to this mean error");
  exp_cmd->add_flag("--majority-protected", exp.majority_protected, "Halve noise on the plurality race");
  exp_cmd->add_flag("--preserve-precinct-totals", exp.preserve_totals, "Noise only reshuffles race composition");
  exp_cmd->add_option("--mixed-hhi-ceiling", exp.mixed_hhi_ceiling, "Only perturb precincts with HHI below this");
  exp_cmd->add_option("--max-county-splits", exp.max_county_splits, "Cap on split counties (parity)");
  exp_cmd->add_flag("--no-per-plan", exp.no_per_plan, "Omit per-plan deviation rows (parity)");
  exp_cmd->add_option("--enacted", exp.enacted, "Enacted plan CSV (partisan)");
  exp_cmd->add_option("--steps", exp.steps, "Chain steps (mmd)");
  exp_cmd->add_option("--thin", exp.thin, "Chain thinning (mmd)")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--vra-weights", exp.vra_weights, "VRA weights (mmd)")->delimiter(',');
  exp_cmd->add_option("--vra-target", exp.vra_target, "Target MMD count (mmd)");
  exp_cmd->add_option("--compactness", exp.compactness, "Energy per cut edge (mmd)");
  exp_cmd->add_option("--mmd", exp.mmd, "MMD definition: black|black_hispanic");
  exp_cmd->add_option("--voters", exp.voters, "Voter CSV (bisg)");
  exp_cmd->add_option("--surnames", exp.surnames, "Surname table CSV (bisg)");
  exp_cmd->add_option("--first-names", exp.first_names, "First-name table CSV (bisg)");
  exp_cmd->add_option("--middle-names", exp.middle_names, "Middle-name table CSV (bisg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest);
    if (*perturb_cmd) return run_perturb(perturb);
    if (*sample_cmd) return run_sample(sample);
    if (*metrics_cmd) return run_metrics(metrics_args);
    if (*bisg_cmd) return run_bisg(bisg_args);
    if (*exp_cmd) return run_experiment(exp, exp_cmd->count("--n-plans") > 0);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
