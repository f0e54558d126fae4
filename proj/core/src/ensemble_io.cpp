#include "redistrict/ensemble_io.hpp"

#include <fstream>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"

namespace redistrict {

nlohmann::ordered_json provenance_to_json(const Provenance& provenance) {
  nlohmann::ordered_json j;
  j["scenario_id"] = provenance.scenario_id;
  j["tolerance"] = provenance.tolerance;
  j["sampler"] = provenance.sampler;
  j["constraints"] = provenance.constraints;
  j["seed"] = provenance.seed;
  j["diagnostics"] = provenance.diagnostics;
  return j;
}

Provenance provenance_from_json(const nlohmann::json& doc) {
  Provenance p;
  p.scenario_id = doc.value("scenario_id", "");
  p.tolerance = doc.value("tolerance", 0.0);
  p.sampler = doc.value("sampler", "");
  p.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("constraints")) p.constraints = doc.at("constraints");
  if (doc.contains("diagnostics")) p.diagnostics = doc.at("diagnostics");
  return p;
}

void write_ensemble_csv(const std::filesystem::path& path, const RegionGraph& graph, const PlanEnsemble& ensemble) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "plan_index,weight,precinct_id,district\n";
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto w = csv::format_double(ensemble.weights[i]);
    const auto& plan = ensemble.plans[i];
    for (std::size_t v = 0; v < plan.district.size(); ++v) {
      out << i << ',' << w << ',' << graph.node(static_cast<int>(v)).id << ',' << plan.district[v] << '\n';
    }
  }
}

PlanEnsemble read_ensemble_csv(const std::filesystem::path& path, const RegionGraph& graph) {
  const auto table = csv::read_file(path);
  const auto c_plan = static_cast<std::size_t>(table.require_column("plan_index"));
  const auto c_w = static_cast<std::size_t>(table.require_column("weight"));
  const auto c_id = static_cast<std::size_t>(table.require_column("precinct_id"));
  const auto c_d = static_cast<std::size_t>(table.require_column("district"));

  PlanEnsemble ensemble;
  for (const auto& row : table.rows) {
    const auto index = csv::parse_int(row[c_plan], "plan_index");
    if (index < 0 || static_cast<std::size_t>(index) > ensemble.plans.size()) {
      throw ValidationError("ensemble plan indices must be contiguous from 0");
    }
    if (static_cast<std::size_t>(index) == ensemble.plans.size()) {
      ensemble.plans.push_back(Plan{0, std::vector<int>(graph.num_nodes(), 0)});
      ensemble.weights.push_back(csv::parse_double(row[c_w], "weight"));
    }
    auto& plan = ensemble.plans[static_cast<std::size_t>(index)];
    const int v = graph.require_index(row[c_id]);
    const auto d = static_cast<int>(csv::parse_int(row[c_d], "district"));
    plan.district[static_cast<std::size_t>(v)] = d;
    plan.n_districts = std::max(plan.n_districts, d);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    validate_plan_labels(graph, ensemble.plans[i]);
    if (ensemble.plans[i].n_districts != ensemble.plans[0].n_districts) {
      throw ValidationError("ensemble plans disagree on the number of districts");
    }
    if (!(ensemble.weights[i] >= 0.0)) throw ValidationError("ensemble weights must be nonnegative");
    sum += ensemble.weights[i];
  }
  if (ensemble.size() > 0 && !(sum > 0.0)) throw ValidationError("ensemble weights sum to zero");
  for (auto& w : ensemble.weights) w /= sum;

  auto sidecar = path;
  sidecar += ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    ensemble.provenance = provenance_from_json(nlohmann::json::parse(in));
  }
  return ensemble;
}

void write_ensemble(const std::filesystem::path& csv_path, const RegionGraph& graph, const PlanEnsemble& ensemble) {
  write_ensemble_csv(csv_path, graph, ensemble);
  auto sidecar = csv_path;
  sidecar += ".json";
  std::ofstream out(sidecar);
  if (!out) throw ValidationError("cannot write " + sidecar.string());
  out << provenance_to_json(ensemble.provenance).dump(2) << '\n';
}

}  // namespace redistrict
