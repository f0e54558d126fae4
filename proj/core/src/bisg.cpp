#include "redistrict/bisg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"

namespace redistrict::bisg {

namespace {

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '\t') continue;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

constexpr std::array<const char*, kNumRaces> kProbColumns = {"p_white", "p_black", "p_hispanic", "p_asian", "p_other"};

}  // namespace

void NameTable::set(std::string_view name, const RaceVector& likelihood) {
  for (double p : likelihood) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("name table entry '" + std::string(name) + "' has a negative or non-finite likelihood");
    }
  }
  entries_[normalize_name(name)] = likelihood;
}

const RaceVector* NameTable::find(std::string_view name) const {
  const auto it = entries_.find(normalize_name(name));
  return it == entries_.end() ? nullptr : &it->second;
}

NameTable NameTable::read_csv(std::istream& in) {
  const auto table = csv::read(in, "name table");
  const auto c_name = static_cast<std::size_t>(table.require_column("name"));
  std::array<std::size_t, kNumRaces> cols{};
  for (std::size_t r = 0; r < kNumRaces; ++r) cols[r] = static_cast<std::size_t>(table.require_column(kProbColumns[r]));
  NameTable out;
  for (const auto& row : table.rows) {
    RaceVector p{};
    for (std::size_t r = 0; r < kNumRaces; ++r) p[r] = csv::parse_double(row[cols[r]], kProbColumns[r]);
    out.set(row[c_name], p);
  }
  return out;
}

NameTable NameTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open name table " + path.string());
  return read_csv(in);
}

std::vector<std::pair<std::string, RaceVector>> NameTable::sorted() const {
  std::vector<std::pair<std::string, RaceVector>> out(entries_.begin(), entries_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void NameTable::write_csv(std::ostream& out) const {
  out << "name,p_white,p_black,p_hispanic,p_asian,p_other\n";
  for (const auto& [name, p] : sorted()) {
    out << name;
    for (double x : p) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

const RaceVector& GeoPrior::at(std::string_view geography) const {
  const auto it = prior.find(std::string(geography));
  if (it == prior.end()) throw ValidationError("geography '" + std::string(geography) + "' has no prior");
  return it->second;
}

GeoPrior build_geo_prior(const RegionGraph& graph, const PopulationScenario& scenario) {
  scenario.validate(graph);
  GeoPrior out;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    const auto& id = graph.node(static_cast<int>(v)).id;
    const auto& counts = scenario.race[v];
    const auto pop = total(counts);
    RaceVector shares{};
    if (pop <= 0) {
      shares.fill(1.0 / static_cast<double>(kNumRaces));
      out.uniform_fallback.push_back(id);
    } else {
      for (std::size_t r = 0; r < kNumRaces; ++r) shares[r] = static_cast<double>(counts[r]) / static_cast<double>(pop);
    }
    out.prior.emplace(id, shares);
  }
  return out;
}

std::vector<VoterRecord> read_voters_csv(std::istream& in) {
  const auto table = csv::read(in, "voter file");
  const auto c_id = static_cast<std::size_t>(table.require_column("voter_id"));
  const auto c_sur = static_cast<std::size_t>(table.require_column("surname"));
  const auto c_first = static_cast<std::size_t>(table.require_column("first"));
  const auto c_mid = static_cast<std::size_t>(table.require_column("middle"));
  const auto c_geo = static_cast<std::size_t>(table.require_column("geography_id"));
  const int c_race = table.column("true_race");

  std::vector<VoterRecord> voters;
  voters.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    VoterRecord rec;
    rec.voter_id = row[c_id];
    rec.surname = row[c_sur];
    if (!row[c_first].empty()) rec.first = row[c_first];
    if (!row[c_mid].empty()) rec.middle = row[c_mid];
    rec.geography = row[c_geo];
    if (c_race >= 0 && !row[static_cast<std::size_t>(c_race)].empty()) {
      rec.true_race = parse_race(row[static_cast<std::size_t>(c_race)]);
      if (!rec.true_race) {
        throw ValidationError("voter file line " + std::to_string(table.lines[i]) + ": unknown race '" +
                              row[static_cast<std::size_t>(c_race)] + "'");
      }
    }
    voters.push_back(std::move(rec));
  }
  return voters;
}

std::vector<VoterRecord> read_voters_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open voter file " + path.string());
  return read_voters_csv(in);
}

void write_voters_csv(std::ostream& out, std::span<const VoterRecord> voters) {
  out << "voter_id,surname,first,middle,geography_id,true_race\n";
  for (const auto& v : voters) {
    out << v.voter_id << ',' << v.surname << ',' << v.first.value_or("") << ',' << v.middle.value_or("") << ','
        << v.geography << ',' << (v.true_race ? race_key(*v.true_race) : std::string_view()) << '\n';
  }
}

RaceVector posterior_race(const VoterRecord& record, const NameTables& tables, const GeoPrior& prior) {
  if (record.surname.empty()) throw ValidationError("voter '" + record.voter_id + "' has an empty surname");
  RaceVector post = prior.at(record.geography);

  auto apply = [&post](const NameTable& table, const std::optional<std::string>& name) {
    if (!name || name->empty()) return;
    if (const auto* lik = table.find(*name)) {
      for (std::size_t r = 0; r < kNumRaces; ++r) post[r] *= (*lik)[r];
    }
  };
  apply(tables.surname, record.surname);
  apply(tables.first, record.first);
  apply(tables.middle, record.middle);

  const double z = std::accumulate(post.begin(), post.end(), 0.0);
  if (!(z > 0.0)) {
    throw ValidationError("voter '" + record.voter_id + "': geographic prior for '" + record.geography +
                          "' and likelihoods for surname '" + record.surname + "' have no race in common");
  }
  for (auto& p : post) p /= z;
  return post;
}

Race classify(const RaceVector& posterior) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < kNumRaces; ++r) {
    if (posterior[r] > posterior[best]) best = r;
  }
  return kAllRaces[best];
}

double auroc(std::span<const double> scores, std::span<const char> labels) {
  if (scores.size() != labels.size()) throw ValidationError("AUROC: scores and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw ValidationError("AUROC: NaN score");
    if (labels[i]) ++positives;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("AUROC is undefined: labels contain " + std::to_string(positives) + " positives and " +
                          std::to_string(negatives) + " negatives");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U, accumulated in integers: each tie group of size
  // g starting at rank s (1-based) has midrank s + (g-1)/2.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++group_pos;
      ++j;
    }
    const std::uint64_t twice_midrank = static_cast<std::uint64_t>(i + 1) + static_cast<std::uint64_t>(j);
    twice_rank_sum += group_pos * twice_midrank;
    i = j;
  }
  const std::uint64_t np = positives;
  const auto twice_u = static_cast<double>(twice_rank_sum - np * (np + 1));
  return twice_u / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double misclassification_rate(std::span<const Race> predicted, std::span<const Race> truth) {
  if (predicted.size() != truth.size()) throw ValidationError("misclassification: length mismatch");
  if (predicted.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] != truth[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

void write_predictions_csv(std::ostream& out, std::span<const VoterRecord> voters,
                           std::span<const RaceVector> posteriors) {
  if (voters.size() != posteriors.size()) throw ValidationError("predictions: length mismatch");
  out << "voter_id,p_white,p_black,p_hispanic,p_asian,p_other,predicted_race\n";
  for (std::size_t i = 0; i < voters.size(); ++i) {
    out << voters[i].voter_id;
    for (double p : posteriors[i]) out << ',' << csv::format_double(p);
    out << ',' << race_key(classify(posteriors[i])) << '\n';
  }
}

}  // namespace redistrict::bisg
