#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "redistrict/graph.hpp"

namespace redistrict::bisg {

/// Values indexed by Race (White, Black, Hispanic, Asian, Other).
using RaceVector = std::array<double, kNumRaces>;

/// P(name | race) lookup. Keys are stored upper-cased.
class NameTable {
 public:
  void set(std::string_view name, const RaceVector& likelihood);
  const RaceVector* find(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }

  /// CSV `name,p_white,p_black,p_hispanic,p_asian,p_other`.
  static NameTable read_csv(const std::filesystem::path& path);
  static NameTable read_csv(std::istream& in);
  void write_csv(std::ostream& out) const;

  /// Entries sorted by name, for deterministic iteration.
  std::vector<std::pair<std::string, RaceVector>> sorted() const;

 private:
  std::unordered_map<std::string, RaceVector> entries_;
};

struct NameTables {
  NameTable surname;
  NameTable first;
  NameTable middle;
};

struct GeoPrior {
  std::unordered_map<std::string, RaceVector> prior;
  /// Geographies with zero population that fell back to the uniform prior.
  std::vector<std::string> uniform_fallback;

  const RaceVector& at(std::string_view geography) const;
};

/// Per-precinct race shares under `scenario`.
GeoPrior build_geo_prior(const RegionGraph& graph, const PopulationScenario& scenario);

struct VoterRecord {
  std::string voter_id;
  std::string surname;
  std::optional<std::string> first;
  std::optional<std::string> middle;
  std::string geography;
  std::optional<Race> true_race;
};

/// CSV `voter_id,surname,first,middle,geography_id[,true_race]`; empty
/// first/middle/true_race fields are treated as missing.
std::vector<VoterRecord> read_voters_csv(const std::filesystem::path& path);
std::vector<VoterRecord> read_voters_csv(std::istream& in);
void write_voters_csv(std::ostream& out, std::span<const VoterRecord> voters);

/// Posterior over races: prior(geography) times the product of P(name|race)
/// over the names present in their tables, normalized. Names missing from a
/// table contribute no factor. Throws ValidationError when the record is
/// invalid or every race has zero unnormalized mass.
RaceVector posterior_race(const VoterRecord& record, const NameTables& tables, const GeoPrior& prior);

/// Argmax; ties go to the earlier race in White, Black, Hispanic, Asian, Other.
Race classify(const RaceVector& posterior);

/// Probability that a random positive outranks a random negative, ties
/// counting one half. Throws ValidationError unless both classes occur.
double auroc(std::span<const double> scores, std::span<const char> labels);

/// Share of positions where predicted != truth.
double misclassification_rate(std::span<const Race> predicted, std::span<const Race> truth);

/// CSV `voter_id,p_white,p_black,p_hispanic,p_asian,p_other,predicted_race`.
void write_predictions_csv(std::ostream& out, std::span<const VoterRecord> voters, std::span<const RaceVector> posteriors);

}  // namespace redistrict::bisg
