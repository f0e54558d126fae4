#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace redistrict {

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(std::string_view text);

/// A labelled numeric matrix, written as a CSV with a leading label column.
struct ReportTable {
  std::string name;
  std::string corner;  // header of the label column
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> cells;
};

/// Tabular experiment output: long-format rows (plan_index, metric, value),
/// a JSON summary with a provenance block, and optional matrices.
struct MetricReport {
  struct Row {
    std::optional<std::size_t> plan_index;
    std::string metric;
    double value = 0.0;
  };

  std::string experiment;
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::vector<Row> rows;
  std::vector<ReportTable> tables;

  void add(std::string metric, double value, std::optional<std::size_t> plan_index = std::nullopt) {
    rows.push_back(Row{plan_index, std::move(metric), value});
  }

  /// Csv: `report.csv`, `summary.json` and one `<table>.csv` per table.
  /// Json: a single `report.json` holding everything.
  /// Returns the files written, in order.
  std::vector<std::filesystem::path> write(const std::filesystem::path& directory, ReportFormat format) const;
};

/// Hex SHA-256 of a file's bytes or of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace redistrict
