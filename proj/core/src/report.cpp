#include "redistrict/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>

#include "redistrict/csv.hpp"
#include "redistrict/error.hpp"

namespace redistrict {

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  throw ValidationError("unknown format '" + std::string(text) + "' (csv|json)");
}

namespace {

std::string number(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string("NA"); }

nlohmann::ordered_json json_number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
}

void write_table_csv(const std::filesystem::path& path, const ReportTable& t) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << t.corner;
  for (const auto& c : t.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    out << (r < t.row_labels.size() ? t.row_labels[r] : std::to_string(r));
    for (double v : t.cells[r]) out << ',' << number(v);
    out << '\n';
  }
}

}  // namespace

std::vector<std::filesystem::path> MetricReport::write(const std::filesystem::path& directory,
                                                       ReportFormat format) const {
  std::filesystem::create_directories(directory);
  std::vector<std::filesystem::path> written;

  nlohmann::ordered_json head;
  head["experiment"] = experiment;
  head["provenance"] = provenance;
  head["summary"] = summary;

  if (format == ReportFormat::Json) {
    auto doc = head;
    auto& jrows = doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      jrows.push_back({{"plan_index", r.plan_index ? nlohmann::ordered_json(*r.plan_index) : nlohmann::ordered_json()},
                       {"metric", r.metric},
                       {"value", json_number(r.value)}});
    }
    auto& jtables = doc["tables"] = nlohmann::ordered_json::object();
    for (const auto& t : tables) {
      nlohmann::ordered_json jt;
      jt["corner"] = t.corner;
      jt["columns"] = t.columns;
      jt["rows"] = t.row_labels;
      auto& cells = jt["cells"] = nlohmann::ordered_json::array();
      for (const auto& row : t.cells) {
        auto jr = nlohmann::ordered_json::array();
        for (double v : row) jr.push_back(json_number(v));
        cells.push_back(std::move(jr));
      }
      jtables[t.name] = std::move(jt);
    }
    const auto path = directory / "report.json";
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    written.push_back(path);
    return written;
  }

  {
    const auto path = directory / "report.csv";
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << "plan_index,metric,value\n";
    for (const auto& r : rows) {
      if (r.plan_index) out << *r.plan_index;
      out << ',' << r.metric << ',' << number(r.value) << '\n';
    }
    written.push_back(path);
  }
  {
    const auto path = directory / "summary.json";
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << head.dump(2) << '\n';
    written.push_back(path);
  }
  for (const auto& t : tables) {
    const auto path = directory / (t.name + ".csv");
    write_table_csv(path, t);
    written.push_back(path);
  }
  return written;
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace redistrict
