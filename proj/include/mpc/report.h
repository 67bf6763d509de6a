#ifndef MPC_REPORT_H_
#define MPC_REPORT_H_

// Audit report: one row per (group, scoring rule) plus the configuration that
// produced it. Serialized as versioned JSON and optionally as CSV.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mpc {

inline constexpr int kReportSchemaVersion = 1;

struct MpcCell {
  double point = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
  std::size_t n_pairs = 0;
  double epsilon = 0.0;
  std::string variant;
  std::string method;
  std::optional<double> dyadic_variance;
  bool dyadic_clamped = false;
  bool reject_zero = false;
  std::optional<double> p_value;
};

struct NdcgCell {
  double point = 0.0;
  std::optional<double> lower;
  std::optional<double> upper;
};

struct ReportRow {
  std::string group;
  std::string rule;  // baseline | boosted | demoted | calibrated
  double alpha = 0.0;
  MpcCell mpc;
  NdcgCell ndcg;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// A line chart carried inside the report so plots can be redrawn from it.
struct Figure {
  std::string name;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool identity_line = false;
  std::vector<Series> series;
};

struct AuditReport {
  int schema_version = kReportSchemaVersion;
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<ReportRow> rows;
  std::vector<Figure> figures;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

nlohmann::ordered_json ToJson(const AuditReport& report);
// Throws kParse on a missing or mistyped field and on an unknown schema version.
AuditReport ReportFromJson(const nlohmann::ordered_json& json);

void WriteReportJson(std::ostream& out, const AuditReport& report);
void WriteReportCsv(std::ostream& out, const AuditReport& report);

// Throws kIo when the file cannot be opened, kParse when malformed.
AuditReport ReadReport(const std::filesystem::path& path);

// Writes through a temporary file and renames, so a failed run never leaves a
// partial report behind. Throws kIo.
void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents);

}  // namespace mpc

#endif  // MPC_REPORT_H_
