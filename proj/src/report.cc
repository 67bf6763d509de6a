#include "mpc/report.h"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mpc/error.h"

namespace mpc {

namespace {

using Json = nlohmann::ordered_json;

Json Optional(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

std::optional<double> OptionalDouble(const Json& json, const char* key) {
  const Json& v = json.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string FormatOptional(const std::optional<double>& value) {
  return value ? FormatDouble(*value) : std::string();
}

std::string CsvField(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::ordered_json ToJson(const AuditReport& report) {
  Json rows = Json::array();
  for (const ReportRow& row : report.rows) {
    const MpcCell& m = row.mpc;
    rows.push_back(Json{
        {"group", row.group},
        {"rule", row.rule},
        {"alpha", row.alpha},
        {"mpc",
         Json{{"point", m.point},
              {"lower", Optional(m.lower)},
              {"upper", Optional(m.upper)},
              {"n_pairs", m.n_pairs},
              {"epsilon", m.epsilon},
              {"variant", m.variant},
              {"method", m.method},
              {"dyadic_variance", Optional(m.dyadic_variance)},
              {"dyadic_clamped", m.dyadic_clamped},
              {"reject_zero", m.reject_zero},
              {"p_value", Optional(m.p_value)}}},
        {"ndcg", Json{{"point", row.ndcg.point},
                      {"lower", Optional(row.ndcg.lower)},
                      {"upper", Optional(row.ndcg.upper)}}}});
  }
  Json figures = Json::array();
  for (const Figure& fig : report.figures) {
    Json series = Json::array();
    for (const Series& s : fig.series) {
      series.push_back(Json{{"label", s.label}, {"x", s.x}, {"y", s.y}});
    }
    figures.push_back(Json{{"name", fig.name},
                           {"title", fig.title},
                           {"x_label", fig.x_label},
                           {"y_label", fig.y_label},
                           {"identity_line", fig.identity_line},
                           {"series", std::move(series)}});
  }
  return Json{{"schema_version", report.schema_version},
              {"command", report.command},
              {"config", report.config},
              {"rows", std::move(rows)},
              {"figures", std::move(figures)},
              {"diagnostics", report.diagnostics}};
}

AuditReport ReportFromJson(const nlohmann::ordered_json& json) {
  try {
    AuditReport report;
    report.schema_version = json.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
      throw Error(ErrorCode::kParse,
                  "unsupported report schema version " +
                      std::to_string(report.schema_version));
    }
    report.command = json.at("command").get<std::string>();
    report.config = json.at("config");
    for (const Json& r : json.at("rows")) {
      ReportRow row;
      row.group = r.at("group").get<std::string>();
      row.rule = r.at("rule").get<std::string>();
      row.alpha = r.at("alpha").get<double>();
      const Json& m = r.at("mpc");
      row.mpc.point = m.at("point").get<double>();
      row.mpc.lower = OptionalDouble(m, "lower");
      row.mpc.upper = OptionalDouble(m, "upper");
      row.mpc.n_pairs = m.at("n_pairs").get<std::size_t>();
      row.mpc.epsilon = m.at("epsilon").get<double>();
      row.mpc.variant = m.at("variant").get<std::string>();
      row.mpc.method = m.at("method").get<std::string>();
      row.mpc.dyadic_variance = OptionalDouble(m, "dyadic_variance");
      row.mpc.dyadic_clamped = m.at("dyadic_clamped").get<bool>();
      row.mpc.reject_zero = m.at("reject_zero").get<bool>();
      row.mpc.p_value = OptionalDouble(m, "p_value");
      const Json& n = r.at("ndcg");
      row.ndcg.point = n.at("point").get<double>();
      row.ndcg.lower = OptionalDouble(n, "lower");
      row.ndcg.upper = OptionalDouble(n, "upper");
      report.rows.push_back(std::move(row));
    }
    if (json.contains("figures")) {
      for (const Json& f : json.at("figures")) {
        Figure fig;
        fig.name = f.at("name").get<std::string>();
        fig.title = f.at("title").get<std::string>();
        fig.x_label = f.at("x_label").get<std::string>();
        fig.y_label = f.at("y_label").get<std::string>();
        fig.identity_line = f.at("identity_line").get<bool>();
        for (const Json& s : f.at("series")) {
          Series series;
          series.label = s.at("label").get<std::string>();
          series.x = s.at("x").get<std::vector<double>>();
          series.y = s.at("y").get<std::vector<double>>();
          if (series.x.size() != series.y.size()) {
            throw Error(ErrorCode::kParse, "series x and y lengths differ");
          }
          fig.series.push_back(std::move(series));
        }
        report.figures.push_back(std::move(fig));
      }
    }
    if (json.contains("diagnostics")) report.diagnostics = json.at("diagnostics");
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
}

void WriteReportJson(std::ostream& out, const AuditReport& report) {
  out << ToJson(report).dump(2) << '\n';
}

void WriteReportCsv(std::ostream& out, const AuditReport& report) {
  out << "group,rule,alpha,mpc,mpc_lower,mpc_upper,n_pairs,epsilon,variant,"
         "method,dyadic_variance,reject_zero,ndcg,ndcg_lower,ndcg_upper\n";
  for (const ReportRow& row : report.rows) {
    const MpcCell& m = row.mpc;
    out << CsvField(row.group) << ',' << row.rule << ','
        << FormatDouble(row.alpha) << ',' << FormatDouble(m.point) << ','
        << FormatOptional(m.lower) << ',' << FormatOptional(m.upper) << ','
        << m.n_pairs << ',' << FormatDouble(m.epsilon) << ',' << m.variant
        << ',' << m.method << ',' << FormatOptional(m.dyadic_variance) << ','
        << (m.reject_zero ? "true" : "false") << ','
        << FormatDouble(row.ndcg.point) << ','
        << FormatOptional(row.ndcg.lower) << ','
        << FormatOptional(row.ndcg.upper) << '\n';
  }
}

AuditReport ReadReport(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open report " + path.string());
  Json json;
  try {
    json = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse,
                path.string() + ": malformed JSON: " + e.what());
  }
  return ReportFromJson(json);
}

void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

}  // namespace mpc
