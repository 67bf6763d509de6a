#include "mpc/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mpc/error.h"

namespace mpc {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 90.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

const char* Color(std::size_t i) {
  return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

double NiceStep(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

class Canvas {
 public:
  Canvas(const std::string& title, Range x, Range y) : x_(x), y_(y) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(kWidth)
         << "\" height=\"" << Num(kHeight) << "\" viewBox=\"0 0 "
         << Num(kWidth) << ' ' << Num(kHeight)
         << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         << "<text x=\"" << Num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\""
         << " font-size=\"15\">" << Escape(title) << "</text>\n";
  }

  double X(double v) const {
    return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight);
  }
  double Y(double v) const {
    return kHeight - kBottom -
           (v - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom);
  }

  void Frame(const std::string& x_label, const std::string& y_label,
             bool x_ticks) {
    const double x0 = kLeft, x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom, y1 = kTop;
    out_ << "<rect x=\"" << Num(x0) << "\" y=\"" << Num(y1) << "\" width=\""
         << Num(x1 - x0) << "\" height=\"" << Num(y0 - y1)
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double ystep = NiceStep(y_.hi - y_.lo);
    for (double t = std::ceil(y_.lo / ystep) * ystep; t <= y_.hi; t += ystep) {
      out_ << "<line x1=\"" << Num(x0) << "\" x2=\"" << Num(x1) << "\" y1=\""
           << Num(Y(t)) << "\" y2=\"" << Num(Y(t))
           << "\" stroke=\"#dddddd\"/>\n<text x=\"" << Num(x0 - 6) << "\" y=\""
           << Num(Y(t) + 4) << "\" text-anchor=\"end\">" << Tick(t)
           << "</text>\n";
    }
    if (x_ticks) {
      const double xstep = NiceStep(x_.hi - x_.lo);
      for (double t = std::ceil(x_.lo / xstep) * xstep; t <= x_.hi;
           t += xstep) {
        out_ << "<text x=\"" << Num(X(t)) << "\" y=\"" << Num(y0 + 16)
             << "\" text-anchor=\"middle\">" << Tick(t) << "</text>\n";
      }
    }
    out_ << "<text x=\"" << Num((x0 + x1) / 2) << "\" y=\""
         << Num(kHeight - 12) << "\" text-anchor=\"middle\">"
         << Escape(x_label) << "</text>\n"
         << "<text transform=\"translate(16," << Num((y0 + y1) / 2)
         << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(y_label)
         << "</text>\n";
  }

  void Line(double xa, double ya, double xb, double yb, const char* color,
            const char* extra = "") {
    out_ << "<line x1=\"" << Num(X(xa)) << "\" y1=\"" << Num(Y(ya))
         << "\" x2=\"" << Num(X(xb)) << "\" y2=\"" << Num(Y(yb))
         << "\" stroke=\"" << color << "\"" << extra << "/>\n";
  }

  void Dot(double x, double y, const char* color) {
    out_ << "<circle cx=\"" << Num(X(x)) << "\" cy=\"" << Num(Y(y))
         << "\" r=\"4\" fill=\"" << color << "\"/>\n";
  }

  void Polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const char* color) {
    out_ << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color
         << "\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      out_ << Num(X(xs[i])) << ',' << Num(Y(ys[i])) << ' ';
    }
    out_ << "\"/>\n";
  }

  void Label(double px, double py, const std::string& text,
             const char* anchor = "start", const char* extra = "") {
    out_ << "<text x=\"" << Num(px) << "\" y=\"" << Num(py)
         << "\" text-anchor=\"" << anchor << "\"" << extra << ">"
         << Escape(text) << "</text>\n";
  }

  void Legend(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double y = kTop + 14 + 18 * static_cast<double>(i);
      out_ << "<rect x=\"" << Num(kWidth - kRight + 12) << "\" y=\""
           << Num(y - 9) << "\" width=\"10\" height=\"10\" fill=\"" << Color(i)
           << "\"/>\n";
      Label(kWidth - kRight + 28, y, labels[i]);
    }
  }

  std::string Finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  Range x_;
  Range y_;
  std::ostringstream out_;
};

template <typename T>
std::size_t IndexOf(std::vector<T>& values, const T& value) {
  auto it = std::find(values.begin(), values.end(), value);
  if (it != values.end()) return static_cast<std::size_t>(it - values.begin());
  values.push_back(value);
  return values.size() - 1;
}

}  // namespace

std::string IntervalPlotSvg(const AuditReport& report, PlotMetric metric) {
  std::vector<std::string> groups;
  std::vector<std::string> rules;
  Range y;
  for (const ReportRow& row : report.rows) {
    IndexOf(groups, row.group);
    IndexOf(rules, row.rule);
    const bool mpc = metric == PlotMetric::kMpc;
    y.Add(mpc ? row.mpc.point : row.ndcg.point);
    y.Add((mpc ? row.mpc.lower : row.ndcg.lower).value_or(NAN));
    y.Add((mpc ? row.mpc.upper : row.ndcg.upper).value_or(NAN));
  }
  const bool mpc = metric == PlotMetric::kMpc;
  if (mpc) y.Add(0.0);
  y.Pad();
  Range x;
  x.lo = -0.5;
  x.hi = static_cast<double>(groups.size()) - 0.5;
  Canvas canvas(mpc ? "MPC by scoring rule" : "NDCG by scoring rule", x, y);
  canvas.Frame("group", mpc ? "MPC" : "NDCG", false);
  if (mpc) canvas.Line(x.lo, 0.0, x.hi, 0.0, "black", " stroke-dasharray=\"4 3\"");
  const double spread = 0.6;
  for (const ReportRow& row : report.rows) {
    const std::size_t g = IndexOf(groups, row.group);
    const std::size_t r = IndexOf(rules, row.rule);
    const double offset =
        rules.size() > 1 ? spread * (static_cast<double>(r) /
                                         static_cast<double>(rules.size() - 1) -
                                     0.5)
                         : 0.0;
    const double cx = static_cast<double>(g) + offset;
    const double point = mpc ? row.mpc.point : row.ndcg.point;
    const auto lower = mpc ? row.mpc.lower : row.ndcg.lower;
    const auto upper = mpc ? row.mpc.upper : row.ndcg.upper;
    if (lower && upper) {
      canvas.Line(cx, *lower, cx, *upper, Color(r), " stroke-width=\"2\"");
      canvas.Line(cx - 0.04, *lower, cx + 0.04, *lower, Color(r));
      canvas.Line(cx - 0.04, *upper, cx + 0.04, *upper, Color(r));
    }
    canvas.Dot(cx, point, Color(r));
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    canvas.Label(canvas.X(static_cast<double>(g)), kHeight - kBottom + 14,
                 groups[g], "end",
                 (" transform=\"rotate(-35 " +
                  Num(canvas.X(static_cast<double>(g))) + " " +
                  Num(kHeight - kBottom + 14) + ")\"")
                     .c_str());
  }
  canvas.Legend(rules);
  return canvas.Finish();
}

std::string MpcNdcgScatterSvg(const AuditReport& report) {
  std::vector<std::string> rules;
  Range x, y;
  for (const ReportRow& row : report.rows) {
    IndexOf(rules, row.rule);
    x.Add(std::abs(row.mpc.point));
    y.Add(row.ndcg.point);
  }
  x.Pad();
  y.Pad();
  Canvas canvas("NDCG against absolute MPC", x, y);
  canvas.Frame("|MPC|", "NDCG", true);
  for (const ReportRow& row : report.rows) {
    canvas.Dot(std::abs(row.mpc.point), row.ndcg.point,
               Color(IndexOf(rules, row.rule)));
  }
  canvas.Legend(rules);
  return canvas.Finish();
}

std::string FigureSvg(const Figure& figure) {
  Range x, y;
  for (const Series& s : figure.series) {
    for (double v : s.x) x.Add(v);
    for (double v : s.y) y.Add(v);
  }
  if (figure.identity_line) {
    x.Add(0.0);
    x.Add(1.0);
    y.Add(0.0);
    y.Add(1.0);
  }
  x.Pad();
  y.Pad();
  Canvas canvas(figure.title, x, y);
  canvas.Frame(figure.x_label, figure.y_label, true);
  if (figure.identity_line) {
    canvas.Line(0.0, 0.0, 1.0, 1.0, "#999999", " stroke-dasharray=\"4 3\"");
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < figure.series.size(); ++i) {
    canvas.Polyline(figure.series[i].x, figure.series[i].y, Color(i));
    labels.push_back(figure.series[i].label);
  }
  canvas.Legend(labels);
  return canvas.Finish();
}

std::vector<std::filesystem::path> WritePlots(
    const AuditReport& report, const std::filesystem::path& out_dir) {
  if (report.rows.empty() && report.figures.empty()) {
    throw Error(ErrorCode::kInvalidInput, "report has nothing to plot");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    const std::filesystem::path path = out_dir / (name + ".svg");
    WriteFileAtomically(path, svg);
    written.push_back(path);
  };
  if (!report.rows.empty()) {
    emit("mpc_by_rule", IntervalPlotSvg(report, PlotMetric::kMpc));
    emit("ndcg_by_rule", IntervalPlotSvg(report, PlotMetric::kNdcg));
    emit("mpc_vs_ndcg", MpcNdcgScatterSvg(report));
  }
  for (const Figure& figure : report.figures) emit(figure.name, FigureSvg(figure));
  return written;
}

}  // namespace mpc
