#ifndef MPC_PLOT_H_
#define MPC_PLOT_H_

// Self-contained SVG charts drawn from an audit report.

#include <filesystem>
#include <string>
#include <vector>

#include "mpc/report.h"

namespace mpc {

enum class PlotMetric { kMpc, kNdcg };

// One cluster per group, one interval per scoring rule within it.
std::string IntervalPlotSvg(const AuditReport& report, PlotMetric metric);

// |MPC| against NDCG, one point per row.
std::string MpcNdcgScatterSvg(const AuditReport& report);

std::string FigureSvg(const Figure& figure);

// Writes mpc_by_rule.svg, ndcg_by_rule.svg and mpc_vs_ndcg.svg when the
// report has rows, plus <name>.svg per figure. Returns the written paths.
// Throws kInvalidInput for a report with neither rows nor figures, kIo on
// write failure.
std::vector<std::filesystem::path> WritePlots(
    const AuditReport& report, const std::filesystem::path& out_dir);

}  // namespace mpc

#endif  // MPC_PLOT_H_
