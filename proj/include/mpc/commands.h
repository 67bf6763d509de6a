#ifndef MPC_COMMANDS_H_
#define MPC_COMMANDS_H_

// Command implementations behind the mpc executable. Each Run* function
// computes a report, writes the requested files and returns the report;
// failures surface as mpc::Error before any output file is touched.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpc/error.h"
#include "mpc/inference.h"
#include "mpc/report.h"

namespace mpc {

// 2 for data and usage errors, 3 when an estimate is undefined, 4 for an
// infeasible synthetic world, 1 for internal failures.
int ExitCodeFor(ErrorCode code);

struct AuditOptions {
  // Either ratings + movies (fit a ranker, score the held-out ratings) or a
  // ready-made slate file.
  std::string ratings;
  std::string movies;
  std::string slates;
  std::vector<std::string> groups;  // empty: every group present

  std::size_t trials = 201;
  double confidence = 0.95;
  double epsilon_percentile = 1.0;
  std::optional<double> epsilon;
  std::optional<std::size_t> k_smallest;
  bool adjacent = false;
  bool both_orientations = false;
  ResampleUnit resample_unit = ResampleUnit::kQuery;
  std::uint64_t seed = 0;

  std::size_t rank = 64;
  double train_fraction = 0.8;

  std::string out;         // JSON report
  std::string csv;         // optional CSV
  std::string slates_out;  // optional scored evaluation slates
};

struct SweepOptions {
  AuditOptions audit;
  std::optional<double> alpha;  // default: eval score std / 3
};

struct SimulateOptions {
  double p_u = 0.5;
  double b_u1 = 1.5;
  double b_u2 = 1.1;
  double b_v1 = 0.9;
  double b_v2 = 0.7;
  std::optional<double> p1_given_u;  // both or neither
  std::optional<double> p1_given_v;
  std::size_t queries = 100000;
  std::size_t slate_size = 10;
  std::size_t bins = 10;
  std::optional<double> boost;  // default: the baseline MPC estimate

  std::size_t trials = 201;
  double confidence = 0.95;
  double epsilon_percentile = 1.0;
  std::uint64_t seed = 0;

  std::string out;
  std::string csv;
  std::string plots_dir;
  std::string slates_out;
};

struct PlotsOptions {
  std::string report;
  std::string out_dir;
};

AuditReport RunAudit(const AuditOptions& options);
AuditReport RunSweep(const SweepOptions& options);
AuditReport RunSimulate(const SimulateOptions& options);
std::vector<std::string> RunPlots(const PlotsOptions& options);

}  // namespace mpc

#endif  // MPC_COMMANDS_H_
