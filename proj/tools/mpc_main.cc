// mpc: audit rankers for matched pair calibration.
//
//   mpc audit    --ratings r.csv --movies m.csv --group Documentary --out a.json
//   mpc sweep    --ratings r.csv --movies m.csv --out sweep.json --csv sweep.csv
//   mpc simulate --queries 100000 --out sim.json --plots-dir plots
//   mpc plots    --report sweep.json --out-dir plots

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "mpc/commands.h"
#include "mpc/error.h"

namespace {

void AddAuditFlags(CLI::App* cmd, mpc::AuditOptions& o,
                   std::string& resample_unit) {
  cmd->add_option("--ratings", o.ratings, "ratings.csv (userId,movieId,rating,timestamp)");
  cmd->add_option("--movies", o.movies, "movies.csv (movieId,title,genres)");
  cmd->add_option("--slates", o.slates, "pre-scored slate file (JSON lines)");
  cmd->add_option("--group", o.groups, "group to audit; repeatable (default: all)");
  cmd->add_option("--trials", o.trials, "bootstrap trials")->capture_default_str();
  cmd->add_option("--confidence", o.confidence, "interval level")->capture_default_str();
  auto* pct = cmd->add_option("--epsilon-percentile", o.epsilon_percentile,
                              "epsilon as a percentile of cross-group gaps")
                  ->capture_default_str();
  auto* eps = cmd->add_option("--epsilon", o.epsilon, "fixed score-gap threshold");
  auto* k = cmd->add_option("--k-smallest", o.k_smallest,
                            "keep the k pairs with smallest gap");
  eps->excludes(k);
  pct->excludes(eps)->excludes(k);
  cmd->add_flag("--adjacent", o.adjacent, "only pairs at adjacent positions");
  cmd->add_flag("--both-orientations", o.both_orientations,
                "with --adjacent, also admit pairs with the group item ahead");
  cmd->add_option("--resample-unit", resample_unit, "query or pair")
      ->check(CLI::IsMember({"query", "pair"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed for every random choice")->capture_default_str();
  cmd->add_option("--rank", o.rank, "SVD rank")->capture_default_str();
  cmd->add_option("--train-fraction", o.train_fraction,
                  "earliest share of ratings used for training")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "JSON report path")->required();
  cmd->add_option("--csv", o.csv, "optional CSV report path");
  cmd->add_option("--slates-out", o.slates_out, "write the scored slates here");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matched pair calibration audits for rankers"};
  app.require_subcommand(1);

  mpc::AuditOptions audit;
  std::string audit_unit = "query";
  CLI::App* audit_cmd = app.add_subcommand("audit", "audit one scoring rule");
  AddAuditFlags(audit_cmd, audit, audit_unit);

  mpc::SweepOptions sweep;
  std::string sweep_unit = "query";
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "compare baseline, boosted, demoted and calibrated rules");
  AddAuditFlags(sweep_cmd, sweep.audit, sweep_unit);
  sweep_cmd->add_option("--alpha", sweep.alpha,
                        "boost size (default: eval score std / 3)");

  mpc::SimulateOptions sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "audit a synthetic confounded world");
  sim_cmd->add_option("--p-u", sim.p_u, "share of type-u queries")->capture_default_str();
  sim_cmd->add_option("--b-u1", sim.b_u1)->capture_default_str();
  sim_cmd->add_option("--b-u2", sim.b_u2)->capture_default_str();
  sim_cmd->add_option("--b-v1", sim.b_v1)->capture_default_str();
  sim_cmd->add_option("--b-v2", sim.b_v2)->capture_default_str();
  auto* pu = sim_cmd->add_option("--p1-given-u", sim.p1_given_u,
                                 "type-1 share in u queries (default: solved)");
  auto* pv = sim_cmd->add_option("--p1-given-v", sim.p1_given_v,
                                 "type-1 share in v queries (default: solved)");
  pu->needs(pv);
  pv->needs(pu);
  sim_cmd->add_option("--queries", sim.queries)->capture_default_str();
  sim_cmd->add_option("--slate-size", sim.slate_size)->capture_default_str();
  sim_cmd->add_option("--bins", sim.bins, "calibration bins")->capture_default_str();
  sim_cmd->add_option("--boost", sim.boost,
                      "type-1 boost (default: the baseline MPC estimate)");
  sim_cmd->add_option("--trials", sim.trials)->capture_default_str();
  sim_cmd->add_option("--confidence", sim.confidence)->capture_default_str();
  sim_cmd->add_option("--epsilon-percentile", sim.epsilon_percentile)
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "JSON report path")->required();
  sim_cmd->add_option("--csv", sim.csv);
  sim_cmd->add_option("--plots-dir", sim.plots_dir, "write SVG plots here");
  sim_cmd->add_option("--slates-out", sim.slates_out);

  mpc::PlotsOptions plots;
  CLI::App* plots_cmd = app.add_subcommand("plots", "draw SVG plots of a report");
  plots_cmd->add_option("--report", plots.report)->required();
  plots_cmd->add_option("--out-dir", plots.out_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (audit_cmd->parsed()) {
      audit.resample_unit = mpc::ParseResampleUnit(audit_unit);
      mpc::RunAudit(audit);
    } else if (sweep_cmd->parsed()) {
      sweep.audit.resample_unit = mpc::ParseResampleUnit(sweep_unit);
      mpc::RunSweep(sweep);
    } else if (sim_cmd->parsed()) {
      mpc::RunSimulate(sim);
    } else if (plots_cmd->parsed()) {
      for (const std::string& path : mpc::RunPlots(plots)) {
        std::printf("%s\n", path.c_str());
      }
    }
  } catch (const mpc::Error& e) {
    std::fprintf(stderr, "mpc: %s\n", e.what());
    return mpc::ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mpc: internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
