#include "mpc/commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

#include "mpc/calibration.h"
#include "mpc/core.h"
#include "mpc/ingest.h"
#include "mpc/matching.h"
#include "mpc/metrics.h"
#include "mpc/plot.h"
#include "mpc/ranker_svd.h"
#include "mpc/synthetic.h"

namespace mpc {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

bool IsUndefined(ErrorCode code) { return ExitCodeFor(code) == 3; }

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::uint64_t Fnv1a(std::string_view data,
                    std::uint64_t hash = 14695981039346656037ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

void EnsureParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + parent.string());
}

void WriteOutputs(const AuditReport& report, const std::string& out,
                  const std::string& csv) {
  if (out.empty()) throw Error(ErrorCode::kConfiguration, "--out is required");
  std::ostringstream json;
  WriteReportJson(json, report);
  EnsureParent(out);
  WriteFileAtomically(out, json.str());
  if (!csv.empty()) {
    std::ostringstream table;
    WriteReportCsv(table, report);
    EnsureParent(csv);
    WriteFileAtomically(csv, table.str());
  }
}

void WriteSlateFile(const std::string& path,
                    std::span<const RankedSlate> slates) {
  if (path.empty()) return;
  std::ostringstream out;
  WriteSlates(out, slates);
  EnsureParent(path);
  WriteFileAtomically(path, out.str());
}

MatchingConfig MatchingFrom(const AuditOptions& o) {
  if (o.epsilon && o.k_smallest) {
    throw Error(ErrorCode::kConfiguration,
                "--epsilon and --k-smallest are mutually exclusive");
  }
  MatchingConfig config;
  if (o.epsilon) {
    config.threshold = MatchingConfig::Threshold::kEpsilon;
    config.epsilon = *o.epsilon;
  } else if (o.k_smallest) {
    config.threshold = MatchingConfig::Threshold::kKSmallest;
    config.k = *o.k_smallest;
  } else {
    config.threshold = MatchingConfig::Threshold::kPercentile;
    config.percentile = o.epsilon_percentile;
  }
  config.adjacent_only = o.adjacent;
  config.both_orientations = o.both_orientations;
  config.Validate();
  return config;
}

BootstrapConfig BootstrapFrom(std::size_t trials, double confidence,
                              std::uint64_t seed, ResampleUnit unit) {
  BootstrapConfig config;
  config.trials = trials;
  config.confidence = confidence;
  config.seed = seed;
  config.unit = unit;
  config.Validate();
  return config;
}

Json MatchingEcho(const MatchingConfig& m) {
  using T = MatchingConfig::Threshold;
  Json echo;
  echo["threshold"] = m.threshold == T::kEpsilon      ? "epsilon"
                      : m.threshold == T::kPercentile ? "percentile"
                                                      : "k_smallest";
  echo["epsilon"] = m.threshold == T::kEpsilon ? Json(m.epsilon) : Json(nullptr);
  echo["epsilon_percentile"] =
      m.threshold == T::kPercentile ? Json(m.percentile) : Json(nullptr);
  echo["k_smallest"] = m.threshold == T::kKSmallest ? Json(m.k) : Json(nullptr);
  echo["adjacent"] = m.adjacent_only;
  echo["both_orientations"] = m.both_orientations;
  return echo;
}

Json BootstrapEcho(const BootstrapConfig& b) {
  return Json{{"trials", b.trials},
              {"confidence", b.confidence},
              {"resample_unit", std::string(ResampleUnitName(b.unit))}};
}

struct EvalData {
  std::vector<RankedSlate> slates;
  Json inputs = Json::object();
  Json ranker = nullptr;
  Json diagnostics = Json::object();
};

LowRankModel FitOrLoadModel(const RatingMatrix& matrix,
                            const SvdOptions& svd,
                            const std::string& ratings_bytes,
                            double train_fraction) {
  const char* cache_dir = std::getenv("MPC_CACHE_DIR");
  if (cache_dir == nullptr || *cache_dir == '\0') return FitSvd(matrix, svd);

  char params[160];
  std::snprintf(params, sizeof(params), "|%.17g|%zu|%llu|%.17g|%zu|%zu",
                train_fraction, svd.rank,
                static_cast<unsigned long long>(svd.seed), svd.tolerance,
                svd.max_iterations, svd.oversampling);
  char name[40];
  std::snprintf(name, sizeof(name), "svd-%016llx.txt",
                static_cast<unsigned long long>(
                    Fnv1a(params, Fnv1a(ratings_bytes))));
  const fs::path path = fs::path(cache_dir) / name;
  if (std::ifstream in(path); in) {
    try {
      return LowRankModel::Load(in);
    } catch (const Error&) {
      // Unreadable cache entry: refit and overwrite.
    }
  }
  LowRankModel model = FitSvd(matrix, svd);
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  if (!ec) {
    std::ostringstream out;
    model.Save(out);
    try {
      WriteFileAtomically(path, out.str());
    } catch (const Error&) {
      // The cache is an optimization only.
    }
  }
  return model;
}

EvalData LoadEvalData(const AuditOptions& o) {
  EvalData data;
  if (!o.slates.empty()) {
    if (!o.ratings.empty() || !o.movies.empty()) {
      throw Error(ErrorCode::kConfiguration,
                  "--slates cannot be combined with --ratings/--movies");
    }
    data.slates = ReadSlates(fs::path(o.slates));
    data.inputs["slates"] = o.slates;
  } else {
    if (o.ratings.empty() || o.movies.empty()) {
      throw Error(ErrorCode::kConfiguration,
                  "need --ratings and --movies, or --slates");
    }
    const std::string bytes = ReadFileBytes(o.ratings);
    std::istringstream ratings_in(bytes);
    const std::vector<RatingRecord> ratings =
        ParseRatings(ratings_in, o.ratings);
    const std::vector<MovieRecord> movies = ParseMovies(fs::path(o.movies));
    const TemporalSplitResult split = TemporalSplit(ratings, o.train_fraction);
    const RatingMatrix matrix = BuildMatrix(split.train);

    SvdOptions svd;
    svd.seed = o.seed;
    svd.rank = std::min({o.rank, matrix.user_ids().size(),
                         matrix.item_ids().size()});
    if (o.rank == 0) throw Error(ErrorCode::kConfiguration, "--rank must be >= 1");
    const LowRankModel model =
        FitOrLoadModel(matrix, svd, bytes, o.train_fraction);
    data.slates = BuildEvalSlates(
        split.eval,
        [&](const std::string& user, const std::string& movie) {
          return model.Score(user, movie);
        },
        IndexMovies(movies));

    data.inputs["ratings"] = o.ratings;
    data.inputs["movies"] = o.movies;
    data.ranker = Json{{"model", "truncated_svd"},
                       {"rank", o.rank},
                       {"rank_effective", svd.rank},
                       {"train_fraction", o.train_fraction},
                       {"oversampling", svd.oversampling},
                       {"tolerance", svd.tolerance},
                       {"max_iterations", svd.max_iterations}};
    data.diagnostics["ratings"] = ratings.size();
    data.diagnostics["train_ratings"] = split.train.size();
    data.diagnostics["eval_ratings"] = split.eval.size();
    data.diagnostics["dropped_eval_ratings"] = split.dropped_eval;
    data.diagnostics["train_users"] = matrix.user_ids().size();
    data.diagnostics["train_items"] = matrix.item_ids().size();
  }
  if (data.slates.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no evaluation slates");
  }
  std::size_t items = 0;
  for (const RankedSlate& slate : data.slates) items += slate.size();
  data.diagnostics["queries"] = data.slates.size();
  data.diagnostics["items"] = items;
  return data;
}

std::vector<RankedSlate> Shift(std::span<const RankedSlate> slates,
                               const std::string& group, double alpha) {
  std::vector<RankedSlate> out;
  out.reserve(slates.size());
  const ScoreModifier modifier{group, alpha};
  for (const RankedSlate& slate : slates) {
    out.push_back(ModifyAndRerank(slate, modifier));
  }
  return out;
}

NdcgCell NdcgFor(std::span<const RankedSlate> slates,
                 const BootstrapConfig& bootstrap) {
  const std::vector<double> per_query = PerSlateNdcg(slates);
  NdcgCell cell;
  double sum = 0.0;
  for (double v : per_query) sum += v;
  cell.point = sum / static_cast<double>(per_query.size());
  BootstrapConfig by_query = bootstrap;
  by_query.unit = ResampleUnit::kQuery;
  const Interval interval = BootstrapMeanInterval(per_query, by_query);
  cell.lower = interval.lower;
  cell.upper = interval.upper;
  return cell;
}

ReportRow EvaluateRule(std::span<const RankedSlate> slates,
                       const std::string& group, const std::string& rule,
                       double alpha, const MatchingConfig& matching,
                       const BootstrapConfig& bootstrap) {
  const MpcEstimate estimate = BootstrapMpc(slates, group, matching, bootstrap);
  ReportRow row;
  row.group = group;
  row.rule = rule;
  row.alpha = alpha;
  MpcCell& cell = row.mpc;
  cell.point = estimate.point;
  if (estimate.interval) {
    cell.lower = estimate.interval->lower;
    cell.upper = estimate.interval->upper;
  }
  cell.n_pairs = estimate.n_pairs;
  cell.epsilon = estimate.epsilon;
  cell.variant = std::string(PairVariantName(estimate.variant));
  cell.method = estimate.method;
  cell.reject_zero = TestMpcZero(estimate).reject;

  const MatchedPairSet pairs = BuildMatchedPairs(slates, group, matching);
  if (pairs.size() >= 2) {
    const DyadicVariance dyadic = DyadicClusterVariance(pairs);
    cell.dyadic_variance = dyadic.variance;
    cell.dyadic_clamped = dyadic.clamped;
    if (dyadic.variance > 0.0) {
      MpcEstimate z = estimate;
      z.interval.reset();
      z.variance = dyadic.variance;
      cell.p_value = TestMpcZero(z).p_value;
    }
  }
  row.ndcg = NdcgFor(slates, bootstrap);
  return row;
}

std::vector<std::string> GroupsToAudit(const AuditOptions& o,
                                       std::span<const RankedSlate> slates) {
  if (!o.groups.empty()) {
    std::vector<std::string> groups = o.groups;
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
    return groups;
  }
  return CollectGroups(slates);
}

double PopulationStd(std::span<const RankedSlate> slates) {
  double sum = 0.0;
  double n = 0.0;
  for (const RankedSlate& slate : slates) {
    for (const Item& item : slate.items()) {
      sum += item.score;
      n += 1.0;
    }
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (const RankedSlate& slate : slates) {
    for (const Item& item : slate.items()) {
      ss += (item.score - mean) * (item.score - mean);
    }
  }
  return std::sqrt(ss / n);
}

Json BaseConfig(const AuditOptions& o, const EvalData& data,
                const MatchingConfig& matching,
                const BootstrapConfig& bootstrap) {
  Json config;
  config["inputs"] = data.inputs;
  config["seed"] = o.seed;
  config["bootstrap"] = BootstrapEcho(bootstrap);
  config["matching"] = MatchingEcho(matching);
  config["ranker"] = data.ranker;
  config["groups"] = o.groups.empty() ? Json("all") : Json(o.groups);
  return config;
}

struct Skip {
  std::string group;
  std::string rule;
  std::string reason;
};

Json SkipsJson(const std::vector<Skip>& skips) {
  Json out = Json::array();
  for (const Skip& s : skips) {
    out.push_back(Json{{"group", s.group}, {"rule", s.rule}, {"reason", s.reason}});
  }
  return out;
}

// Evaluates each rule for each group. A group whose estimate is undefined is
// skipped when auditing every group, and fails the command when it was asked
// for by name.
std::vector<ReportRow> EvaluateGroups(
    const AuditOptions& o, std::span<const RankedSlate> slates,
    const MatchingConfig& matching, const BootstrapConfig& bootstrap,
    const std::vector<std::pair<std::string, double>>& rules,
    std::vector<Skip>& skips) {
  std::vector<ReportRow> rows;
  const bool explicit_groups = !o.groups.empty();
  for (const std::string& group : GroupsToAudit(o, slates)) {
    std::vector<ReportRow> group_rows;
    try {
      for (const auto& [rule, alpha] : rules) {
        if (rule == "baseline") {
          group_rows.push_back(
              EvaluateRule(slates, group, rule, 0.0, matching, bootstrap));
        } else if (rule == "calibrated") {
          const std::vector<RankedSlate> calibrated =
              OracleCalibrate(slates, group);
          group_rows.push_back(EvaluateRule(calibrated, group, rule, 0.0,
                                            matching, bootstrap));
        } else {
          const std::vector<RankedSlate> shifted = Shift(slates, group, alpha);
          group_rows.push_back(
              EvaluateRule(shifted, group, rule, alpha, matching, bootstrap));
        }
      }
    } catch (const Error& e) {
      if (explicit_groups || !IsUndefined(e.code())) throw;
      const std::string rule =
          rules[group_rows.size()].first;
      skips.push_back(Skip{group, rule, e.what()});
      continue;
    }
    rows.insert(rows.end(), group_rows.begin(), group_rows.end());
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kInferenceUndefined,
                "no audited group has a defined MPC");
  }
  return rows;
}

Series CurveSeries(const CalibrationCurve& curve) {
  Series series;
  series.label = curve.label;
  for (const CalibrationBin& bin : curve.bins) {
    if (bin.count == 0) continue;
    series.x.push_back(bin.mean_score);
    series.y.push_back(bin.mean_outcome);
  }
  return series;
}

double MaxDeviation(const CalibrationCurve& curve) {
  double worst = 0.0;
  for (const CalibrationBin& bin : curve.bins) {
    if (bin.count == 0) continue;
    worst = std::max(worst, std::abs(bin.mean_outcome - bin.mean_score));
  }
  return worst;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kDimension:
    case ErrorCode::kConfiguration:
    case ErrorCode::kUnseenEntity:
    case ErrorCode::kParse:
    case ErrorCode::kIo:
      return 2;
    case ErrorCode::kEmptyDistribution:
    case ErrorCode::kUndefinedMetric:
    case ErrorCode::kInferenceUndefined:
      return 3;
    case ErrorCode::kInfeasible:
      return 4;
    case ErrorCode::kInvariantViolation:
      return 1;
  }
  return 1;
}

AuditReport RunAudit(const AuditOptions& options) {
  const MatchingConfig matching = MatchingFrom(options);
  const BootstrapConfig bootstrap = BootstrapFrom(
      options.trials, options.confidence, options.seed, options.resample_unit);
  if (options.out.empty()) {
    throw Error(ErrorCode::kConfiguration, "--out is required");
  }
  const EvalData data = LoadEvalData(options);

  AuditReport report;
  report.command = "audit";
  report.config = BaseConfig(options, data, matching, bootstrap);
  std::vector<Skip> skips;
  report.rows = EvaluateGroups(options, data.slates, matching, bootstrap,
                               {{"baseline", 0.0}}, skips);
  report.diagnostics = data.diagnostics;
  report.diagnostics["skipped"] = SkipsJson(skips);

  WriteOutputs(report, options.out, options.csv);
  WriteSlateFile(options.slates_out, data.slates);
  return report;
}

AuditReport RunSweep(const SweepOptions& options) {
  const AuditOptions& o = options.audit;
  const MatchingConfig matching = MatchingFrom(o);
  const BootstrapConfig bootstrap =
      BootstrapFrom(o.trials, o.confidence, o.seed, o.resample_unit);
  if (o.out.empty()) throw Error(ErrorCode::kConfiguration, "--out is required");
  if (options.alpha && !(std::isfinite(*options.alpha) && *options.alpha >= 0.0)) {
    throw Error(ErrorCode::kConfiguration, "--alpha must be finite and >= 0");
  }
  const EvalData data = LoadEvalData(o);

  const double score_std = PopulationStd(data.slates);
  const double alpha = options.alpha.value_or(score_std / 3.0);

  AuditReport report;
  report.command = "sweep";
  report.config = BaseConfig(o, data, matching, bootstrap);
  report.config["alpha"] = alpha;
  report.config["alpha_source"] = options.alpha ? "flag" : "score_std_over_3";
  std::vector<Skip> skips;
  report.rows = EvaluateGroups(o, data.slates, matching, bootstrap,
                               {{"baseline", 0.0},
                                {"boosted", alpha},
                                {"demoted", -alpha},
                                {"calibrated", 0.0}},
                               skips);
  report.diagnostics = data.diagnostics;
  report.diagnostics["eval_score_std"] = score_std;
  report.diagnostics["skipped"] = SkipsJson(skips);

  WriteOutputs(report, o.out, o.csv);
  WriteSlateFile(o.slates_out, data.slates);
  return report;
}

AuditReport RunSimulate(const SimulateOptions& o) {
  if (o.out.empty()) throw Error(ErrorCode::kConfiguration, "--out is required");
  if (o.p1_given_u.has_value() != o.p1_given_v.has_value()) {
    throw Error(ErrorCode::kConfiguration,
                "give both type mixture probabilities or neither");
  }
  if (o.bins == 0) throw Error(ErrorCode::kConfiguration, "--bins must be >= 1");
  SyntheticWorld world;
  world.p_u = o.p_u;
  world.b_u1 = o.b_u1;
  world.b_u2 = o.b_u2;
  world.b_v1 = o.b_v1;
  world.b_v2 = o.b_v2;
  world.slate_size = o.slate_size;
  world.seed = o.seed;
  if (o.p1_given_u) world.mixture = TypeMixture{*o.p1_given_u, *o.p1_given_v};
  world.Validate();
  const TypeMixture mixture = world.mixture ? *world.mixture
                                            : SolveTypeMixture(world);
  world.mixture = mixture;

  AuditOptions audit;
  audit.epsilon_percentile = o.epsilon_percentile;
  const MatchingConfig matching = MatchingFrom(audit);
  const BootstrapConfig bootstrap =
      BootstrapFrom(o.trials, o.confidence, o.seed, ResampleUnit::kQuery);

  const SyntheticDataset data = Generate(world, o.queries);
  const std::string group(kItemType1);

  AuditReport report;
  report.command = "simulate";
  report.config = Json{
      {"seed", o.seed},
      {"world",
       Json{{"p_u", o.p_u},
            {"b_u1", o.b_u1},
            {"b_u2", o.b_u2},
            {"b_v1", o.b_v1},
            {"b_v2", o.b_v2},
            {"p1_given_u", o.p1_given_u ? Json(*o.p1_given_u) : Json(nullptr)},
            {"p1_given_v", o.p1_given_v ? Json(*o.p1_given_v) : Json(nullptr)},
            {"queries", o.queries},
            {"slate_size", o.slate_size}}},
      {"bins", o.bins},
      {"boost", o.boost ? Json(*o.boost) : Json("mpc_estimate")},
      {"bootstrap", BootstrapEcho(bootstrap)},
      {"matching", MatchingEcho(matching)},
      {"groups", Json::array({group})}};

  ReportRow baseline =
      EvaluateRule(data.slates, group, "baseline", 0.0, matching, bootstrap);
  const double boost = o.boost.value_or(baseline.mpc.point);
  const std::vector<RankedSlate> boosted = Shift(data.slates, group, boost);
  ReportRow boosted_row =
      EvaluateRule(boosted, group, "boosted", boost, matching, bootstrap);

  // Figures: true relevance plus marginal and per-query-type calibration.
  Figure truth{"true_cal", "Expected relevance by query and item type",
               "score", "expected relevance", true, {}};
  for (QueryType q : {QueryType::kU, QueryType::kV}) {
    for (int t : {1, 2}) {
      Series s;
      s.label = std::string(q == QueryType::kU ? "u" : "v") + "/type" +
                std::to_string(t);
      for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        s.x.push_back(x);
        s.y.push_back(ExpectedRelevance(x, world.Bias(q, t)));
      }
      truth.series.push_back(std::move(s));
    }
  }
  const std::vector<Item> items = FlattenItems(data.slates);
  Figure marginal{"item_cal", "Calibration by item type", "mean score",
                  "mean outcome", true, {}};
  Json deviation;
  for (std::string_view type : {kItemType1, kItemType2}) {
    const CalibrationCurve curve = BinnedCalibration(
        items, [&](const Item& item) { return item.InGroup(type); },
        std::string(type), o.bins, 0.0, 1.0);
    marginal.series.push_back(CurveSeries(curve));
    deviation[std::string(type)] = MaxDeviation(curve);
  }
  Figure conditional{"query_cal", "Calibration by query and item type",
                     "mean score", "mean outcome", true, {}};
  for (const auto& by_query : ConditionalCalibration(data, o.bins)) {
    for (const CalibrationCurve& curve : by_query) {
      conditional.series.push_back(CurveSeries(curve));
    }
  }
  report.figures = {std::move(truth), std::move(marginal), std::move(conditional)};

  std::size_t u_queries = 0;
  for (QueryType q : data.query_types) u_queries += q == QueryType::kU;
  report.diagnostics = Json{
      {"mixture", Json{{"p1_given_u", mixture.p1_given_u},
                       {"p1_given_v", mixture.p1_given_v},
                       {"source", o.p1_given_u ? "flag" : "solved"}}},
      {"confounded_ordering", world.HasConfoundedOrdering()},
      {"queries", data.slates.size()},
      {"u_queries", u_queries},
      {"max_marginal_calibration_deviation", deviation},
      {"ndcg_change", boosted_row.ndcg.point - baseline.ndcg.point}};
  report.rows = {std::move(baseline), std::move(boosted_row)};

  WriteOutputs(report, o.out, o.csv);
  WriteSlateFile(o.slates_out, data.slates);
  if (!o.plots_dir.empty()) WritePlots(report, o.plots_dir);
  return report;
}

std::vector<std::string> RunPlots(const PlotsOptions& options) {
  if (options.report.empty() || options.out_dir.empty()) {
    throw Error(ErrorCode::kConfiguration, "need --report and --out-dir");
  }
  const AuditReport report = ReadReport(options.report);
  if (report.rows.empty() && report.figures.empty()) {
    throw Error(ErrorCode::kInvalidInput, "report is empty");
  }
  std::vector<std::string> written;
  for (const fs::path& path : WritePlots(report, options.out_dir)) {
    written.push_back(path.string());
  }
  return written;
}

}  // namespace mpc
