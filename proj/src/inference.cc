#include "mpc/inference.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <utility>

#include "mpc/error.h"

namespace mpc {

std::string_view ResampleUnitName(ResampleUnit unit) {
  return unit == ResampleUnit::kQuery ? "query" : "pair";
}

ResampleUnit ParseResampleUnit(std::string_view name) {
  if (name == "query") return ResampleUnit::kQuery;
  if (name == "pair") return ResampleUnit::kPair;
  throw Error(ErrorCode::kConfiguration,
              "unknown resample unit '" + std::string(name) + "'");
}

void BootstrapConfig::Validate() const {
  if (trials < 2) {
    throw Error(ErrorCode::kConfiguration, "bootstrap needs at least 2 trials");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "confidence must be in (0, 1)");
  }
}

std::mt19937_64 TrialEngine(std::uint64_t seed, std::size_t trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t),
                    static_cast<std::uint32_t>(t >> 32)};
  return std::mt19937_64(seq);
}

std::vector<std::uint32_t> ResampleCounts(std::size_t n,
                                          std::mt19937_64& engine) {
  std::vector<std::uint32_t> counts(n, 0);
  if (n == 0) return counts;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) ++counts[pick(engine)];
  return counts;
}

namespace {

double Quantile7(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval PercentileInterval(std::vector<double> statistics, double confidence) {
  if (statistics.empty()) {
    throw Error(ErrorCode::kInferenceUndefined,
                "no bootstrap statistics to form an interval");
  }
  std::sort(statistics.begin(), statistics.end());
  const double tail = 0.5 * (1.0 - confidence);
  return Interval{Quantile7(statistics, tail), Quantile7(statistics, 1.0 - tail)};
}

double SampleVariance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) /
      static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

BootstrapDraws BootstrapUnits(
    std::size_t n, const BootstrapConfig& cfg,
    const std::function<std::optional<double>(std::span<const std::uint32_t>)>&
        statistic) {
  cfg.Validate();
  BootstrapDraws draws;
  draws.statistics.reserve(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    std::mt19937_64 engine = TrialEngine(cfg.seed, t);
    const std::vector<std::uint32_t> counts = ResampleCounts(n, engine);
    if (auto value = statistic(counts)) {
      draws.statistics.push_back(*value);
    } else {
      ++draws.skipped;
    }
  }
  return draws;
}

namespace {

MpcEstimate FinishBootstrap(MpcEstimate estimate, BootstrapDraws draws,
                            const BootstrapConfig& cfg) {
  if (draws.statistics.empty()) {
    throw Error(ErrorCode::kInferenceUndefined,
                "every bootstrap trial produced an empty pair set");
  }
  estimate.variance = SampleVariance(draws.statistics);
  Interval interval = PercentileInterval(std::move(draws.statistics),
                                         cfg.confidence);
  // Reported intervals always contain the full-sample estimate.
  interval.lower = std::min(interval.lower, estimate.point);
  interval.upper = std::max(interval.upper, estimate.point);
  estimate.interval = interval;
  estimate.method =
      "bootstrap_" + std::string(ResampleUnitName(cfg.unit));
  return estimate;
}

struct SlateSum {
  double sum = 0.0;
  std::size_t count = 0;
};

// Statistic of a resample that copies slates; used where the pair selection
// depends on the whole resample (k smallest).
std::optional<double> RebuiltMpc(std::span<const RankedSlate> slates,
                                 std::span<const std::uint32_t> counts,
                                 std::string_view group,
                                 const MatchingConfig& matching) {
  std::vector<RankedSlate> resample;
  for (std::size_t i = 0; i < slates.size(); ++i) {
    for (std::uint32_t c = 0; c < counts[i]; ++c) resample.push_back(slates[i]);
  }
  const MatchedPairSet pairs = BuildMatchedPairs(resample, group, matching);
  if (pairs.empty()) return std::nullopt;
  return Mpc(pairs).point;
}

}  // namespace

MpcEstimate BootstrapMpc(std::span<const RankedSlate> slates,
                         std::string_view group, const MatchingConfig& matching,
                         const BootstrapConfig& cfg) {
  cfg.Validate();
  const MatchedPairSet full = BuildMatchedPairs(slates, group, matching);
  MpcEstimate estimate = Mpc(full);
  if (cfg.unit == ResampleUnit::kPair) {
    MpcEstimate boot = BootstrapMpcPairs(full, cfg);
    boot.point = estimate.point;
    return boot;
  }

  if (matching.threshold == MatchingConfig::Threshold::kKSmallest) {
    BootstrapDraws draws = BootstrapUnits(
        slates.size(), cfg, [&](std::span<const std::uint32_t> counts) {
          return RebuiltMpc(slates, counts, group, matching);
        });
    return FinishBootstrap(std::move(estimate), std::move(draws), cfg);
  }

  // With a fixed epsilon each slate's pairs do not depend on the other
  // slates, so a resample's MPC is a ratio of multiplicity-weighted sums.
  MatchingConfig fixed = matching;
  if (fixed.threshold == MatchingConfig::Threshold::kPercentile) {
    fixed.threshold = MatchingConfig::Threshold::kEpsilon;
    fixed.epsilon = full.epsilon;
  }
  std::vector<SlateSum> per_slate(slates.size());
  for (std::size_t i = 0; i < slates.size(); ++i) {
    const MatchedPairSet pairs =
        BuildMatchedPairs(slates.subspan(i, 1), group, fixed);
    for (const MatchedPair& pair : pairs.pairs) {
      per_slate[i].sum += pair.OutcomeDifference();
    }
    per_slate[i].count = pairs.size();
  }
  BootstrapDraws draws = BootstrapUnits(
      slates.size(), cfg,
      [&](std::span<const std::uint32_t> counts) -> std::optional<double> {
        double sum = 0.0;
        double n = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
          if (counts[i] == 0 || per_slate[i].count == 0) continue;
          sum += counts[i] * per_slate[i].sum;
          n += counts[i] * static_cast<double>(per_slate[i].count);
        }
        if (n == 0.0) return std::nullopt;
        return sum / n;
      });
  return FinishBootstrap(std::move(estimate), std::move(draws), cfg);
}

MpcEstimate BootstrapMpcPairs(const MatchedPairSet& pairs,
                              const BootstrapConfig& cfg) {
  MpcEstimate estimate = Mpc(pairs);
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const MatchedPair& pair : pairs.pairs) {
    diffs.push_back(pair.OutcomeDifference());
  }
  BootstrapConfig pair_cfg = cfg;
  pair_cfg.unit = ResampleUnit::kPair;
  BootstrapDraws draws = BootstrapUnits(
      diffs.size(), pair_cfg,
      [&](std::span<const std::uint32_t> counts) -> std::optional<double> {
        double sum = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
          sum += counts[i] * diffs[i];
        }
        return sum / static_cast<double>(diffs.size());
      });
  return FinishBootstrap(std::move(estimate), std::move(draws), pair_cfg);
}

Interval BootstrapMeanInterval(std::span<const double> per_query_values,
                               const BootstrapConfig& cfg) {
  if (per_query_values.empty()) {
    throw Error(ErrorCode::kInferenceUndefined, "no values to bootstrap");
  }
  BootstrapDraws draws = BootstrapUnits(
      per_query_values.size(), cfg,
      [&](std::span<const std::uint32_t> counts) -> std::optional<double> {
        double sum = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
          sum += counts[i] * per_query_values[i];
        }
        return sum / static_cast<double>(per_query_values.size());
      });
  return PercentileInterval(std::move(draws.statistics), cfg.confidence);
}

DyadicVariance DyadicClusterVariance(const MatchedPairSet& pairs) {
  const std::size_t m = pairs.size();
  if (m < 2) {
    throw Error(ErrorCode::kUndefinedMetric,
                "dyadic variance needs at least two pairs");
  }
  double mean = 0.0;
  for (const MatchedPair& pair : pairs.pairs) mean += pair.OutcomeDifference();
  mean /= static_cast<double>(m);

  // sum over items of (sum of residuals of pairs containing the item)^2
  // counts every (k, l) once per shared item. Pairs sharing both items are
  // counted twice there, so they are subtracted once.
  using ItemKey = std::pair<std::string, std::string>;
  using PairKey = std::tuple<std::string, std::string, std::string>;
  std::map<ItemKey, double> by_item;
  std::map<PairKey, double> by_pair;
  for (const MatchedPair& pair : pairs.pairs) {
    const double e = pair.OutcomeDifference() - mean;
    by_item[{pair.query_id, pair.g.id}] += e;
    by_item[{pair.query_id, pair.not_g.id}] += e;
    by_pair[{pair.query_id, pair.g.id, pair.not_g.id}] += e;
  }
  double total = 0.0;
  for (const auto& [key, s] : by_item) total += s * s;
  for (const auto& [key, s] : by_pair) total -= s * s;

  DyadicVariance out;
  out.variance = total / (static_cast<double>(m) * static_cast<double>(m));
  if (out.variance < 0.0) {
    out.variance = 0.0;
    out.clamped = true;
  }
  return out;
}

ZeroTestReport TestMpcZero(const MpcEstimate& estimate, double level) {
  ZeroTestReport report;
  if (estimate.interval) {
    report.method = "interval";
    report.statistic = estimate.point;
    report.reject = !estimate.interval->Contains(0.0);
    return report;
  }
  if (estimate.variance && *estimate.variance > 0.0) {
    report.method = "z";
    report.statistic = estimate.point / std::sqrt(*estimate.variance);
    const double p = std::erfc(std::abs(report.statistic) / std::sqrt(2.0));
    report.p_value = p;
    report.reject = p < level;
    return report;
  }
  throw Error(ErrorCode::kConfiguration,
              "zero test needs a positive variance or an interval");
}

}  // namespace mpc
