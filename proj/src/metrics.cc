#include "mpc/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mpc/error.h"

namespace mpc {

namespace {

void RequirePairs(const MatchedPairSet& pairs) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kUndefinedMetric,
                "MPC is undefined on an empty pair set (group '" +
                    pairs.group + "')");
  }
}

MpcEstimate EstimateShell(const MatchedPairSet& pairs) {
  MpcEstimate estimate;
  estimate.group = pairs.group;
  estimate.n_pairs = pairs.size();
  estimate.epsilon = pairs.epsilon;
  estimate.variant = pairs.variant;
  return estimate;
}

}  // namespace

MpcEstimate Mpc(const MatchedPairSet& pairs) {
  RequirePairs(pairs);
  double sum = 0.0;
  for (const MatchedPair& pair : pairs.pairs) sum += pair.OutcomeDifference();
  MpcEstimate estimate = EstimateShell(pairs);
  estimate.point = sum / static_cast<double>(pairs.size());
  return estimate;
}

MpcEstimate MpcPositionWeighted(const MatchedPairSet& pairs,
                                const PositionWeights& weights) {
  return MpcPositionWeighted(pairs, weights.values());
}

MpcEstimate MpcPositionWeighted(const MatchedPairSet& pairs,
                                std::span<const double> position_weights) {
  RequirePairs(pairs);
  struct Bucket {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::size_t, Bucket> buckets;
  for (const MatchedPair& pair : pairs.pairs) {
    Bucket& bucket = buckets[pair.HigherPosition()];
    bucket.sum += pair.OutcomeDifference();
    ++bucket.count;
  }
  double weighted = 0.0;
  double total_weight = 0.0;
  for (const auto& [position, bucket] : buckets) {
    if (position > position_weights.size()) {
      throw Error(ErrorCode::kDimension,
                  "no position weight for bucket at position " +
                      std::to_string(position));
    }
    const double w = position_weights[position - 1];
    if (!(w > 0.0)) {
      throw Error(ErrorCode::kInvalidInput, "position weights must be positive");
    }
    weighted += w * bucket.sum / static_cast<double>(bucket.count);
    total_weight += w;
  }
  MpcEstimate estimate = EstimateShell(pairs);
  estimate.point = weighted / total_weight;
  estimate.method = "position_weighted";
  return estimate;
}

double Ndcg(const RankedSlate& slate, const PositionWeights& weights) {
  const double dcg = ObjectiveValue(slate, weights);
  std::vector<double> ideal;
  ideal.reserve(slate.size());
  for (const Item& item : slate.items()) ideal.push_back(item.outcome);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t j = 0; j < ideal.size(); ++j) {
    idcg += weights.values()[j] * ideal[j];
  }
  if (idcg == 0.0) {
    const bool all_zero = std::all_of(ideal.begin(), ideal.end(),
                                      [](double y) { return y == 0.0; });
    if (all_zero) return 1.0;
    throw Error(ErrorCode::kUndefinedMetric,
                "NDCG undefined: ideal DCG is zero with nonzero outcomes");
  }
  return dcg / idcg;
}

std::vector<double> PerSlateNdcg(std::span<const RankedSlate> slates) {
  std::size_t longest = 0;
  for (const RankedSlate& slate : slates) longest = std::max(longest, slate.size());
  const PositionWeights weights = PositionWeights::LogDiscount(longest);
  std::vector<double> out;
  out.reserve(slates.size());
  for (const RankedSlate& slate : slates) out.push_back(Ndcg(slate, weights));
  return out;
}

double MeanNdcg(std::span<const RankedSlate> slates) {
  if (slates.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "mean NDCG of no slates");
  }
  const std::vector<double> values = PerSlateNdcg(slates);
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::size_t CalibrationCurve::TotalCount() const {
  std::size_t total = 0;
  for (const CalibrationBin& bin : bins) total += bin.count;
  return total;
}

CalibrationCurve BinnedCalibration(std::span<const Item> items,
                                   const std::function<bool(const Item&)>& keep,
                                   std::string label, std::size_t bins,
                                   double lo, double hi) {
  if (bins == 0) {
    throw Error(ErrorCode::kInvalidInput, "need at least one bin");
  }
  CalibrationCurve curve;
  curve.label = std::move(label);
  curve.bins.resize(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    curve.bins[b].lower = lo + width * static_cast<double>(b);
    curve.bins[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  std::vector<double> score_sum(bins, 0.0), outcome_sum(bins, 0.0);
  for (const Item& item : items) {
    if (!keep(item)) continue;
    std::size_t b = 0;
    if (width > 0.0) {
      const double raw = std::floor((item.score - lo) / width);
      b = raw <= 0.0 ? 0
                     : std::min(bins - 1, static_cast<std::size_t>(raw));
    }
    ++curve.bins[b].count;
    score_sum[b] += item.score;
    outcome_sum[b] += item.outcome;
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t b = 0; b < bins; ++b) {
    CalibrationBin& bin = curve.bins[b];
    const auto n = static_cast<double>(bin.count);
    bin.mean_score = bin.count ? score_sum[b] / n : kNaN;
    bin.mean_outcome = bin.count ? outcome_sum[b] / n : kNaN;
  }
  return curve;
}

GroupCalibration CalibrationCurves(std::span<const Item> items,
                                   std::string_view group, std::size_t bins) {
  if (items.empty()) {
    throw Error(ErrorCode::kUndefinedMetric,
                "calibration curve of an empty item set");
  }
  double lo = items.front().score;
  double hi = lo;
  for (const Item& item : items) {
    lo = std::min(lo, item.score);
    hi = std::max(hi, item.score);
  }
  const std::string label(group);
  GroupCalibration out;
  out.members = BinnedCalibration(
      items, [&](const Item& item) { return item.InGroup(label); }, label, bins,
      lo, hi);
  out.non_members = BinnedCalibration(
      items, [&](const Item& item) { return !item.InGroup(label); },
      "not " + label, bins, lo, hi);
  return out;
}

GroupCalibration CalibrationCurves(std::span<const RankedSlate> slates,
                                   std::string_view group, std::size_t bins) {
  const std::vector<Item> items = FlattenItems(slates);
  return CalibrationCurves(std::span<const Item>(items), group, bins);
}

std::vector<Item> FlattenItems(std::span<const RankedSlate> slates) {
  std::vector<Item> items;
  for (const RankedSlate& slate : slates) {
    items.insert(items.end(), slate.items().begin(), slate.items().end());
  }
  return items;
}

}  // namespace mpc
