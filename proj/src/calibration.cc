#include "mpc/calibration.h"

#include <algorithm>
#include <cmath>

#include "mpc/error.h"

namespace mpc {

IsotonicFit::IsotonicFit(std::vector<IsotonicBlock> blocks)
    : blocks_(std::move(blocks)) {}

double IsotonicFit::Predict(double score) const {
  if (blocks_.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "prediction from an empty fit");
  }
  auto it = std::upper_bound(
      blocks_.begin(), blocks_.end(), score,
      [](double s, const IsotonicBlock& b) { return s < b.lower_score; });
  if (it == blocks_.begin()) return blocks_.front().value;
  return std::prev(it)->value;
}

std::vector<double> IsotonicFit::Knots() const {
  std::vector<double> knots;
  knots.reserve(blocks_.size());
  for (const IsotonicBlock& b : blocks_) knots.push_back(b.lower_score);
  return knots;
}

std::vector<double> IsotonicFit::Values() const {
  std::vector<double> values;
  values.reserve(blocks_.size());
  for (const IsotonicBlock& b : blocks_) values.push_back(b.value);
  return values;
}

IsotonicFit PavaFit(std::vector<WeightedPoint> points) {
  if (points.empty()) {
    throw Error(ErrorCode::kUndefinedMetric, "isotonic fit of no points");
  }
  for (const WeightedPoint& p : points) {
    if (!std::isfinite(p.score) || !std::isfinite(p.outcome) ||
        !std::isfinite(p.weight)) {
      throw Error(ErrorCode::kInvalidInput, "non-finite isotonic input");
    }
    if (!(p.weight > 0.0)) {
      throw Error(ErrorCode::kInvalidInput, "isotonic weights must be positive");
    }
  }
  std::sort(points.begin(), points.end(),
            [](const WeightedPoint& a, const WeightedPoint& b) {
              return a.score < b.score;
            });

  // Blocks hold the weighted outcome sum in `value` until the end.
  std::vector<IsotonicBlock> stack;
  auto mean = [](const IsotonicBlock& b) { return b.value / b.weight; };
  for (std::size_t i = 0; i < points.size();) {
    IsotonicBlock block{points[i].score, points[i].score, 0.0, 0.0};
    for (; i < points.size() && points[i].score == block.lower_score; ++i) {
      block.value += points[i].weight * points[i].outcome;
      block.weight += points[i].weight;
    }
    stack.push_back(block);
    while (stack.size() > 1 &&
           mean(stack[stack.size() - 2]) > mean(stack.back())) {
      IsotonicBlock top = stack.back();
      stack.pop_back();
      IsotonicBlock& prev = stack.back();
      prev.value += top.value;
      prev.weight += top.weight;
      prev.upper_score = top.upper_score;
    }
  }
  for (IsotonicBlock& b : stack) b.value /= b.weight;
  return IsotonicFit(std::move(stack));
}

PartitionFn MembershipPartition(std::string group) {
  return [group = std::move(group)](const Item& item) {
    return std::string(item.InGroup(group) ? "member" : "non_member");
  };
}

namespace {

Calibrator FitCalibratorOnItems(std::span<const Item> items,
                                const PartitionFn& partition) {
  std::map<std::string, std::vector<WeightedPoint>> points;
  std::vector<WeightedPoint> all;
  all.reserve(items.size());
  for (const Item& item : items) {
    points[partition(item)].push_back({item.score, item.outcome, 1.0});
    all.push_back({item.score, item.outcome, 1.0});
  }
  Calibrator calibrator;
  for (auto& [key, pts] : points) calibrator.fits[key] = PavaFit(std::move(pts));
  calibrator.global = PavaFit(std::move(all));
  return calibrator;
}

}  // namespace

Calibrator FitCalibrator(std::span<const RankedSlate> slates,
                         const PartitionFn& partition) {
  std::vector<Item> items;
  for (const RankedSlate& slate : slates) {
    items.insert(items.end(), slate.items().begin(), slate.items().end());
  }
  return FitCalibratorOnItems(items, partition);
}

CalibratedSlates ApplyCalibrator(const Calibrator& calibrator,
                                 std::span<const RankedSlate> slates,
                                 const PartitionFn& partition) {
  CalibratedSlates out;
  out.slates.reserve(slates.size());
  std::map<std::string, std::size_t> missing;
  for (const RankedSlate& slate : slates) {
    std::vector<Item> items(slate.items().begin(), slate.items().end());
    for (Item& item : items) {
      const std::string key = partition(item);
      auto it = calibrator.fits.find(key);
      if (it == calibrator.fits.end()) {
        item.score = calibrator.global.Predict(item.score);
        ++out.fallback_items;
        ++missing[key];
      } else {
        item.score = it->second.Predict(item.score);
      }
    }
    out.slates.push_back(RankByScore(slate.query_id(), std::move(items)));
  }
  for (const auto& [key, count] : missing) {
    out.warnings.push_back("partition '" + key +
                           "' has no training points; " +
                           std::to_string(count) +
                           " items scored with the global fit");
  }
  return out;
}

std::vector<Item> CalibrateScores(std::span<const Item> items,
                                  const PartitionFn& partition) {
  if (items.empty()) return {};
  const Calibrator calibrator = FitCalibratorOnItems(items, partition);
  std::vector<Item> out(items.begin(), items.end());
  for (Item& item : out) {
    item.score = calibrator.fits.at(partition(item)).Predict(item.score);
  }
  return out;
}

std::vector<RankedSlate> OracleCalibrate(std::span<const RankedSlate> slates,
                                         std::string_view group) {
  const PartitionFn partition = MembershipPartition(std::string(group));
  const Calibrator calibrator = FitCalibrator(slates, partition);
  return ApplyCalibrator(calibrator, slates, partition).slates;
}

}  // namespace mpc
