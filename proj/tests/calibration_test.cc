#include "mpc/calibration.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mpc/metrics.h"
#include "support/test_util.h"

namespace mpc {
namespace {

using testing::CodeOf;
using testing::Slate;

// Least-squares monotone fit by enumerating every split of the sorted
// distinct-score points into consecutive blocks. The optimum is always a set
// of block means, so the best non-decreasing candidate is the exact answer.
std::vector<double> BruteForceIsotonic(std::vector<WeightedPoint> points) {
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.score < b.score; });
  // Equal scores share one fitted value.
  std::vector<WeightedPoint> merged;
  for (const WeightedPoint& p : points) {
    if (!merged.empty() && merged.back().score == p.score) {
      WeightedPoint& m = merged.back();
      m.outcome = (m.outcome * m.weight + p.outcome * p.weight) / (m.weight + p.weight);
      m.weight += p.weight;
    } else {
      merged.push_back(p);
    }
  }
  const std::size_t n = merged.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_values;
  for (std::uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> values(n);
    std::size_t start = 0;
    bool monotone = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const bool end = i == n - 1 || (cuts >> i) & 1u;
      if (!end) continue;
      double sw = 0.0, swy = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        sw += merged[k].weight;
        swy += merged[k].weight * merged[k].outcome;
      }
      const double mean = swy / sw;
      if (mean < prev - 1e-12) monotone = false;
      prev = mean;
      for (std::size_t k = start; k <= i; ++k) values[k] = mean;
      start = i + 1;
    }
    if (!monotone) continue;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sse += merged[k].weight * std::pow(merged[k].outcome - values[k], 2);
    }
    if (sse < best) {
      best = sse;
      best_values = values;
    }
  }
  std::vector<double> out;
  for (const WeightedPoint& p : points) {
    const auto it = std::find_if(merged.begin(), merged.end(),
                                 [&](const auto& m) { return m.score == p.score; });
    out.push_back(best_values[static_cast<std::size_t>(it - merged.begin())]);
  }
  return out;
}

TEST(PavaFit, MonotoneInputUnchanged) {
  const IsotonicFit fit = PavaFit({{0.1, 1, 1}, {0.2, 2, 1}, {0.3, 3, 1}});
  EXPECT_EQ(fit.Values(), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(fit.Knots(), (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(PavaFit, ViolatorPooled) {
  const IsotonicFit fit = PavaFit({{0.1, 3, 1}, {0.2, 1, 1}});
  EXPECT_DOUBLE_EQ(fit.Predict(0.1), 2.0);
  EXPECT_DOUBLE_EQ(fit.Predict(0.2), 2.0);
  // Grid search over monotone value pairs agrees.
  double best = 1e9, b1 = 0, b2 = 0;
  for (int i = 0; i <= 400; ++i) {
    for (int j = i; j <= 400; ++j) {
      const double v1 = i / 100.0, v2 = j / 100.0;
      const double sse = (3 - v1) * (3 - v1) + (1 - v2) * (1 - v2);
      if (sse < best) best = sse, b1 = v1, b2 = v2;
    }
  }
  EXPECT_NEAR(b1, 2.0, 1e-9);
  EXPECT_NEAR(b2, 2.0, 1e-9);
}

TEST(PavaFit, SinglePointIsConstant) {
  const IsotonicFit fit = PavaFit({{0.4, 2.5, 1}});
  for (double s : {-1.0, 0.4, 7.0}) EXPECT_DOUBLE_EQ(fit.Predict(s), 2.5);
}

TEST(PavaFit, StepFunctionAndClamping) {
  const IsotonicFit fit = PavaFit({{0.1, 1, 1}, {0.3, 2, 1}, {0.5, 4, 1}});
  EXPECT_DOUBLE_EQ(fit.Predict(0.0), 1.0);
  EXPECT_DOUBLE_EQ(fit.Predict(0.2), 1.0);
  EXPECT_DOUBLE_EQ(fit.Predict(0.3), 2.0);
  EXPECT_DOUBLE_EQ(fit.Predict(0.49), 2.0);
  EXPECT_DOUBLE_EQ(fit.Predict(9.0), 4.0);
}

TEST(PavaFit, TiesArePrePooled) {
  const IsotonicFit fit = PavaFit({{0.2, 4, 1}, {0.1, 1, 1}, {0.2, 2, 3}});
  ASSERT_EQ(fit.blocks().size(), 2u);
  EXPECT_DOUBLE_EQ(fit.Predict(0.2), 2.5);
}

TEST(PavaFit, Errors) {
  EXPECT_EQ(CodeOf([] { PavaFit({}); }), ErrorCode::kUndefinedMetric);
  EXPECT_EQ(CodeOf([] { PavaFit({{NAN, 1, 1}}); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { PavaFit({{0.1, 1, 0}}); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { IsotonicFit().Predict(0.0); }), ErrorCode::kUndefinedMetric);
}

TEST(PavaFit, MatchesBruteForce) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<int> grid(0, 5);
  std::uniform_real_distribution<double> y(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.2, 3.0);
  for (int seed = 0; seed < 200; ++seed) {
    const int n = size(rng);
    std::vector<WeightedPoint> points;
    for (int i = 0; i < n; ++i) points.push_back({grid(rng) * 0.1, y(rng), w(rng)});
    const IsotonicFit fit = PavaFit(points);
    const std::vector<double> expected = BruteForceIsotonic(points);
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.score < b.score; });
    for (std::size_t i = 0; i < points.size(); ++i) {
      EXPECT_NEAR(fit.Predict(points[i].score), expected[i], 1e-6) << "seed " << seed;
    }
    const std::vector<double> values = fit.Values();
    EXPECT_TRUE(std::is_sorted(values.begin(), values.end()));
    const std::vector<double> knots = fit.Knots();
    EXPECT_TRUE(std::adjacent_find(knots.begin(), knots.end(),
                                   std::greater_equal<>()) == knots.end());
  }
}

std::vector<RankedSlate> NoisySlates(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RankedSlate> slates;
  for (int q = 0; q < 60; ++q) {
    std::vector<Item> items;
    for (int i = 0; i < 8; ++i) {
      const bool member = unit(rng) < 0.4;
      const double s = unit(rng);
      const double y = std::round(std::clamp(s * 4 + (member ? 0.7 : 0) + unit(rng) - 0.5, 0.5, 5.0) * 2) / 2;
      items.push_back(MakeItem("i" + std::to_string(i), s, y,
                               member ? std::vector<std::string>{"g"} : std::vector<std::string>{}));
    }
    slates.push_back(RankByScore("q" + std::to_string(q), std::move(items)));
  }
  return slates;
}

TEST(CalibrateScores, ConstantOutcomesPerPartition) {
  std::vector<Item> items;
  for (int i = 0; i < 20; ++i) {
    const bool member = i % 2;
    items.push_back(MakeItem(std::to_string(i), i * 0.05, member ? 4.0 : 1.5,
                             member ? std::vector<std::string>{"g"} : std::vector<std::string>{}));
  }
  for (const Item& item : CalibrateScores(items, MembershipPartition("g"))) {
    EXPECT_DOUBLE_EQ(item.score, item.InGroup("g") ? 4.0 : 1.5);
  }
}

TEST(CalibrateScores, CalibratedOnFittingSet) {
  const std::vector<Item> items = FlattenItems(NoisySlates(3));
  const std::vector<Item> calibrated = CalibrateScores(items, MembershipPartition("g"));
  for (bool member : {true, false}) {
    std::vector<Item> part;
    for (const Item& i : calibrated) if (i.InGroup("g") == member) part.push_back(i);
    double lo = 1e9, hi = -1e9;
    for (const Item& i : part) lo = std::min(lo, i.score), hi = std::max(hi, i.score);
    const CalibrationCurve curve = BinnedCalibration(
        part, [](const Item&) { return true; }, "p", 10, lo, hi);
    for (const CalibrationBin& bin : curve.bins) {
      if (bin.count > 0) EXPECT_NEAR(bin.mean_outcome, bin.mean_score, 1e-9);
    }
  }
}

TEST(CalibrateScores, IdempotentAndOrderPreserving) {
  const std::vector<Item> items = FlattenItems(NoisySlates(4));
  const PartitionFn partition = MembershipPartition("g");
  const std::vector<Item> once = CalibrateScores(items, partition);
  const std::vector<Item> twice = CalibrateScores(once, partition);
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_NEAR(twice[i].score, once[i].score, 1e-12);
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (partition(items[i]) != partition(items[j])) continue;
      if (items[i].score < items[j].score) EXPECT_LE(once[i].score, once[j].score);
    }
  }
}

TEST(ApplyCalibrator, FallsBackToGlobalFit) {
  const std::vector<RankedSlate> train = {
      Slate("q", {{"a", 0.2, 1, {}}, {"b", 0.8, 3, {}}})};
  const PartitionFn partition = MembershipPartition("g");
  const Calibrator calibrator = FitCalibrator(train, partition);
  EXPECT_EQ(calibrator.fits.count("member"), 0u);
  const std::vector<RankedSlate> eval = {
      Slate("r", {{"c", 0.9, 0, {"g"}}, {"d", 0.1, 0, {}}})};
  const CalibratedSlates out = ApplyCalibrator(calibrator, eval, partition);
  EXPECT_EQ(out.fallback_items, 1u);
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_DOUBLE_EQ(out.slates[0].AtPosition(1).score, 3.0);
  EXPECT_DOUBLE_EQ(out.slates[0].AtPosition(2).score, 1.0);
}

TEST(OracleCalibrate, ReRanksByCalibratedScore) {
  const std::vector<RankedSlate> slates = NoisySlates(5);
  const std::vector<RankedSlate> calibrated = OracleCalibrate(slates, "g");
  ASSERT_EQ(calibrated.size(), slates.size());
  for (std::size_t q = 0; q < slates.size(); ++q) {
    EXPECT_EQ(calibrated[q].query_id(), slates[q].query_id());
    EXPECT_EQ(calibrated[q].size(), slates[q].size());
    for (std::size_t j = 1; j < calibrated[q].size(); ++j) {
      EXPECT_GE(calibrated[q].items()[j - 1].score, calibrated[q].items()[j].score);
    }
  }
}

}  // namespace
}  // namespace mpc
