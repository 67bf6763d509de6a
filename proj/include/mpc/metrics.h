#ifndef MPC_METRICS_H_
#define MPC_METRICS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpc/core.h"
#include "mpc/matching.h"

namespace mpc {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool Contains(double x) const { return lower <= x && x <= upper; }
  double HalfWidth() const { return 0.5 * (upper - lower); }
};

// Matched pair calibration estimate. Positive values mean the group is
// undervalued by the ranker at its near-ties.
struct MpcEstimate {
  std::string group;
  double point = 0.0;
  std::size_t n_pairs = 0;
  double epsilon = 0.0;
  PairVariant variant = PairVariant::kEpsilon;
  std::string method = "plain";
  std::optional<double> variance;
  std::optional<Interval> interval;
};

// Mean of Y(g) - Y(not g) over the pairs. Throws kUndefinedMetric on an empty
// set rather than returning zero.
MpcEstimate Mpc(const MatchedPairSet& pairs);

// Pairs are bucketed by the position of their higher-ranked member; the
// per-bucket MPCs are averaged with weight w_j normalized over occupied
// buckets. The span overload accepts any positive per-position weights.
MpcEstimate MpcPositionWeighted(const MatchedPairSet& pairs,
                                const PositionWeights& weights);
MpcEstimate MpcPositionWeighted(const MatchedPairSet& pairs,
                                std::span<const double> position_weights);

// DCG / ideal DCG with linear gain. A slate whose outcomes are all zero is
// ideal under any order and scores 1.
double Ndcg(const RankedSlate& slate, const PositionWeights& weights);

// Mean NDCG over slates using the log discount sized to each slate.
double MeanNdcg(std::span<const RankedSlate> slates);
std::vector<double> PerSlateNdcg(std::span<const RankedSlate> slates);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_score = 0.0;    // NaN when empty
  double mean_outcome = 0.0;  // NaN when empty
};

struct CalibrationCurve {
  std::string label;
  std::vector<CalibrationBin> bins;

  std::size_t TotalCount() const;
};

struct GroupCalibration {
  CalibrationCurve members;
  CalibrationCurve non_members;
};

// Equal-width bins over [lo, hi]; the last bin is closed on the right.
CalibrationCurve BinnedCalibration(std::span<const Item> items,
                                   const std::function<bool(const Item&)>& keep,
                                   std::string label, std::size_t bins,
                                   double lo, double hi);

// Member and non-member curves over the observed score range of `items`.
// Throws kUndefinedMetric on empty input.
GroupCalibration CalibrationCurves(std::span<const Item> items,
                                   std::string_view group,
                                   std::size_t bins = 10);
GroupCalibration CalibrationCurves(std::span<const RankedSlate> slates,
                                   std::string_view group,
                                   std::size_t bins = 10);

std::vector<Item> FlattenItems(std::span<const RankedSlate> slates);

}  // namespace mpc

#endif  // MPC_METRICS_H_
