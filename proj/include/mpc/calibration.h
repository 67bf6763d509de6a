#ifndef MPC_CALIBRATION_H_
#define MPC_CALIBRATION_H_

// Isotonic (pool-adjacent-violators) calibration of scores to outcomes.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpc/core.h"

namespace mpc {

struct WeightedPoint {
  double score = 0.0;
  double outcome = 0.0;
  double weight = 1.0;
};

struct IsotonicBlock {
  double lower_score = 0.0;  // smallest score pooled into the block
  double upper_score = 0.0;  // largest score pooled into the block
  double value = 0.0;        // weighted mean outcome
  double weight = 0.0;       // total weight
};

// Non-decreasing step function. Between blocks the value of the block to the
// left holds (right-continuous steps); outside the fitted range the end
// blocks are extended.
class IsotonicFit {
 public:
  IsotonicFit() = default;
  explicit IsotonicFit(std::vector<IsotonicBlock> blocks);

  double Predict(double score) const;
  std::span<const IsotonicBlock> blocks() const { return blocks_; }
  std::vector<double> Knots() const;
  std::vector<double> Values() const;

 private:
  std::vector<IsotonicBlock> blocks_;
};

// Weighted least-squares non-decreasing fit. Points with equal scores are
// pooled first. Throws kUndefinedMetric on empty input and kInvalidInput on
// non-finite values or non-positive weights.
IsotonicFit PavaFit(std::vector<WeightedPoint> points);

// Maps an item to the key of the fit it belongs to.
using PartitionFn = std::function<std::string(const Item&)>;

// "member" / "non_member" of a single audited group.
PartitionFn MembershipPartition(std::string group);

struct Calibrator {
  std::map<std::string, IsotonicFit> fits;
  IsotonicFit global;
};

Calibrator FitCalibrator(std::span<const RankedSlate> slates,
                         const PartitionFn& partition);

struct CalibratedSlates {
  std::vector<RankedSlate> slates;  // re-ranked by calibrated score
  std::size_t fallback_items = 0;   // items scored with the global fit
  std::vector<std::string> warnings;
};

// Replaces every score with its partition's fitted value. Items whose
// partition has no fit fall back to the global fit with a warning.
CalibratedSlates ApplyCalibrator(const Calibrator& calibrator,
                                 std::span<const RankedSlate> slates,
                                 const PartitionFn& partition);

// Fit and apply on the same items.
std::vector<Item> CalibrateScores(std::span<const Item> items,
                                  const PartitionFn& partition);

// Fits member and non-member curves of `group` on the slates themselves and
// re-ranks them: the best calibration achievable on this data.
std::vector<RankedSlate> OracleCalibrate(std::span<const RankedSlate> slates,
                                         std::string_view group);

}  // namespace mpc

#endif  // MPC_CALIBRATION_H_
