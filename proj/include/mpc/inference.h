#ifndef MPC_INFERENCE_H_
#define MPC_INFERENCE_H_

// Uncertainty for MPC estimates: percentile bootstrap over queries or pairs,
// a dyadic cluster-robust variance for overlapping pairs, and a test of the
// null hypothesis MPC = 0.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpc/core.h"
#include "mpc/matching.h"
#include "mpc/metrics.h"

namespace mpc {

enum class ResampleUnit { kQuery, kPair };

std::string_view ResampleUnitName(ResampleUnit unit);
ResampleUnit ParseResampleUnit(std::string_view name);

struct BootstrapConfig {
  std::size_t trials = 201;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  ResampleUnit unit = ResampleUnit::kQuery;

  void Validate() const;
};

// Private random stream of one bootstrap trial. Depends only on (seed, trial)
// so trials can be evaluated in any order.
std::mt19937_64 TrialEngine(std::uint64_t seed, std::size_t trial);

// Multiplicity of each of n units in one resample with replacement.
std::vector<std::uint32_t> ResampleCounts(std::size_t n, std::mt19937_64& engine);

// Linear-interpolated (type 7) quantiles at (1 - c)/2 and (1 + c)/2.
Interval PercentileInterval(std::vector<double> statistics, double confidence);

double SampleVariance(std::span<const double> values);

struct BootstrapDraws {
  std::vector<double> statistics;  // trials with a defined statistic
  std::size_t skipped = 0;         // trials where the statistic was undefined
};

// Runs cfg.trials resamples of n query units. `statistic` receives the
// per-unit multiplicities and returns nullopt when undefined on that draw.
BootstrapDraws BootstrapUnits(
    std::size_t n, const BootstrapConfig& cfg,
    const std::function<std::optional<double>(std::span<const std::uint32_t>)>&
        statistic);

// MPC with a percentile bootstrap interval. Query resampling keeps every
// slate's pairs together. For threshold modes the epsilon is resolved once
// on the full sample; k-smallest selection is redone on every draw. Pair
// resampling draws pairs from the full-sample set.
// Throws kInferenceUndefined if every trial yields an empty pair set.
MpcEstimate BootstrapMpc(std::span<const RankedSlate> slates,
                         std::string_view group, const MatchingConfig& matching,
                         const BootstrapConfig& cfg);
MpcEstimate BootstrapMpcPairs(const MatchedPairSet& pairs,
                              const BootstrapConfig& cfg);

// Percentile interval for the mean of per-query values under query
// resampling (used for NDCG).
Interval BootstrapMeanInterval(std::span<const double> per_query_values,
                               const BootstrapConfig& cfg);

struct DyadicVariance {
  double variance = 0.0;
  bool clamped = false;  // raw estimate was negative and was set to zero
};

// V = (1/m^2) sum_{k,l} 1[k == l or pairs k, l share an item] e_k e_l with
// e_k = d_k - mean(d). Items are identified by (query id, item id).
// Throws kUndefinedMetric when m < 2.
DyadicVariance DyadicClusterVariance(const MatchedPairSet& pairs);

struct ZeroTestReport {
  double statistic = 0.0;  // z score, or the point estimate for interval tests
  std::optional<double> p_value;
  bool reject = false;
  std::string method;  // "z" or "interval"
};

// Uses the interval when present, otherwise a two-sided normal z-test on the
// variance. Throws kConfiguration when neither is available.
ZeroTestReport TestMpcZero(const MpcEstimate& estimate, double level = 0.05);

}  // namespace mpc

#endif  // MPC_INFERENCE_H_
