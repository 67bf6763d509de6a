#ifndef MPC_MATCHING_H_
#define MPC_MATCHING_H_

// Matched pair construction. A pair couples an item of the audited group g
// with a near-tied item outside g from the same query.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpc/core.h"

namespace mpc {

enum class PairVariant { kEpsilon, kKSmallest, kAdjacent };

std::string_view PairVariantName(PairVariant variant);

struct PairMember {
  std::string id;
  double score = 0.0;
  double outcome = 0.0;
  std::size_t position = 0;  // 1-based position in the slate
};

struct MatchedPair {
  std::string query_id;
  PairMember g;      // carries the audited label
  PairMember not_g;  // does not
  double score_gap = 0.0;  // s(not_g) - s(g); negative only for g-ahead pairs
  bool adjacent = false;
  bool g_ahead = false;  // g ranked above not_g (admitted by the adjacency
                         // variant with both orientations)

  double OutcomeDifference() const { return g.outcome - not_g.outcome; }
  std::size_t HigherPosition() const;
};

struct MatchedPairSet {
  std::string group;
  double epsilon = 0.0;
  PairVariant variant = PairVariant::kEpsilon;
  std::vector<MatchedPair> pairs;  // ascending score_gap

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

// Canonical pair order: lexicographic on (score gap, query id, g id, other id).
bool PairOrder(const MatchedPair& a, const MatchedPair& b);

// All cross-group pairs with 0 <= s(not_g) - s(g) <= epsilon in one slate.
// Overlapping pairs (sharing an item) are all kept.
MatchedPairSet BuildPairsEpsilon(const RankedSlate& slate,
                                 std::string_view group, double epsilon);
MatchedPairSet BuildPairsEpsilon(std::span<const RankedSlate> slates,
                                 std::string_view group, double epsilon);

// Every nonnegative cross-group gap s(not_g) - s(g), pooled over slates.
std::vector<double> EligibleGaps(std::span<const RankedSlate> slates,
                                 std::string_view group);

// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value.
double NearestRankPercentile(std::vector<double> values, double percentile);

// Percentile (default first) of the pooled eligible gap distribution.
double EpsilonFromPercentile(std::span<const RankedSlate> slates,
                             std::string_view group, double percentile = 1.0);

// The k eligible pairs with the smallest gaps across all slates; boundary
// ties broken by PairOrder. Returns every eligible pair when fewer exist.
MatchedPairSet BuildPairsKSmallest(std::span<const RankedSlate> slates,
                                   std::string_view group, std::size_t k);

// Keeps pairs at adjacent positions with the non-g item ranked ahead. With
// `include_both_orientations`, also admits adjacent pairs where the g item is
// ranked ahead and |gap| <= pairs.epsilon (their score_gap is <= 0).
MatchedPairSet FilterAdjacent(const MatchedPairSet& pairs,
                              std::span<const RankedSlate> slates,
                              bool include_both_orientations);

// Union of per-query sets. Throws kConfiguration on mixed groups/variants.
MatchedPairSet PoolAcrossQueries(std::span<const MatchedPairSet> sets);

// How an audit selects its matched pairs.
struct MatchingConfig {
  enum class Threshold { kEpsilon, kPercentile, kKSmallest };

  Threshold threshold = Threshold::kPercentile;
  double epsilon = 0.0;     // kEpsilon
  double percentile = 1.0;  // kPercentile
  std::size_t k = 0;        // kKSmallest
  bool adjacent_only = false;
  bool both_orientations = false;  // only meaningful with adjacent_only

  void Validate() const;
};

MatchedPairSet BuildMatchedPairs(std::span<const RankedSlate> slates,
                                 std::string_view group,
                                 const MatchingConfig& config);

namespace internal {

// Calls fn(g_index, not_g_index, gap) for every eligible pair of one slate
// with gap <= max_gap. Indices are 0-based slate positions.
template <typename Fn>
void ForEachEligiblePair(const RankedSlate& slate, std::string_view group,
                         double max_gap, Fn&& fn) {
  const auto items = slate.items();
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!items[i].InGroup(group)) continue;
    const double s_g = items[i].score;
    // Items ranked above have scores >= s_g, so the gap grows going up.
    for (std::size_t j = i; j-- > 0;) {
      const double gap = items[j].score - s_g;
      if (gap > max_gap) break;
      if (!items[j].InGroup(group)) fn(i, j, gap);
    }
    // Exact ties ranked below (larger id).
    for (std::size_t j = i + 1; j < n && items[j].score == s_g; ++j) {
      if (!items[j].InGroup(group)) fn(i, j, 0.0);
    }
  }
}

MatchedPair MakePair(const RankedSlate& slate, std::size_t g_index,
                     std::size_t not_g_index);

}  // namespace internal

}  // namespace mpc

#endif  // MPC_MATCHING_H_
