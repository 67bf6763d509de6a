#include "mpc/matching.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "mpc/error.h"

namespace mpc {

std::string_view PairVariantName(PairVariant variant) {
  switch (variant) {
    case PairVariant::kEpsilon:
      return "epsilon";
    case PairVariant::kKSmallest:
      return "k_smallest";
    case PairVariant::kAdjacent:
      return "adjacent";
  }
  return "unknown";
}

std::size_t MatchedPair::HigherPosition() const {
  return std::min(g.position, not_g.position);
}

bool PairOrder(const MatchedPair& a, const MatchedPair& b) {
  return std::tie(a.score_gap, a.query_id, a.g.id, a.not_g.id) <
         std::tie(b.score_gap, b.query_id, b.g.id, b.not_g.id);
}

namespace internal {

MatchedPair MakePair(const RankedSlate& slate, std::size_t g_index,
                     std::size_t not_g_index) {
  const auto items = slate.items();
  const Item& g = items[g_index];
  const Item& not_g = items[not_g_index];
  MatchedPair pair;
  pair.query_id = slate.query_id();
  pair.g = PairMember{g.id, g.score, g.outcome, g_index + 1};
  pair.not_g = PairMember{not_g.id, not_g.score, not_g.outcome, not_g_index + 1};
  pair.score_gap = not_g.score - g.score;
  pair.adjacent = (g_index > not_g_index ? g_index - not_g_index
                                         : not_g_index - g_index) == 1;
  pair.g_ahead = g_index < not_g_index;
  return pair;
}

}  // namespace internal

namespace {

void CheckEpsilon(double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "epsilon must be nonnegative, got " + std::to_string(epsilon));
  }
}

void AppendPairs(const RankedSlate& slate, std::string_view group,
                 double epsilon, std::vector<MatchedPair>& out) {
  internal::ForEachEligiblePair(
      slate, group, epsilon, [&](std::size_t gi, std::size_t ni, double) {
        out.push_back(internal::MakePair(slate, gi, ni));
      });
}

}  // namespace

MatchedPairSet BuildPairsEpsilon(const RankedSlate& slate,
                                 std::string_view group, double epsilon) {
  return BuildPairsEpsilon(std::span<const RankedSlate>(&slate, 1), group,
                           epsilon);
}

MatchedPairSet BuildPairsEpsilon(std::span<const RankedSlate> slates,
                                 std::string_view group, double epsilon) {
  CheckEpsilon(epsilon);
  MatchedPairSet set;
  set.group = std::string(group);
  set.epsilon = epsilon;
  set.variant = PairVariant::kEpsilon;
  for (const RankedSlate& slate : slates) {
    AppendPairs(slate, group, epsilon, set.pairs);
  }
  std::sort(set.pairs.begin(), set.pairs.end(), PairOrder);
  return set;
}

std::vector<double> EligibleGaps(std::span<const RankedSlate> slates,
                                 std::string_view group) {
  std::vector<double> gaps;
  constexpr double kUnbounded = std::numeric_limits<double>::infinity();
  for (const RankedSlate& slate : slates) {
    internal::ForEachEligiblePair(
        slate, group, kUnbounded,
        [&](std::size_t, std::size_t, double gap) { gaps.push_back(gap); });
  }
  return gaps;
}

double NearestRankPercentile(std::vector<double> values, double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw Error(ErrorCode::kInvalidInput, "percentile must be in (0, 100]");
  }
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyDistribution,
                "percentile of an empty distribution");
  }
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

double EpsilonFromPercentile(std::span<const RankedSlate> slates,
                             std::string_view group, double percentile) {
  std::vector<double> gaps = EligibleGaps(slates, group);
  if (gaps.empty()) {
    throw Error(ErrorCode::kEmptyDistribution,
                "no eligible cross-group pairs for group '" +
                    std::string(group) + "'");
  }
  return NearestRankPercentile(std::move(gaps), percentile);
}

MatchedPairSet BuildPairsKSmallest(std::span<const RankedSlate> slates,
                                   std::string_view group, std::size_t k) {
  if (k == 0) {
    throw Error(ErrorCode::kInvalidInput, "k must be at least 1");
  }
  std::vector<double> gaps = EligibleGaps(slates, group);
  MatchedPairSet set;
  set.group = std::string(group);
  set.variant = PairVariant::kKSmallest;
  if (gaps.empty()) return set;

  double threshold;
  if (k >= gaps.size()) {
    threshold = *std::max_element(gaps.begin(), gaps.end());
  } else {
    auto nth = gaps.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(gaps.begin(), nth, gaps.end());
    threshold = *nth;
  }
  for (const RankedSlate& slate : slates) {
    AppendPairs(slate, group, threshold, set.pairs);
  }
  std::sort(set.pairs.begin(), set.pairs.end(), PairOrder);
  if (set.pairs.size() > k) set.pairs.resize(k);
  set.epsilon = set.pairs.back().score_gap;
  return set;
}

MatchedPairSet FilterAdjacent(const MatchedPairSet& pairs,
                              std::span<const RankedSlate> slates,
                              bool include_both_orientations) {
  MatchedPairSet out;
  out.group = pairs.group;
  out.epsilon = pairs.epsilon;
  out.variant = PairVariant::kAdjacent;
  for (const MatchedPair& pair : pairs.pairs) {
    if (pair.adjacent && !pair.g_ahead) out.pairs.push_back(pair);
  }
  if (include_both_orientations) {
    for (const RankedSlate& slate : slates) {
      const auto items = slate.items();
      for (std::size_t j = 0; j + 1 < items.size(); ++j) {
        if (!items[j].InGroup(pairs.group) ||
            items[j + 1].InGroup(pairs.group)) {
          continue;
        }
        if (items[j].score - items[j + 1].score <= pairs.epsilon) {
          out.pairs.push_back(internal::MakePair(slate, j, j + 1));
        }
      }
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(), PairOrder);
  return out;
}

MatchedPairSet PoolAcrossQueries(std::span<const MatchedPairSet> sets) {
  MatchedPairSet out;
  if (sets.empty()) return out;
  out.group = sets.front().group;
  out.variant = sets.front().variant;
  for (const MatchedPairSet& set : sets) {
    if (set.group != out.group || set.variant != out.variant) {
      throw Error(ErrorCode::kConfiguration,
                  "cannot pool pair sets with different groups or variants");
    }
    out.epsilon = std::max(out.epsilon, set.epsilon);
    out.pairs.insert(out.pairs.end(), set.pairs.begin(), set.pairs.end());
  }
  std::sort(out.pairs.begin(), out.pairs.end(), PairOrder);
  return out;
}

void MatchingConfig::Validate() const {
  switch (threshold) {
    case Threshold::kEpsilon:
      CheckEpsilon(epsilon);
      break;
    case Threshold::kPercentile:
      if (!(percentile > 0.0 && percentile <= 100.0)) {
        throw Error(ErrorCode::kConfiguration,
                    "epsilon percentile must be in (0, 100]");
      }
      break;
    case Threshold::kKSmallest:
      if (k == 0) {
        throw Error(ErrorCode::kConfiguration, "k must be at least 1");
      }
      break;
  }
  if (both_orientations && !adjacent_only) {
    throw Error(ErrorCode::kConfiguration,
                "both orientations requires the adjacency constraint");
  }
}

MatchedPairSet BuildMatchedPairs(std::span<const RankedSlate> slates,
                                 std::string_view group,
                                 const MatchingConfig& config) {
  config.Validate();
  MatchedPairSet set;
  switch (config.threshold) {
    case MatchingConfig::Threshold::kEpsilon:
      set = BuildPairsEpsilon(slates, group, config.epsilon);
      break;
    case MatchingConfig::Threshold::kPercentile:
      set = BuildPairsEpsilon(
          slates, group, EpsilonFromPercentile(slates, group, config.percentile));
      break;
    case MatchingConfig::Threshold::kKSmallest:
      set = BuildPairsKSmallest(slates, group, config.k);
      break;
  }
  if (config.adjacent_only) {
    set = FilterAdjacent(set, slates, config.both_orientations);
  }
  return set;
}

}  // namespace mpc
