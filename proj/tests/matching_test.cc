#include "mpc/matching.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include "support/test_util.h"

namespace mpc {
namespace {

using testing::CodeOf;
using testing::Slate;

using PairKey = std::tuple<std::string, std::string, std::string>;

std::multiset<PairKey> Keys(const MatchedPairSet& set) {
  std::multiset<PairKey> keys;
  for (const MatchedPair& p : set.pairs) keys.insert({p.query_id, p.g.id, p.not_g.id});
  return keys;
}

// Exhaustive O(n^2) enumeration of the directional predicate.
std::multiset<PairKey> BruteForce(std::span<const RankedSlate> slates,
                                  const std::string& group, double epsilon) {
  std::multiset<PairKey> keys;
  for (const RankedSlate& slate : slates) {
    for (const Item& a : slate.items()) {
      for (const Item& b : slate.items()) {
        if (!a.InGroup(group) || b.InGroup(group)) continue;
        const double gap = b.score - a.score;
        if (gap >= 0.0 && gap <= epsilon) keys.insert({slate.query_id(), a.id, b.id});
      }
    }
  }
  return keys;
}

RankedSlate ThreeItemSlate() {
  return Slate("q", {{"i", 0.75, 1, {}}, {"i1", 0.74, 0, {}}, {"i2", 0.73, 1, {"g"}}});
}

TEST(BuildPairsEpsilon, OverlappingPairsKept) {
  const MatchedPairSet set = BuildPairsEpsilon(ThreeItemSlate(), "g", 0.05);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.pairs[0].not_g.id, "i1");
  EXPECT_EQ(set.pairs[1].not_g.id, "i");
  EXPECT_NEAR(set.pairs[0].score_gap, 0.01, 1e-12);
  EXPECT_NEAR(set.pairs[1].score_gap, 0.02, 1e-12);
  EXPECT_EQ(set.pairs[0].g.id, "i2");
  EXPECT_EQ(set.pairs[0].g.position, 3u);
  EXPECT_EQ(set.pairs[0].not_g.position, 2u);
  EXPECT_TRUE(set.pairs[0].adjacent);
  EXPECT_FALSE(set.pairs[1].adjacent);
  EXPECT_EQ(set.variant, PairVariant::kEpsilon);
}

TEST(BuildPairsEpsilon, ZeroEpsilonWithoutTiesIsEmpty) {
  EXPECT_TRUE(BuildPairsEpsilon(ThreeItemSlate(), "g", 0.0).empty());
}

TEST(BuildPairsEpsilon, ZeroEpsilonKeepsExactTies) {
  const RankedSlate slate = Slate("q", {{"a", 0.5, 1, {"g"}}, {"b", 0.5, 0, {}}});
  EXPECT_EQ(BuildPairsEpsilon(slate, "g", 0.0).size(), 1u);
}

TEST(BuildPairsEpsilon, NoGroupItems) {
  EXPECT_TRUE(BuildPairsEpsilon(ThreeItemSlate(), "absent", 1.0).empty());
}

TEST(BuildPairsEpsilon, NegativeEpsilonRejected) {
  EXPECT_EQ(CodeOf([] { BuildPairsEpsilon(ThreeItemSlate(), "g", -0.1); }),
            ErrorCode::kInvalidInput);
}

TEST(BuildPairsEpsilon, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> eps(0.0, 0.4);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<RankedSlate> slates;
    for (int q = 0; q < 3; ++q) {
      slates.push_back(testing::RandomSlate(rng, 10, "q" + std::to_string(q)));
    }
    const double e = eps(rng);
    const MatchedPairSet set = BuildPairsEpsilon(slates, "g", e);
    EXPECT_EQ(Keys(set), BruteForce(slates, "g", e));
    EXPECT_TRUE(std::is_sorted(set.pairs.begin(), set.pairs.end(), PairOrder));
    for (const MatchedPair& p : set.pairs) {
      EXPECT_GE(p.score_gap, 0.0);
      EXPECT_LE(p.score_gap, e);
    }
  }
}

TEST(BuildPairsEpsilon, MonotoneInEpsilon) {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 200; ++rep) {
    const RankedSlate slate = testing::RandomSlate(rng, 10);
    const auto small = Keys(BuildPairsEpsilon(slate, "g", 0.1));
    const auto large = Keys(BuildPairsEpsilon(slate, "g", 0.25));
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST(NearestRankPercentile, KnownMultiset) {
  std::vector<double> gaps;
  for (int i = 1; i <= 100; ++i) gaps.push_back(i / 100.0);
  EXPECT_DOUBLE_EQ(NearestRankPercentile(gaps, 1.0), 0.01);
  EXPECT_DOUBLE_EQ(NearestRankPercentile(gaps, 7.0), 0.07);
  EXPECT_DOUBLE_EQ(NearestRankPercentile(gaps, 50.0), 0.50);
  EXPECT_DOUBLE_EQ(NearestRankPercentile(gaps, 100.0), 1.00);
  EXPECT_DOUBLE_EQ(NearestRankPercentile({0.3}, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(NearestRankPercentile({0.3}, 100.0), 0.3);
  EXPECT_EQ(CodeOf([] { NearestRankPercentile({0.3}, 0.0); }), ErrorCode::kInvalidInput);
}

TEST(EpsilonFromPercentile, PooledGaps) {
  // Gaps 0.01 and 0.02 in one slate, 0.2 in another.
  const std::vector<RankedSlate> slates = {
      ThreeItemSlate(), Slate("r", {{"a", 0.6, 0, {}}, {"b", 0.4, 1, {"g"}}})};
  EXPECT_NEAR(EpsilonFromPercentile(slates, "g", 1.0), 0.01, 1e-12);
  EXPECT_NEAR(EpsilonFromPercentile(slates, "g", 100.0), 0.2, 1e-12);
  EXPECT_EQ(EligibleGaps(slates, "g").size(), 3u);
}

TEST(EpsilonFromPercentile, EmptyDistribution) {
  const std::vector<RankedSlate> slates = {
      Slate("q", {{"a", 0.9, 1, {"g"}}, {"b", 0.1, 0, {}}})};
  EXPECT_EQ(CodeOf([&] { EpsilonFromPercentile(slates, "g"); }),
            ErrorCode::kEmptyDistribution);
}

std::vector<RankedSlate> KSlates() {
  // Gaps 0.01, 0.02, 0.03 in three separate queries.
  return {Slate("q1", {{"a", 0.51, 0, {}}, {"b", 0.50, 1, {"g"}}}),
          Slate("q2", {{"a", 0.52, 0, {}}, {"b", 0.50, 1, {"g"}}}),
          Slate("q3", {{"a", 0.53, 0, {}}, {"b", 0.50, 1, {"g"}}})};
}

TEST(BuildPairsKSmallest, TakesSmallest) {
  const MatchedPairSet two = BuildPairsKSmallest(KSlates(), "g", 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two.pairs[0].query_id, "q1");
  EXPECT_EQ(two.pairs[1].query_id, "q2");
  EXPECT_EQ(two.variant, PairVariant::kKSmallest);
  const MatchedPairSet one = BuildPairsKSmallest(KSlates(), "g", 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.pairs[0].query_id, "q1");
  EXPECT_EQ(BuildPairsKSmallest(KSlates(), "g", 10).size(), 3u);
  EXPECT_EQ(CodeOf([] { BuildPairsKSmallest(KSlates(), "g", 0); }),
            ErrorCode::kInvalidInput);
}

TEST(BuildPairsKSmallest, BoundaryTiesByQueryThenIds) {
  const std::vector<RankedSlate> slates = {
      Slate("q2", {{"a", 0.5, 0, {}}, {"b", 0.5, 1, {"g"}}}),
      Slate("q1", {{"c", 0.5, 0, {}}, {"d", 0.5, 1, {"g"}}, {"e", 0.5, 0, {}}})};
  const MatchedPairSet set = BuildPairsKSmallest(slates, "g", 2);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.pairs[0].query_id, "q1");
  EXPECT_EQ(set.pairs[0].not_g.id, "c");
  EXPECT_EQ(set.pairs[1].not_g.id, "e");
}

TEST(BuildPairsKSmallest, AllPairsEqualsMaxGapEpsilon) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<RankedSlate> slates;
    for (int q = 0; q < 3; ++q) slates.push_back(testing::RandomSlate(rng, 8, "q" + std::to_string(q)));
    const std::vector<double> gaps = EligibleGaps(slates, "g");
    if (gaps.empty()) continue;
    const double max_gap = *std::max_element(gaps.begin(), gaps.end());
    EXPECT_EQ(Keys(BuildPairsKSmallest(slates, "g", gaps.size())),
              Keys(BuildPairsEpsilon(slates, "g", max_gap)));
  }
}

RankedSlate AdjacencySlate() {
  // positions: 1 n1, 2 n2, 3 g1, 4 n3, 5 g2, 6 g3, 7 g4
  return Slate("q", {{"n1", 0.90, 0, {}},
                     {"n2", 0.80, 0, {}},
                     {"g1", 0.79, 1, {"g"}},
                     {"n3", 0.78, 0, {}},
                     {"g2", 0.70, 1, {"g"}},
                     {"g3", 0.60, 1, {"g"}},
                     {"g4", 0.50, 1, {"g"}}});
}

TEST(FilterAdjacent, KeepsOnlyAdjacent) {
  const RankedSlate slate = AdjacencySlate();
  const std::vector<RankedSlate> slates = {slate};
  const MatchedPairSet all = BuildPairsEpsilon(slates, "g", 0.5);
  const MatchedPairSet adjacent = FilterAdjacent(all, slates, false);
  EXPECT_EQ(adjacent.variant, PairVariant::kAdjacent);
  std::set<std::pair<std::string, std::string>> got;
  for (const MatchedPair& p : adjacent.pairs) {
    EXPECT_TRUE(p.adjacent);
    EXPECT_FALSE(p.g_ahead);
    got.insert({p.g.id, p.not_g.id});
  }
  // (g1, n2) at positions (3, 2) and (g2, n3) at (5, 4); (g4, n1) at (7, 1) dropped.
  EXPECT_EQ(got, (std::set<std::pair<std::string, std::string>>{{"g1", "n2"}, {"g2", "n3"}}));
}

TEST(FilterAdjacent, BothOrientations) {
  const std::vector<RankedSlate> slates = {AdjacencySlate()};
  const MatchedPairSet all = BuildPairsEpsilon(slates, "g", 0.05);
  // Directional: only (g1, n2); (g2, n3) has gap 0.08 > epsilon.
  EXPECT_EQ(FilterAdjacent(all, slates, false).size(), 1u);
  const MatchedPairSet both = FilterAdjacent(all, slates, true);
  ASSERT_EQ(both.size(), 2u);
  // g1 (position 3) ahead of n3 (position 4), gap 0.79 - 0.78.
  const MatchedPair& ahead = both.pairs.front();
  EXPECT_TRUE(ahead.g_ahead);
  EXPECT_EQ(ahead.g.id, "g1");
  EXPECT_EQ(ahead.not_g.id, "n3");
  EXPECT_NEAR(ahead.score_gap, -0.01, 1e-12);
}

TEST(PoolAcrossQueries, Union) {
  const std::vector<RankedSlate> a = {
      Slate("q1", {{"x", 0.5, 0, {}}, {"y", 0.49, 1, {"g"}}, {"z", 0.48, 0, {}}, {"w", 0.47, 1, {"g"}}})};
  const std::vector<RankedSlate> b = {
      Slate("q2", {{"x", 0.5, 0, {}}, {"y", 0.45, 1, {"g"}}, {"z", 0.44, 1, {"g"}}})};
  const MatchedPairSet sa = BuildPairsEpsilon(a, "g", 0.05);
  const MatchedPairSet sb = BuildPairsEpsilon(b, "g", 0.07);
  ASSERT_EQ(sa.size(), 3u);
  ASSERT_EQ(sb.size(), 2u);
  const std::vector<MatchedPairSet> sets = {sa, sb};
  const MatchedPairSet pooled = PoolAcrossQueries(sets);
  EXPECT_EQ(pooled.size(), 5u);
  EXPECT_TRUE(std::is_sorted(pooled.pairs.begin(), pooled.pairs.end(), PairOrder));
  EXPECT_DOUBLE_EQ(pooled.pairs.front().score_gap,
                   std::min(sa.pairs.front().score_gap, sb.pairs.front().score_gap));
  EXPECT_TRUE(PoolAcrossQueries({}).empty());
}

TEST(PoolAcrossQueries, MixedGroupsRejected) {
  MatchedPairSet a, b;
  a.group = "g";
  b.group = "h";
  const std::vector<MatchedPairSet> sets = {a, b};
  EXPECT_EQ(CodeOf([&] { PoolAcrossQueries(sets); }), ErrorCode::kConfiguration);
  b.group = "g";
  b.variant = PairVariant::kAdjacent;
  const std::vector<MatchedPairSet> mixed = {a, b};
  EXPECT_EQ(CodeOf([&] { PoolAcrossQueries(mixed); }), ErrorCode::kConfiguration);
}

TEST(BuildMatchedPairs, ConfigValidation) {
  const std::vector<RankedSlate> slates = {ThreeItemSlate()};
  MatchingConfig config;
  config.percentile = 0.0;
  EXPECT_EQ(CodeOf([&] { BuildMatchedPairs(slates, "g", config); }),
            ErrorCode::kConfiguration);
  config = {};
  config.both_orientations = true;
  EXPECT_EQ(CodeOf([&] { BuildMatchedPairs(slates, "g", config); }),
            ErrorCode::kConfiguration);
  config = {};
  config.percentile = 100.0;
  EXPECT_EQ(BuildMatchedPairs(slates, "g", config).size(), 2u);
}

}  // namespace
}  // namespace mpc
