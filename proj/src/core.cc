#include "mpc/core.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "mpc/error.h"

namespace mpc {

bool Item::InGroup(std::string_view group) const {
  return std::binary_search(groups.begin(), groups.end(), group);
}

Item MakeItem(std::string id, double score, double outcome,
              std::vector<std::string> groups) {
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  return Item{std::move(id), score, outcome, std::move(groups)};
}

bool RanksAbove(const Item& a, const Item& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

const Item& RankedSlate::AtPosition(std::size_t position) const {
  if (position == 0 || position > items_.size()) {
    throw Error(ErrorCode::kDimension,
                "position " + std::to_string(position) + " outside slate of " +
                    std::to_string(items_.size()) + " items");
  }
  return items_[position - 1];
}

RankedSlate RankByScore(std::string query_id, std::vector<Item> items) {
  for (const Item& item : items) {
    if (!std::isfinite(item.score)) {
      throw Error(ErrorCode::kInvalidInput,
                  "non-finite score for item '" + item.id + "'");
    }
    if (!std::isfinite(item.outcome)) {
      throw Error(ErrorCode::kInvalidInput,
                  "non-finite outcome for item '" + item.id + "'");
    }
  }
  std::stable_sort(items.begin(), items.end(), RanksAbove);
  return RankedSlate(std::move(query_id), std::move(items));
}

RankedSlate RankByScore(std::vector<Item> items) {
  return RankByScore(std::string(), std::move(items));
}

PositionWeights::PositionWeights(std::vector<double> weights)
    : weights_(std::move(weights)) {
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (!std::isfinite(weights_[j]) || weights_[j] <= 0.0) {
      throw Error(ErrorCode::kInvalidInput,
                  "position weights must be finite and positive");
    }
    if (j > 0 && !(weights_[j] < weights_[j - 1])) {
      throw Error(ErrorCode::kInvalidInput,
                  "position weights must be strictly decreasing");
    }
  }
}

PositionWeights PositionWeights::LogDiscount(std::size_t n) {
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    weights[j] = 1.0 / std::log2(static_cast<double>(j) + 2.0);
  }
  return PositionWeights(std::move(weights));
}

double PositionWeights::AtPosition(std::size_t position) const {
  if (position == 0 || position > weights_.size()) {
    throw Error(ErrorCode::kDimension,
                "no weight for position " + std::to_string(position));
  }
  return weights_[position - 1];
}

double ObjectiveValue(const RankedSlate& slate, const PositionWeights& weights) {
  if (weights.size() < slate.size()) {
    throw Error(ErrorCode::kDimension,
                "slate has " + std::to_string(slate.size()) +
                    " items but only " + std::to_string(weights.size()) +
                    " position weights");
  }
  double value = 0.0;
  const auto items = slate.items();
  for (std::size_t j = 0; j < items.size(); ++j) {
    value += weights.values()[j] * items[j].outcome;
  }
  return value;
}

std::vector<Item> ApplyModifier(std::span<const Item> items,
                                const ScoreModifier& modifier) {
  std::vector<Item> out(items.begin(), items.end());
  if (modifier.alpha == 0.0) return out;
  for (Item& item : out) {
    if (item.InGroup(modifier.group)) item.score += modifier.alpha;
  }
  return out;
}

RankedSlate ModifyAndRerank(const RankedSlate& slate,
                            const ScoreModifier& modifier) {
  return RankByScore(slate.query_id(), ApplyModifier(slate.items(), modifier));
}

double DeltaAlpha(const RankedSlate& slate, const ScoreModifier& modifier,
                  const PositionWeights& weights) {
  const double before = ObjectiveValue(slate, weights);
  const double after = ObjectiveValue(ModifyAndRerank(slate, modifier), weights);
  return after - before;
}

std::vector<std::string> CollectGroups(std::span<const RankedSlate> slates) {
  std::set<std::string> groups;
  for (const RankedSlate& slate : slates) {
    for (const Item& item : slate.items()) {
      groups.insert(item.groups.begin(), item.groups.end());
    }
  }
  return {groups.begin(), groups.end()};
}

}  // namespace mpc
