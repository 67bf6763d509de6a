#include "mpc/theory_oracle.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "mpc/error.h"

namespace mpc {

namespace {

void RequireNonnegative(const ScoreModifier& modifier) {
  if (!(modifier.alpha >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "oracle requires alpha >= 0");
  }
}

// target[i] is the 0-based rank of slate item i under the modified scores.
std::vector<std::size_t> TargetRanks(const RankedSlate& slate,
                                     const ScoreModifier& modifier) {
  const std::vector<Item> modified = ApplyModifier(slate.items(), modifier);
  std::vector<std::size_t> order(modified.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return RanksAbove(modified[a], modified[b]);
                   });
  std::vector<std::size_t> target(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) target[order[r]] = r;
  return target;
}

bool GapWithin(double gap, double alpha, double scale) {
  const double slack = 1e-12 * std::max(1.0, scale);
  return gap >= -slack && gap <= alpha + slack;
}

}  // namespace

std::size_t CountMisranked(const RankedSlate& slate,
                           const ScoreModifier& modifier) {
  RequireNonnegative(modifier);
  const auto items = slate.items();
  const std::vector<std::size_t> target = TargetRanks(slate, modifier);
  std::size_t count = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      const bool gi = items[i].InGroup(modifier.group);
      const bool gj = items[j].InGroup(modifier.group);
      if (gi != gj && target[i] > target[j]) ++count;
    }
  }
  return count;
}

double SwapTrace::TotalContribution() const {
  double total = 0.0;
  for (const Swap& swap : swaps) total += swap.contribution;
  return total;
}

SwapTrace SwapDecomposition(const RankedSlate& slate,
                            const ScoreModifier& modifier,
                            const PositionWeights& weights,
                            std::size_t max_items) {
  RequireNonnegative(modifier);
  const std::size_t n = slate.size();
  if (n > max_items) {
    throw Error(ErrorCode::kInvalidInput,
                "oracle slate has " + std::to_string(n) + " items, limit " +
                    std::to_string(max_items));
  }
  if (weights.size() < n) {
    throw Error(ErrorCode::kDimension, "position weights shorter than slate");
  }
  const auto items = slate.items();
  const std::vector<std::size_t> target = TargetRanks(slate, modifier);
  const std::size_t expected = CountMisranked(slate, modifier);

  // current[p] = slate index of the item now at 0-based position p.
  std::vector<std::size_t> current(n);
  std::iota(current.begin(), current.end(), std::size_t{0});
  auto in_group = [&](std::size_t idx) {
    return items[idx].InGroup(modifier.group);
  };
  auto violation = [](const std::string& what) {
    return Error(ErrorCode::kInvariantViolation, what);
  };

  SwapTrace trace;
  for (std::size_t start = 0; start < n; ++start) {
    const std::size_t idx = start;
    if (!in_group(idx)) continue;
    std::size_t p = static_cast<std::size_t>(
        std::find(current.begin(), current.end(), idx) - current.begin());
    std::size_t moved = 0;
    while (p > 0 && !in_group(current[p - 1]) && target[current[p - 1]] > target[idx]) {
      const Item& g = items[idx];
      const Item& other = items[current[p - 1]];
      Swap swap;
      swap.g_id = g.id;
      swap.not_g_id = other.id;
      swap.g_position = p + 1;
      swap.not_g_position = p;
      swap.w_plus = weights.AtPosition(p);
      swap.w_minus = weights.AtPosition(p + 1);
      swap.outcome_diff = g.outcome - other.outcome;
      swap.contribution = (swap.w_plus - swap.w_minus) * swap.outcome_diff;
      swap.score_gap = other.score - g.score;
      if (!GapWithin(swap.score_gap, modifier.alpha,
                     std::max(std::abs(g.score), std::abs(other.score)))) {
        throw violation("swapped pair gap outside [0, alpha]");
      }
      if (!(swap.w_plus > swap.w_minus)) {
        throw violation("swap does not move an item to a heavier position");
      }
      trace.swaps.push_back(std::move(swap));
      std::swap(current[p - 1], current[p]);
      --p;
      ++moved;
    }
    trace.per_item_counts.push_back(moved);
    trace.prefix_counts.push_back(
        (trace.prefix_counts.empty() ? 0 : trace.prefix_counts.back()) + moved);
  }

  if (trace.total() != expected) {
    throw violation("swap count " + std::to_string(trace.total()) +
                    " differs from misranked count " + std::to_string(expected));
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (target[current[p]] != p) {
      throw violation("swap sequence does not reach the modified ranking");
    }
  }
  return trace;
}

std::vector<double> DecomposeByPosition(const RankedSlate& slate,
                                        const ScoreModifier& modifier,
                                        const PositionWeights& weights) {
  if (weights.size() < slate.size()) {
    throw Error(ErrorCode::kDimension, "position weights shorter than slate");
  }
  const RankedSlate modified = ModifyAndRerank(slate, modifier);
  std::vector<double> out(slate.size(), 0.0);
  for (std::size_t j = 1; j <= slate.size(); ++j) {
    const double before = slate.AtPosition(j).outcome;
    const double after = modified.AtPosition(j).outcome;
    if (slate.AtPosition(j).id != modified.AtPosition(j).id || before != after) {
      out[j - 1] = weights.AtPosition(j) * (after - before);
    }
  }
  return out;
}

}  // namespace mpc
