#ifndef MPC_CORE_H_
#define MPC_CORE_H_

// Items, ranked slates and position weights with the position-weighted ranking
// objective, plus the additive group score modifier used to probe it.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mpc {

struct Item {
  std::string id;
  double score = 0.0;
  double outcome = 0.0;
  // Sorted, duplicate free. Each label is audited as its own binary group.
  std::vector<std::string> groups;

  bool InGroup(std::string_view group) const;
};

// Builds an item with a normalized (sorted, unique) group list.
Item MakeItem(std::string id, double score, double outcome,
              std::vector<std::string> groups = {});

// Strict ranking order: higher score first, equal scores by ascending id.
bool RanksAbove(const Item& a, const Item& b);

// One query's items in ranked order. The item at index j sits at position
// j + 1, so positions are always exactly {1, ..., n}.
class RankedSlate {
 public:
  RankedSlate() = default;

  const std::string& query_id() const { return query_id_; }
  std::span<const Item> items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  // 1-based.
  const Item& AtPosition(std::size_t position) const;

 private:
  friend RankedSlate RankByScore(std::string query_id, std::vector<Item> items);

  RankedSlate(std::string query_id, std::vector<Item> items)
      : query_id_(std::move(query_id)), items_(std::move(items)) {}

  std::string query_id_;
  std::vector<Item> items_;
};

// Sorts by descending score, ties by ascending id (stable for duplicate ids).
// Throws kInvalidInput on a non-finite score or outcome.
RankedSlate RankByScore(std::string query_id, std::vector<Item> items);
RankedSlate RankByScore(std::vector<Item> items);

// Strictly decreasing, strictly positive weights w_1 > w_2 > ... > w_n.
class PositionWeights {
 public:
  explicit PositionWeights(std::vector<double> weights);

  // w_j = 1 / log2(j + 1), the NDCG discount.
  static PositionWeights LogDiscount(std::size_t n);

  std::span<const double> values() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  // Weight of 1-based position `position`.
  double AtPosition(std::size_t position) const;

 private:
  std::vector<double> weights_;
};

// Adds `alpha` to the score of every item carrying `group`. A negative alpha
// demotes the group.
struct ScoreModifier {
  std::string group;
  double alpha = 0.0;
};

// Sum over positions of w_j * outcome(item at j). Throws kDimension when the
// weights are shorter than the slate.
double ObjectiveValue(const RankedSlate& slate, const PositionWeights& weights);

std::vector<Item> ApplyModifier(std::span<const Item> items,
                                const ScoreModifier& modifier);

// Applies the modifier and re-ranks, keeping the query id.
RankedSlate ModifyAndRerank(const RankedSlate& slate,
                            const ScoreModifier& modifier);

// Change in the objective caused by the modifier:
// ObjectiveValue(modified ranking) - ObjectiveValue(slate).
double DeltaAlpha(const RankedSlate& slate, const ScoreModifier& modifier,
                  const PositionWeights& weights);

// Sorted union of all group labels present in the slates.
std::vector<std::string> CollectGroups(std::span<const RankedSlate> slates);

}  // namespace mpc

#endif  // MPC_CORE_H_
