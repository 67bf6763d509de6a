#ifndef MPC_THEORY_ORACLE_H_
#define MPC_THEORY_ORACLE_H_

// Brute-force machinery for small slates: counting the cross-group pairs a
// nonnegative group boost reorders, and replaying the boost as a chain of
// adjacent swaps whose contributions sum to the objective change.

#include <cstddef>
#include <string>
#include <vector>

#include "mpc/core.h"

namespace mpc {

inline constexpr std::size_t kOracleMaxItems = 64;

// Number of (g, not g) pairs whose relative order differs between the scores
// and the modified scores. Throws kInvalidInput for a negative alpha.
std::size_t CountMisranked(const RankedSlate& slate,
                           const ScoreModifier& modifier);

struct Swap {
  std::string g_id;
  std::string not_g_id;
  // 1-based positions just before the swap; not_g_position = g_position - 1.
  std::size_t g_position = 0;
  std::size_t not_g_position = 0;
  double w_plus = 0.0;   // weight of the upper position
  double w_minus = 0.0;  // weight of the lower position
  double outcome_diff = 0.0;  // Y(g) - Y(not g)
  double contribution = 0.0;  // (w_plus - w_minus) * outcome_diff
  double score_gap = 0.0;     // s(not g) - s(g), in [0, alpha]
};

struct SwapTrace {
  std::vector<Swap> swaps;
  // Swaps made by each group item, in processing (descending rank) order,
  // and their running totals.
  std::vector<std::size_t> per_item_counts;
  std::vector<std::size_t> prefix_counts;

  std::size_t total() const { return swaps.size(); }
  double TotalContribution() const;
};

// Moves group items, top first, past every non-group item they overtake under
// the modified scores, one adjacent swap at a time. Throws kInvariantViolation
// if a swap is not a misranked pair or the end state is not the modified
// ranking; kInvalidInput for negative alpha or a slate over `max_items`;
// kDimension when the weights are too short.
SwapTrace SwapDecomposition(const RankedSlate& slate,
                            const ScoreModifier& modifier,
                            const PositionWeights& weights,
                            std::size_t max_items = kOracleMaxItems);

// w_j * (Y at j after the modifier - Y at j before), one entry per position.
std::vector<double> DecomposeByPosition(const RankedSlate& slate,
                                        const ScoreModifier& modifier,
                                        const PositionWeights& weights);

}  // namespace mpc

#endif  // MPC_THEORY_ORACLE_H_
