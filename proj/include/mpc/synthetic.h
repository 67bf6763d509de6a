#ifndef MPC_SYNTHETIC_H_
#define MPC_SYNTHETIC_H_

// Synthetic confounded world with query types {u, v} and item types {1, 2}.
// A uniform signal is the ranking score; expected relevance bends it by a
// multiplicative bias b(query type, item type). With a suitable
// item-type mixture per query type, the signal is marginally calibrated for
// both item types while type 1 is undervalued within every query.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mpc/core.h"
#include "mpc/metrics.h"

namespace mpc {

enum class QueryType { kU, kV };

inline constexpr std::string_view kItemType1 = "type1";
inline constexpr std::string_view kItemType2 = "type2";

struct TypeMixture {
  double p1_given_u = 0.0;  // P(item type 1 | query type u)
  double p1_given_v = 0.0;  // P(item type 1 | query type v)
};

struct SyntheticWorld {
  double p_u = 0.5;
  double b_u1 = 1.5;
  double b_u2 = 1.1;
  double b_v1 = 0.9;
  double b_v2 = 0.7;
  // Solved for calibration consistency when absent.
  std::optional<TypeMixture> mixture;
  std::size_t slate_size = 10;
  std::uint64_t seed = 0;

  double Bias(QueryType query, int item_type) const;
  // Probabilities must lie in [0, 1] and biases in (0, 2); slates need an item.
  void Validate() const;
  // 0 < b_v2 < b_v1 < 1 < b_u2 < b_u1 < 2.
  bool HasConfoundedOrdering() const;
};

// b * s below 1/2, 1 - (2 - b)(1 - s) above; continuous with value b/2 at
// s = 1/2. Throws kInvalidInput for s outside [0, 1] or b outside (0, 2).
double ExpectedRelevance(double signal, double bias);

// Item-type mixture under which E[Y | item type, s] = s for both types.
// A type whose biases are both 1 is unconstrained; its canonical choice is
// P(type 1 | u) = 0.5. Throws kInfeasible when no mixture in [0, 1]^2 exists.
TypeMixture SolveTypeMixture(const SyntheticWorld& world);

struct SyntheticDataset {
  std::vector<RankedSlate> slates;
  // Latent confounder, kept apart from item groups: the auditor never sees it.
  std::vector<QueryType> query_types;
  TypeMixture mixture;
};

// Query q draws from the stream seeded by (world.seed, q), so datasets are
// reproducible and queries independent. Items carry the group "type1" or
// "type2", score = signal, outcome ~ Bernoulli(ExpectedRelevance).
SyntheticDataset Generate(const SyntheticWorld& world, std::size_t num_queries);

// Calibration of each item type restricted to one latent query type, over
// [0, 1]. Index [query][item type - 1] with query 0 = u, 1 = v.
std::array<std::array<CalibrationCurve, 2>, 2> ConditionalCalibration(
    const SyntheticDataset& data, std::size_t bins = 10);

}  // namespace mpc

#endif  // MPC_SYNTHETIC_H_
