#include "mpc/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mpc/error.h"

namespace mpc {

namespace {

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }
bool IsBias(double b) { return b > 0.0 && b < 2.0; }

std::string Padded(char prefix, std::size_t value, int width) {
  std::string digits = std::to_string(value);
  if (digits.size() < static_cast<std::size_t>(width)) {
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  }
  return prefix + digits;
}

int DigitsFor(std::size_t n) {
  int digits = 1;
  for (std::size_t v = n > 0 ? n - 1 : 0; v >= 10; v /= 10) ++digits;
  return digits;
}

// P(query type u | item type) that makes the type calibrated, or nullopt
// when both biases are 1 (any value works).
std::optional<double> CalibratingPosterior(double b_u, double b_v, int type) {
  if (b_u == 1.0 && b_v == 1.0) return std::nullopt;
  if (b_u == b_v) {
    throw Error(ErrorCode::kInfeasible,
                "item type " + std::to_string(type) +
                    " has equal biases != 1 across query types");
  }
  const double posterior = (1.0 - b_v) / (b_u - b_v);
  if (!IsProbability(posterior)) {
    throw Error(ErrorCode::kInfeasible,
                "no query-type mixture calibrates item type " +
                    std::to_string(type));
  }
  return posterior;
}

}  // namespace

double SyntheticWorld::Bias(QueryType query, int item_type) const {
  if (query == QueryType::kU) return item_type == 1 ? b_u1 : b_u2;
  return item_type == 1 ? b_v1 : b_v2;
}

void SyntheticWorld::Validate() const {
  if (!IsProbability(p_u)) {
    throw Error(ErrorCode::kInvalidInput, "p_u must be a probability");
  }
  for (double b : {b_u1, b_u2, b_v1, b_v2}) {
    if (!IsBias(b)) {
      throw Error(ErrorCode::kInvalidInput, "biases must lie in (0, 2)");
    }
  }
  if (mixture && !(IsProbability(mixture->p1_given_u) &&
                   IsProbability(mixture->p1_given_v))) {
    throw Error(ErrorCode::kInvalidInput, "type mixture must be probabilities");
  }
  if (slate_size == 0) {
    throw Error(ErrorCode::kInvalidInput, "slate size must be at least 1");
  }
}

bool SyntheticWorld::HasConfoundedOrdering() const {
  return 0.0 < b_v2 && b_v2 < b_v1 && b_v1 < 1.0 && 1.0 < b_u2 &&
         b_u2 < b_u1 && b_u1 < 2.0;
}

double ExpectedRelevance(double signal, double bias) {
  if (!(signal >= 0.0 && signal <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "signal must lie in [0, 1]");
  }
  if (!IsBias(bias)) {
    throw Error(ErrorCode::kInvalidInput, "bias must lie in (0, 2)");
  }
  if (signal < 0.5) return bias * signal;
  return 1.0 - (2.0 - bias) * (1.0 - signal);
}

TypeMixture SolveTypeMixture(const SyntheticWorld& world) {
  world.Validate();
  const double pu = world.p_u;
  const double pv = 1.0 - pu;
  if (!(pu > 0.0 && pu < 1.0)) {
    throw Error(ErrorCode::kInfeasible,
                "both query types must occur to solve the mixture");
  }
  const std::optional<double> pi1 = CalibratingPosterior(world.b_u1, world.b_v1, 1);
  const std::optional<double> pi2 = CalibratingPosterior(world.b_u2, world.b_v2, 2);

  // Bayes with a = P(1 | u), c = P(1 | v):
  //   type 1: pu (1 - pi1) a - pi1 pv c = 0
  //   type 2: pu (1 - pi2) a - pi2 pv c = pu (1 - pi2) - pi2 pv
  constexpr double kCanonical = 0.5;
  double a = kCanonical;
  double c = kCanonical;
  auto infeasible = [] {
    return Error(ErrorCode::kInfeasible,
                 "no calibration-consistent item-type mixture exists");
  };
  if (pi1 && pi2) {
    const double rhs = pu * (1.0 - *pi2) - *pi2 * pv;
    const double det = pu * pv * (*pi1 - *pi2);
    if (det == 0.0) {
      if (std::abs(rhs) > 1e-15) throw infeasible();
    } else {
      a = *pi1 * pv * rhs / det;
      c = pu * (1.0 - *pi1) * rhs / det;
    }
  } else if (pi1) {
    if (*pi1 == 0.0) throw infeasible();
    c = pu * (1.0 - *pi1) * a / (*pi1 * pv);
  } else if (pi2) {
    if (*pi2 == 0.0) throw infeasible();
    c = 1.0 - pu * (1.0 - *pi2) * (1.0 - a) / (*pi2 * pv);
  }
  constexpr double kSlack = 1e-12;
  if (a < -kSlack || a > 1.0 + kSlack || c < -kSlack || c > 1.0 + kSlack) {
    throw infeasible();
  }
  return TypeMixture{std::clamp(a, 0.0, 1.0), std::clamp(c, 0.0, 1.0)};
}

SyntheticDataset Generate(const SyntheticWorld& world,
                          std::size_t num_queries) {
  world.Validate();
  if (num_queries == 0) {
    throw Error(ErrorCode::kInvalidInput, "need at least one query");
  }
  SyntheticDataset data;
  data.mixture = world.mixture ? *world.mixture : SolveTypeMixture(world);
  data.slates.reserve(num_queries);
  data.query_types.reserve(num_queries);

  const int query_digits = DigitsFor(num_queries);
  const int item_digits = DigitsFor(world.slate_size);
  std::vector<std::string> item_ids;
  for (std::size_t j = 0; j < world.slate_size; ++j) {
    item_ids.push_back(Padded('i', j, item_digits));
  }
  const std::vector<std::string> type1{std::string(kItemType1)};
  const std::vector<std::string> type2{std::string(kItemType2)};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t q = 0; q < num_queries; ++q) {
    std::seed_seq seq{static_cast<std::uint32_t>(world.seed),
                      static_cast<std::uint32_t>(world.seed >> 32),
                      static_cast<std::uint32_t>(q),
                      static_cast<std::uint32_t>(std::uint64_t{q} >> 32)};
    std::mt19937_64 engine(seq);
    const QueryType query = unit(engine) < world.p_u ? QueryType::kU : QueryType::kV;
    const double p1 = query == QueryType::kU ? data.mixture.p1_given_u
                                             : data.mixture.p1_given_v;
    std::vector<Item> items;
    items.reserve(world.slate_size);
    for (std::size_t j = 0; j < world.slate_size; ++j) {
      const int item_type = unit(engine) < p1 ? 1 : 2;
      const double signal = unit(engine);
      const double relevance =
          ExpectedRelevance(signal, world.Bias(query, item_type));
      const double outcome = unit(engine) < relevance ? 1.0 : 0.0;
      items.push_back(
          Item{item_ids[j], signal, outcome, item_type == 1 ? type1 : type2});
    }
    data.slates.push_back(
        RankByScore(Padded('q', q, query_digits), std::move(items)));
    data.query_types.push_back(query);
  }
  return data;
}

std::array<std::array<CalibrationCurve, 2>, 2> ConditionalCalibration(
    const SyntheticDataset& data, std::size_t bins) {
  std::array<std::vector<Item>, 2> by_query;
  for (std::size_t q = 0; q < data.slates.size(); ++q) {
    auto& bucket = by_query[data.query_types[q] == QueryType::kU ? 0 : 1];
    const auto items = data.slates[q].items();
    bucket.insert(bucket.end(), items.begin(), items.end());
  }
  std::array<std::array<CalibrationCurve, 2>, 2> out;
  const char* query_names[] = {"u", "v"};
  for (int qi = 0; qi < 2; ++qi) {
    for (int t = 0; t < 2; ++t) {
      const std::string_view type = t == 0 ? kItemType1 : kItemType2;
      out[qi][t] = BinnedCalibration(
          by_query[qi], [&](const Item& item) { return item.InGroup(type); },
          std::string(query_names[qi]) + "/" + std::string(type), bins, 0.0,
          1.0);
    }
  }
  return out;
}

}  // namespace mpc
