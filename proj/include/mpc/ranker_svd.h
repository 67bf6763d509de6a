#ifndef MPC_RANKER_SVD_H_
#define MPC_RANKER_SVD_H_

// Baseline recommender: truncated SVD of the mean-filled user x item rating
// matrix, scoring by inner products of the low-rank factors.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "mpc/ingest.h"

namespace mpc {

class RatingMatrix {
 public:
  // Users and items are indexed in ascending id order. Missing entries hold
  // the mean of the observed training ratings; a repeated (user, item) keeps
  // the rating with the latest timestamp (ties: the later record).
  static RatingMatrix Build(std::span<const RatingRecord> ratings);

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double fill_value() const { return fill_; }
  std::size_t observed() const { return observed_; }

 private:
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  Eigen::MatrixXd values_;
  double fill_ = 0.0;
  std::size_t observed_ = 0;
};

RatingMatrix BuildMatrix(std::span<const RatingRecord> ratings);

struct SvdOptions {
  std::size_t rank = 64;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;
  std::size_t max_iterations = 1000;
  std::size_t oversampling = 10;
};

struct TruncatedSvd {
  Eigen::MatrixXd u;         // m x k, orthonormal columns
  Eigen::VectorXd singular;  // k, descending
  Eigen::MatrixXd v;         // n x k, orthonormal columns
  std::size_t iterations = 0;
  bool converged = false;

  Eigen::MatrixXd Reconstruct() const;
};

// Rank-k SVD by randomized subspace iteration: power steps on an oversampled
// block until the leading k singular values change by at most
// tolerance * sigma_1, or max_iterations. Deterministic for a given seed.
// Throws kInvalidInput unless 1 <= k <= min(rows, cols).
TruncatedSvd ComputeTruncatedSvd(const Eigen::MatrixXd& matrix, std::size_t k,
                                 const SvdOptions& options);

class LowRankModel {
 public:
  LowRankModel() = default;
  LowRankModel(std::vector<std::string> user_ids,
               std::vector<std::string> item_ids, Eigen::MatrixXd user_factors,
               Eigen::MatrixXd item_factors);

  std::size_t rank() const { return static_cast<std::size_t>(user_factors_.cols()); }
  bool HasUser(const std::string& user) const;
  bool HasItem(const std::string& item) const;

  // Throws kUnseenEntity for a user or item absent from training.
  double Score(const std::string& user, const std::string& item) const;

  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  // Rows are users (left singular vectors).
  const Eigen::MatrixXd& user_factors() const { return user_factors_; }
  // Rows are items (right singular vectors scaled by singular values).
  const Eigen::MatrixXd& item_factors() const { return item_factors_; }

  Eigen::MatrixXd Reconstruct() const;

  // Text dump: an "mpc-svd-model 1" header and a dimension line followed by
  // one factor row per user and per item, values printed with 17 digits.
  void Save(std::ostream& out) const;
  static LowRankModel Load(std::istream& in);

 private:
  void Index();

  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::size_t> user_index_;
  std::unordered_map<std::string, std::size_t> item_index_;
  Eigen::MatrixXd user_factors_;
  Eigen::MatrixXd item_factors_;
};

LowRankModel FitSvd(const RatingMatrix& matrix, const SvdOptions& options);

}  // namespace mpc

#endif  // MPC_RANKER_SVD_H_
