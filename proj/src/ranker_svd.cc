#include "mpc/ranker_svd.h"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "mpc/error.h"

namespace mpc {

namespace {

constexpr const char* kModelMagic = "mpc-svd-model";
constexpr int kModelVersion = 1;

Eigen::MatrixXd Orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

RatingMatrix RatingMatrix::Build(std::span<const RatingRecord> ratings) {
  if (ratings.empty()) {
    throw Error(ErrorCode::kInvalidInput, "cannot build a matrix from no ratings");
  }
  std::map<std::pair<std::string, std::string>, const RatingRecord*> latest;
  for (const RatingRecord& r : ratings) {
    const RatingRecord*& slot = latest[{r.user, r.movie}];
    if (slot == nullptr || r.timestamp >= slot->timestamp) slot = &r;
  }

  RatingMatrix m;
  std::map<std::string, Eigen::Index> users, items;
  double sum = 0.0;
  for (const auto& [key, record] : latest) {
    users.emplace(key.first, 0);
    items.emplace(key.second, 0);
    sum += record->rating;
  }
  for (auto& [id, index] : users) {
    index = static_cast<Eigen::Index>(m.user_ids_.size());
    m.user_ids_.push_back(id);
  }
  for (auto& [id, index] : items) {
    index = static_cast<Eigen::Index>(m.item_ids_.size());
    m.item_ids_.push_back(id);
  }
  m.observed_ = latest.size();
  m.fill_ = sum / static_cast<double>(latest.size());
  m.values_ = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(users.size()),
                                        static_cast<Eigen::Index>(items.size()),
                                        m.fill_);
  for (const auto& [key, record] : latest) {
    m.values_(users.at(key.first), items.at(key.second)) = record->rating;
  }
  return m;
}

RatingMatrix BuildMatrix(std::span<const RatingRecord> ratings) {
  return RatingMatrix::Build(ratings);
}

Eigen::MatrixXd TruncatedSvd::Reconstruct() const {
  return u * singular.asDiagonal() * v.transpose();
}

TruncatedSvd ComputeTruncatedSvd(const Eigen::MatrixXd& matrix, std::size_t k,
                                 const SvdOptions& options) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  const auto cols = static_cast<std::size_t>(matrix.cols());
  const std::size_t full = std::min(rows, cols);
  if (k < 1 || k > full) {
    throw Error(ErrorCode::kInvalidInput,
                "rank " + std::to_string(k) + " outside [1, " +
                    std::to_string(full) + "]");
  }
  const auto width =
      static_cast<Eigen::Index>(std::min(k + options.oversampling, full));
  const auto kk = static_cast<Eigen::Index>(k);

  std::mt19937_64 engine(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd omega(matrix.cols(), width);
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(engine);
  }
  Eigen::MatrixXd q = Orthonormalize(matrix * omega);

  TruncatedSvd out;
  Eigen::VectorXd previous;
  Eigen::BDCSVD<Eigen::MatrixXd> small;
  for (std::size_t it = 1; it <= std::max<std::size_t>(options.max_iterations, 1);
       ++it) {
    const Eigen::MatrixXd qv = Orthonormalize(matrix.transpose() * q);
    q = Orthonormalize(matrix * qv);
    small.compute(q.transpose() * matrix,
                  Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sigma = small.singularValues().head(kk);
    out.iterations = it;
    if (previous.size() == kk) {
      const double change = (sigma - previous).cwiseAbs().maxCoeff();
      if (change <= options.tolerance * sigma(0)) {
        out.converged = true;
        break;
      }
    }
    previous = sigma;
  }
  out.u = q * small.matrixU().leftCols(kk);
  out.singular = small.singularValues().head(kk);
  out.v = small.matrixV().leftCols(kk);
  return out;
}

LowRankModel::LowRankModel(std::vector<std::string> user_ids,
                           std::vector<std::string> item_ids,
                           Eigen::MatrixXd user_factors,
                           Eigen::MatrixXd item_factors)
    : user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)),
      user_factors_(std::move(user_factors)),
      item_factors_(std::move(item_factors)) {
  if (static_cast<std::size_t>(user_factors_.rows()) != user_ids_.size() ||
      static_cast<std::size_t>(item_factors_.rows()) != item_ids_.size() ||
      user_factors_.cols() != item_factors_.cols()) {
    throw Error(ErrorCode::kDimension, "factor shapes do not match the id maps");
  }
  Index();
}

void LowRankModel::Index() {
  user_index_.clear();
  item_index_.clear();
  for (std::size_t i = 0; i < user_ids_.size(); ++i) user_index_[user_ids_[i]] = i;
  for (std::size_t i = 0; i < item_ids_.size(); ++i) item_index_[item_ids_[i]] = i;
}

bool LowRankModel::HasUser(const std::string& user) const {
  return user_index_.count(user) > 0;
}

bool LowRankModel::HasItem(const std::string& item) const {
  return item_index_.count(item) > 0;
}

double LowRankModel::Score(const std::string& user,
                           const std::string& item) const {
  auto u = user_index_.find(user);
  if (u == user_index_.end()) {
    throw Error(ErrorCode::kUnseenEntity, "user '" + user + "' not in training");
  }
  auto i = item_index_.find(item);
  if (i == item_index_.end()) {
    throw Error(ErrorCode::kUnseenEntity, "item '" + item + "' not in training");
  }
  return user_factors_.row(static_cast<Eigen::Index>(u->second))
      .dot(item_factors_.row(static_cast<Eigen::Index>(i->second)));
}

Eigen::MatrixXd LowRankModel::Reconstruct() const {
  return user_factors_ * item_factors_.transpose();
}

void LowRankModel::Save(std::ostream& out) const {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "users " << user_ids_.size() << " items " << item_ids_.size()
      << " rank " << rank() << '\n';
  char buf[40];
  auto write_rows = [&](char tag, const std::vector<std::string>& ids,
                        const Eigen::MatrixXd& factors) {
    for (std::size_t r = 0; r < ids.size(); ++r) {
      out << tag << ' ' << ids[r];
      for (Eigen::Index c = 0; c < factors.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), " %.17g",
                      factors(static_cast<Eigen::Index>(r), c));
        out << buf;
      }
      out << '\n';
    }
  };
  write_rows('U', user_ids_, user_factors_);
  write_rows('I', item_ids_, item_factors_);
}

LowRankModel LowRankModel::Load(std::istream& in) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kParse, "svd model: " + what);
  };
  std::string magic, word_users, word_items, word_rank;
  int version = 0;
  std::size_t n_users = 0, n_items = 0, rank = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) fail("bad header");
  if (version != kModelVersion) fail("unsupported version");
  if (!(in >> word_users >> n_users >> word_items >> n_items >> word_rank >>
        rank) ||
      word_users != "users" || word_items != "items" || word_rank != "rank") {
    fail("bad dimension line");
  }
  auto read_rows = [&](char tag, std::size_t n, std::vector<std::string>& ids,
                       Eigen::MatrixXd& factors) {
    factors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
    ids.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      std::string t;
      if (!(in >> t >> ids[r]) || t.size() != 1 || t[0] != tag) fail("bad row tag");
      for (std::size_t c = 0; c < rank; ++c) {
        if (!(in >> factors(static_cast<Eigen::Index>(r),
                            static_cast<Eigen::Index>(c)))) {
          fail("truncated factor row");
        }
      }
    }
  };
  std::vector<std::string> users, items;
  Eigen::MatrixXd uf, itf;
  read_rows('U', n_users, users, uf);
  read_rows('I', n_items, items, itf);
  return LowRankModel(std::move(users), std::move(items), std::move(uf),
                      std::move(itf));
}

LowRankModel FitSvd(const RatingMatrix& matrix, const SvdOptions& options) {
  const TruncatedSvd svd =
      ComputeTruncatedSvd(matrix.values(), options.rank, options);
  return LowRankModel(matrix.user_ids(), matrix.item_ids(), svd.u,
                      svd.v * svd.singular.asDiagonal());
}

}  // namespace mpc
