#ifndef MPC_INGEST_H_
#define MPC_INGEST_H_

// MovieLens-format CSV ingestion, the temporal train/evaluation split,
// evaluation slate assembly and the JSON-lines slate file format.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpc/core.h"

namespace mpc {

struct RatingRecord {
  std::string user;
  std::string movie;
  double rating = 0.0;  // multiple of 0.5 in [0.5, 5]
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct MovieRecord {
  std::string movie;
  std::string title;
  std::vector<std::string> genres;  // empty for "(no genres listed)"

  friend bool operator==(const MovieRecord&, const MovieRecord&) = default;
};

inline constexpr std::string_view kNoGenres = "(no genres listed)";

// Splits one CSV line, honoring double quotes ("" escapes a quote).
// Throws kParse on malformed quoting.
std::vector<std::string> SplitCsvLine(std::string_view line,
                                      std::string_view source,
                                      std::size_t line_number);

// Header must be `userId,movieId,rating,timestamp`. Every malformed row is
// rejected with its line number (kParse); missing files raise kIo.
std::vector<RatingRecord> ParseRatings(const std::filesystem::path& path);
std::vector<RatingRecord> ParseRatings(std::istream& in,
                                       std::string_view source);
void WriteRatings(std::ostream& out, std::span<const RatingRecord> ratings);

// Header must be `movieId,title,genres`; genres are pipe separated.
std::vector<MovieRecord> ParseMovies(const std::filesystem::path& path);
std::vector<MovieRecord> ParseMovies(std::istream& in, std::string_view source);
void WriteMovies(std::ostream& out, std::span<const MovieRecord> movies);

bool IsHalfStarRating(double rating);

struct TemporalSplitResult {
  std::vector<RatingRecord> train;
  std::vector<RatingRecord> eval;
  std::size_t dropped_eval = 0;  // eval rows with an unseen user or movie
};

// Global split: records sorted by (timestamp, user, movie); the earliest
// floor(fraction * N) train, the rest evaluate after removing rows whose
// user or movie never appears in training.
TemporalSplitResult TemporalSplit(std::span<const RatingRecord> ratings,
                                  double train_fraction);

using PairScorer =
    std::function<double(const std::string& user, const std::string& movie)>;

// One slate per user (query id = user id, slates ordered by user id); item
// outcome is the rating, groups are the movie's genres. A repeated
// (user, movie) keeps the latest rating.
std::vector<RankedSlate> BuildEvalSlates(
    std::span<const RatingRecord> eval, const PairScorer& scorer,
    const std::map<std::string, MovieRecord>& movies);

std::map<std::string, MovieRecord> IndexMovies(
    std::span<const MovieRecord> movies);

// Slate file: one JSON object per line,
// {"query_id": ..., "items": [{"id", "score", "outcome", "groups"}...]}.
void WriteSlates(std::ostream& out, std::span<const RankedSlate> slates);
std::vector<RankedSlate> ReadSlates(std::istream& in, std::string_view source);
std::vector<RankedSlate> ReadSlates(const std::filesystem::path& path);

}  // namespace mpc

#endif  // MPC_INGEST_H_
