#include "mpc/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "json.hpp"
#include "mpc/error.h"

namespace mpc {

namespace {

using nlohmann::json;

[[noreturn]] void ParseFail(std::string_view source, std::size_t line,
                            const std::string& what) {
  throw Error(ErrorCode::kParse, std::string(source) + ":" +
                                     std::to_string(line) + ": " + what);
}

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  return in;
}

bool NextLine(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

template <typename T>
bool ParseNumber(std::string_view text, T& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::string QuoteCsv(std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\n") != std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::string> SplitCsvLine(std::string_view line,
                                      std::string_view source,
                                      std::size_t line_number) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (true) {
    std::string field;
    if (i < line.size() && line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          field += line[i++];
        }
      }
      if (!closed) ParseFail(source, line_number, "unterminated quoted field");
      if (i < line.size() && line[i] != ',') {
        ParseFail(source, line_number, "unexpected text after quoted field");
      }
    } else {
      while (i < line.size() && line[i] != ',') {
        if (line[i] == '"') {
          ParseFail(source, line_number, "stray quote in unquoted field");
        }
        field += line[i++];
      }
    }
    fields.push_back(std::move(field));
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return fields;
}

bool IsHalfStarRating(double rating) {
  const double doubled = rating * 2.0;
  return std::isfinite(rating) && doubled == std::round(doubled) &&
         doubled >= 1.0 && doubled <= 10.0;
}

std::vector<RatingRecord> ParseRatings(const std::filesystem::path& path) {
  std::ifstream in = OpenInput(path);
  return ParseRatings(in, path.string());
}

std::vector<RatingRecord> ParseRatings(std::istream& in,
                                       std::string_view source) {
  std::string line;
  if (!NextLine(in, line) || line != "userId,movieId,rating,timestamp") {
    ParseFail(source, 1, "expected header 'userId,movieId,rating,timestamp'");
  }
  std::vector<RatingRecord> out;
  for (std::size_t n = 2; NextLine(in, line); ++n) {
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line, source, n);
    if (f.size() != 4) ParseFail(source, n, "expected 4 fields");
    RatingRecord r;
    r.user = f[0];
    r.movie = f[1];
    if (r.user.empty() || r.movie.empty()) ParseFail(source, n, "empty id");
    if (!ParseNumber(f[2], r.rating)) {
      ParseFail(source, n, "rating '" + f[2] + "' is not a number");
    }
    if (!IsHalfStarRating(r.rating)) {
      ParseFail(source, n,
                "rating '" + f[2] + "' is not a half-star value in [0.5, 5]");
    }
    if (!ParseNumber(f[3], r.timestamp)) {
      ParseFail(source, n, "timestamp '" + f[3] + "' is not an integer");
    }
    out.push_back(std::move(r));
  }
  return out;
}

void WriteRatings(std::ostream& out, std::span<const RatingRecord> ratings) {
  out << "userId,movieId,rating,timestamp\n";
  char buf[32];
  for (const RatingRecord& r : ratings) {
    std::snprintf(buf, sizeof(buf), "%.1f", r.rating);
    out << QuoteCsv(r.user) << ',' << QuoteCsv(r.movie) << ',' << buf << ','
        << r.timestamp << '\n';
  }
}

std::vector<MovieRecord> ParseMovies(const std::filesystem::path& path) {
  std::ifstream in = OpenInput(path);
  return ParseMovies(in, path.string());
}

std::vector<MovieRecord> ParseMovies(std::istream& in,
                                     std::string_view source) {
  std::string line;
  if (!NextLine(in, line) || line != "movieId,title,genres") {
    ParseFail(source, 1, "expected header 'movieId,title,genres'");
  }
  std::vector<MovieRecord> out;
  for (std::size_t n = 2; NextLine(in, line); ++n) {
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsvLine(line, source, n);
    if (f.size() != 3) ParseFail(source, n, "expected 3 fields");
    if (f[0].empty()) ParseFail(source, n, "empty movie id");
    MovieRecord m;
    m.movie = f[0];
    m.title = f[1];
    if (f[2] != kNoGenres && !f[2].empty()) {
      std::string_view rest = f[2];
      while (true) {
        const std::size_t bar = rest.find('|');
        std::string genre(rest.substr(0, bar));
        if (genre.empty()) ParseFail(source, n, "empty genre label");
        m.genres.push_back(std::move(genre));
        if (bar == std::string_view::npos) break;
        rest.remove_prefix(bar + 1);
      }
      std::sort(m.genres.begin(), m.genres.end());
      m.genres.erase(std::unique(m.genres.begin(), m.genres.end()),
                     m.genres.end());
    }
    out.push_back(std::move(m));
  }
  return out;
}

void WriteMovies(std::ostream& out, std::span<const MovieRecord> movies) {
  out << "movieId,title,genres\n";
  for (const MovieRecord& m : movies) {
    std::string genres;
    for (const std::string& g : m.genres) {
      if (!genres.empty()) genres += '|';
      genres += g;
    }
    if (genres.empty()) genres = kNoGenres;
    out << QuoteCsv(m.movie) << ',' << QuoteCsv(m.title) << ','
        << QuoteCsv(genres) << '\n';
  }
}

TemporalSplitResult TemporalSplit(std::span<const RatingRecord> ratings,
                                  double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "train fraction must be in (0, 1)");
  }
  std::vector<RatingRecord> sorted(ratings.begin(), ratings.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const RatingRecord& a, const RatingRecord& b) {
                     return std::tie(a.timestamp, a.user, a.movie) <
                            std::tie(b.timestamp, b.user, b.movie);
                   });
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(sorted.size())));

  TemporalSplitResult out;
  out.train.assign(sorted.begin(),
                   sorted.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::set<std::string> users, movies;
  for (const RatingRecord& r : out.train) {
    users.insert(r.user);
    movies.insert(r.movie);
  }
  for (std::size_t i = n_train; i < sorted.size(); ++i) {
    if (users.count(sorted[i].user) && movies.count(sorted[i].movie)) {
      out.eval.push_back(sorted[i]);
    } else {
      ++out.dropped_eval;
    }
  }
  if (out.train.empty()) {
    throw Error(ErrorCode::kInvalidInput, "temporal split left no training rows");
  }
  if (out.eval.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "temporal split left no evaluation rows with known users and "
                "movies");
  }
  return out;
}

std::map<std::string, MovieRecord> IndexMovies(
    std::span<const MovieRecord> movies) {
  std::map<std::string, MovieRecord> index;
  for (const MovieRecord& m : movies) index[m.movie] = m;
  return index;
}

std::vector<RankedSlate> BuildEvalSlates(
    std::span<const RatingRecord> eval, const PairScorer& scorer,
    const std::map<std::string, MovieRecord>& movies) {
  // user -> movie -> latest record
  std::map<std::string, std::map<std::string, const RatingRecord*>> latest;
  for (const RatingRecord& r : eval) {
    const RatingRecord*& slot = latest[r.user][r.movie];
    if (slot == nullptr || r.timestamp >= slot->timestamp) slot = &r;
  }
  std::vector<RankedSlate> slates;
  slates.reserve(latest.size());
  for (const auto& [user, by_movie] : latest) {
    std::vector<Item> items;
    items.reserve(by_movie.size());
    for (const auto& [movie, record] : by_movie) {
      std::vector<std::string> genres;
      if (auto it = movies.find(movie); it != movies.end()) {
        genres = it->second.genres;
      }
      items.push_back(MakeItem(movie, scorer(user, movie), record->rating,
                               std::move(genres)));
    }
    slates.push_back(RankByScore(user, std::move(items)));
  }
  return slates;
}

void WriteSlates(std::ostream& out, std::span<const RankedSlate> slates) {
  for (const RankedSlate& slate : slates) {
    json items = json::array();
    for (const Item& item : slate.items()) {
      items.push_back({{"id", item.id},
                       {"score", item.score},
                       {"outcome", item.outcome},
                       {"groups", item.groups}});
    }
    json line = {{"query_id", slate.query_id()}, {"items", std::move(items)}};
    out << line.dump() << '\n';
  }
}

std::vector<RankedSlate> ReadSlates(std::istream& in, std::string_view source) {
  std::vector<RankedSlate> slates;
  std::string line;
  for (std::size_t n = 1; NextLine(in, line); ++n) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      std::vector<Item> items;
      for (const json& ji : j.at("items")) {
        std::vector<std::string> groups;
        if (ji.contains("groups")) {
          groups = ji.at("groups").get<std::vector<std::string>>();
        }
        items.push_back(MakeItem(ji.at("id").get<std::string>(),
                                 ji.at("score").get<double>(),
                                 ji.at("outcome").get<double>(),
                                 std::move(groups)));
      }
      slates.push_back(
          RankByScore(j.at("query_id").get<std::string>(), std::move(items)));
    } catch (const json::exception& e) {
      ParseFail(source, n, e.what());
    } catch (const Error& e) {
      ParseFail(source, n, e.what());
    }
  }
  return slates;
}

std::vector<RankedSlate> ReadSlates(const std::filesystem::path& path) {
  std::ifstream in = OpenInput(path);
  return ReadSlates(in, path.string());
}

}  // namespace mpc
