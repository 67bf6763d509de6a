#include "mpc/ingest.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "support/test_util.h"

namespace mpc {
namespace {

using testing::CodeOf;

constexpr const char* kRatingsHeader = "userId,movieId,rating,timestamp\n";

std::vector<RatingRecord> Ratings(const std::string& body) {
  std::istringstream in(std::string(kRatingsHeader) + body);
  return ParseRatings(in, "ratings.csv");
}

std::vector<MovieRecord> Movies(const std::string& body) {
  std::istringstream in("movieId,title,genres\n" + body);
  return ParseMovies(in, "movies.csv");
}

TEST(ParseRatings, ParsesRow) {
  const auto r = Ratings("1,296,5.0,1147880044\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (RatingRecord{"1", "296", 5.0, 1147880044}));
}

TEST(ParseRatings, RejectsOffGridRating) {
  try {
    Ratings("1,296,5.0,1\n1,297,4.7,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("ratings.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(CodeOf([] { Ratings("1,2,0.0,1\n"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { Ratings("1,2,5.5,1\n"); }), ErrorCode::kParse);
}

TEST(ParseRatings, RejectsBadTimestampAndHeader) {
  EXPECT_EQ(CodeOf([] { Ratings("1,2,3.0,12.5\n"); }), ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] { Ratings("1,2,3.0\n"); }), ErrorCode::kParse);
  std::istringstream bad("user,movie,rating,time\n");
  EXPECT_EQ(CodeOf([&] { ParseRatings(bad, "x"); }), ErrorCode::kParse);
  std::istringstream empty("");
  EXPECT_EQ(CodeOf([&] { ParseRatings(empty, "x"); }), ErrorCode::kParse);
}

TEST(ParseRatings, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(Ratings("").empty());
}

TEST(ParseRatings, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { ParseRatings(std::filesystem::path("/nonexistent/r.csv")); }),
            ErrorCode::kIo);
}

TEST(IsHalfStarRating, Domain) {
  EXPECT_TRUE(IsHalfStarRating(0.5));
  EXPECT_TRUE(IsHalfStarRating(3.5));
  EXPECT_TRUE(IsHalfStarRating(5.0));
  EXPECT_FALSE(IsHalfStarRating(0.0));
  EXPECT_FALSE(IsHalfStarRating(4.7));
  EXPECT_FALSE(IsHalfStarRating(5.5));
}

TEST(ParseMovies, SplitsGenres) {
  const auto m = Movies("1,Toy Story (1995),Adventure|Animation\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].title, "Toy Story (1995)");
  EXPECT_EQ(m[0].genres, (std::vector<std::string>{"Adventure", "Animation"}));
}

TEST(ParseMovies, QuotedComma) {
  const auto m = Movies("x,\"A, B (2000)\",Drama\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].movie, "x");
  EXPECT_EQ(m[0].title, "A, B (2000)");
}

TEST(ParseMovies, NoGenresSentinel) {
  EXPECT_TRUE(Movies("7,Untitled,(no genres listed)\n")[0].genres.empty());
}

TEST(ParseMovies, MalformedQuoting) {
  try {
    Movies("1,ok,Drama\n2,\"broken,Drama\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("movies.csv:3"), std::string::npos) << e.what();
  }
}

TEST(RoundTrip, RatingsAndMovies) {
  const auto ratings = Ratings("1,296,5.0,1147880044\n2,1,0.5,3\n1,2,3.5,9\n");
  std::ostringstream out;
  WriteRatings(out, ratings);
  std::istringstream back(out.str());
  EXPECT_EQ(ParseRatings(back, "rt"), ratings);

  const auto movies = Movies(
      "1,Toy Story (1995),Adventure|Animation\n2,\"A, B \"\"C\"\" (2000)\",Drama\n"
      "3,None,(no genres listed)\n");
  EXPECT_EQ(movies[1].title, "A, B \"C\" (2000)");
  std::ostringstream mout;
  WriteMovies(mout, movies);
  std::istringstream mback(mout.str());
  EXPECT_EQ(ParseMovies(mback, "rt"), movies);
}

TEST(TemporalSplit, CountsAndFilter) {
  std::vector<RatingRecord> ratings;
  for (int i = 0; i < 8; ++i) ratings.push_back({"u" + std::to_string(i % 3), "m" + std::to_string(i % 4), 3.0, i});
  ratings.push_back({"u0", "m1", 4.0, 100});
  ratings.push_back({"stranger", "m1", 4.0, 101});
  const TemporalSplitResult split = TemporalSplit(ratings, 0.8);
  EXPECT_EQ(split.train.size(), 8u);
  EXPECT_EQ(split.eval.size(), 1u);
  EXPECT_EQ(split.dropped_eval, 1u);
  EXPECT_EQ(split.eval[0].user, "u0");
}

TEST(TemporalSplit, TiesAreDeterministic) {
  std::vector<RatingRecord> ratings = {{"b", "m", 3, 5}, {"a", "n", 3, 5}, {"a", "m", 3, 5},
                                       {"b", "n", 3, 5}, {"a", "m", 4, 6}};
  const TemporalSplitResult first = TemporalSplit(ratings, 0.6);
  std::reverse(ratings.begin(), ratings.end());
  const TemporalSplitResult second = TemporalSplit(ratings, 0.6);
  EXPECT_EQ(first.train, second.train);
  EXPECT_EQ(first.eval, second.eval);
  // (timestamp, user, movie) order: (5,a,m) (5,a,n) (5,b,m) | (5,b,n) (6,a,m)
  EXPECT_EQ(first.train[2], (RatingRecord{"b", "m", 3, 5}));
}

TEST(TemporalSplit, Errors) {
  const std::vector<RatingRecord> ratings = {{"a", "m", 3, 1}, {"b", "n", 3, 2}};
  EXPECT_EQ(CodeOf([&] { TemporalSplit(ratings, 0.0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([&] { TemporalSplit(ratings, 1.0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([&] { TemporalSplit(ratings, 0.5); }), ErrorCode::kInvalidInput);
}

TEST(BuildEvalSlates, OneSlatePerUser) {
  const std::vector<RatingRecord> eval = {{"u2", "m1", 4, 1}, {"u1", "m2", 2, 1},
                                          {"u1", "m1", 5, 2}, {"u1", "m2", 3, 9}};
  const auto movies = IndexMovies(Movies("m1,One,Drama|Comedy\nm2,Two,(no genres listed)\n"));
  const auto score = [](const std::string& user, const std::string& movie) {
    return movie == "m2" ? 0.9 : (user == "u1" ? 0.5 : 0.1);
  };
  const std::vector<RankedSlate> slates = BuildEvalSlates(eval, score, movies);
  ASSERT_EQ(slates.size(), 2u);
  EXPECT_EQ(slates[0].query_id(), "u1");
  ASSERT_EQ(slates[0].size(), 2u);
  EXPECT_EQ(slates[0].AtPosition(1).id, "m2");
  EXPECT_EQ(slates[0].AtPosition(1).outcome, 3.0);  // latest duplicate
  EXPECT_EQ(slates[0].AtPosition(2).groups, (std::vector<std::string>{"Comedy", "Drama"}));
  EXPECT_TRUE(slates[0].AtPosition(1).groups.empty());
  EXPECT_EQ(slates[1].size(), 1u);
}

TEST(BuildEvalSlates, UnseenEntityPropagates) {
  const std::vector<RatingRecord> eval = {{"u", "m", 4, 1}};
  const auto scorer = [](const std::string&, const std::string&) -> double {
    throw Error(ErrorCode::kUnseenEntity, "unseen");
  };
  EXPECT_EQ(CodeOf([&] { BuildEvalSlates(eval, scorer, {}); }), ErrorCode::kUnseenEntity);
}

TEST(SlateFile, RoundTrip) {
  std::vector<RankedSlate> slates = {
      testing::Slate("q1", {{"a", 0.1 + 0.2, 1, {"x", "y"}}, {"b", 1.0 / 3.0, 0, {}}}),
      testing::Slate("q2", {{"c", -2.5e-7, 4.5, {"x"}}})};
  std::stringstream buf;
  WriteSlates(buf, slates);
  const std::vector<RankedSlate> back = ReadSlates(buf, "slates");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t q = 0; q < 2; ++q) {
    EXPECT_EQ(back[q].query_id(), slates[q].query_id());
    ASSERT_EQ(back[q].size(), slates[q].size());
    for (std::size_t j = 0; j < back[q].size(); ++j) {
      EXPECT_EQ(back[q].items()[j].id, slates[q].items()[j].id);
      EXPECT_EQ(back[q].items()[j].score, slates[q].items()[j].score);
      EXPECT_EQ(back[q].items()[j].outcome, slates[q].items()[j].outcome);
      EXPECT_EQ(back[q].items()[j].groups, slates[q].items()[j].groups);
    }
  }
}

TEST(SlateFile, MalformedLine) {
  std::istringstream in("{\"query_id\":\"q\",\"items\":[]}\n{not json\n");
  try {
    ReadSlates(in, "s.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("s.jsonl:2"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace mpc
