#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"

#include "abusetrend/csv.hpp"
#include "abusetrend/date.hpp"
#include "abusetrend/errors.hpp"
#include "abusetrend/ingest.hpp"
#include "test_support.hpp"

using namespace abusetrend;

namespace {

DateRange days(const char* first, const char* last) { return {Date::parse(first), Date::parse(last)}; }

std::vector<std::string> strings(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("dates parse as UTC days") {
  CHECK(Date::parse("2019-01-01").iso() == "2019-01-01");
  CHECK(Date::parse("2020-02-29T23:59:59Z") == Date::from_ymd(2020, 2, 29));
  CHECK(Date::parse("2020-02-29 10:00:00") == Date::from_ymd(2020, 2, 29));
  CHECK(Date::parse("2020-03-01") - Date::parse("2020-02-28") == 2);
  CHECK_THROWS_AS(Date::parse("2019-02-29"), std::invalid_argument);
  CHECK_THROWS_AS(Date::parse("2019-13-01"), std::invalid_argument);
  CHECK_THROWS_AS(Date::parse("2019-01-01T05:00:00+02:00"), std::invalid_argument);
  CHECK_THROWS_AS(Date::parse("01/02/2019"), std::invalid_argument);
}

TEST_CASE("csv reader handles quoting and line numbers") {
  std::istringstream in("a,b\r\n\"x, y\",\"he said \"\"hi\"\"\"\n\n\"multi\nline\",2\n3,4\n");
  csv::Reader r(in);
  auto h = r.next();
  REQUIRE(h);
  CHECK(h->line == 1);
  auto r1 = r.next();
  REQUIRE(r1);
  CHECK(r1->fields == strings({"x, y", "he said \"hi\""}));
  auto r2 = r.next();
  REQUIRE(r2);
  CHECK(r2->line == 4);
  CHECK(r2->fields[0] == "multi\nline");
  auto r3 = r.next();
  REQUIRE(r3);
  CHECK(r3->line == 6);
  CHECK_FALSE(r.next());
}

TEST_CASE("csv number formatting round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(csv::parse_double(csv::format_double(v)).value() == v);
  }
  CHECK(csv::format_double(0.25) == "0.25");
  CHECK(csv::parse_integer(" 12 ").value() == 12);
  CHECK(csv::parse_integer("12.0").value() == 12);
  CHECK_FALSE(csv::parse_integer("12.5"));
  CHECK_FALSE(csv::parse_double("1.2x"));
}

TEST_CASE("three rows on one day give one sample of size 3") {
  testing::TempDir dir;
  testing::write_file(dir / "t.csv",
                      "id,date,p_off,p_hate\n1,2019-01-01,0.1,0.2\n2,2019-01-01,0.5,0.5\n"
                      "3,2019-01-01,0.9,0.0\n");
  const auto s = parse_scored_tweets(dir / "t.csv", days("2019-01-01", "2019-01-01"));
  REQUIRE(s.days.size() == 1);
  CHECK(s.days[0].tweets.size() == 3);
  CHECK(s.accepted == 3);
  CHECK(s.rejected_outside_window == 0);
}

TEST_CASE("probability above one is a parse error at its line") {
  testing::TempDir dir;
  testing::write_file(dir / "t.csv",
                      "id,date,p_off,p_hate\n1,2019-01-01,0.1,0.2\n2,2019-01-01,1.2,0.5\n");
  try {
    parse_scored_tweets(dir / "t.csv", days("2019-01-01", "2019-01-01"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("bad dates and missing columns") {
  testing::TempDir dir;
  testing::write_file(dir / "a.csv", "id,date,p_off,p_hate\n1,2019-01-32,0.1,0.2\n");
  CHECK_THROWS_AS(parse_scored_tweets(dir / "a.csv", days("2019-01-01", "2019-01-31")), ParseError);
  testing::write_file(dir / "b.csv", "id,date,p_off\n1,2019-01-01,0.1\n");
  CHECK_THROWS_AS(parse_scored_tweets(dir / "b.csv", days("2019-01-01", "2019-01-31")), SchemaError);
  CHECK_THROWS_AS(parse_scored_tweets(dir / "none.csv", days("2019-01-01", "2019-01-31")), IngestError);
}

TEST_CASE("empty days inside the window are materialized") {
  testing::TempDir dir;
  testing::write_file(dir / "t.csv",
                      "id,date,p_off,p_hate\n1,2019-01-01,0.1,0.2\n2,2019-01-03,0.5,0.5\n"
                      "3,2019-01-03,0.9,0.0\n4,2019-01-04,0.9,0.9\n");
  const auto s = parse_scored_tweets(dir / "t.csv", days("2019-01-01", "2019-01-03"));
  REQUIRE(s.days.size() == 3);
  CHECK(s.days[0].tweets.size() == 1);
  CHECK(s.days[1].tweets.empty());
  CHECK(s.days[1].date == Date::parse("2019-01-02"));
  CHECK(s.days[2].tweets.size() == 2);
  CHECK(s.rejected_outside_window == 1);
}

TEST_CASE("counts: a full week, a gap and a negative value") {
  testing::TempDir dir;
  std::string week = "date,count\n";
  for (int d = 1; d <= 7; ++d) week += "2019-01-0" + std::to_string(d) + "," + std::to_string(d * 10) + "\n";
  testing::write_file(dir / "w.csv", week);
  const auto c = parse_counts(dir / "w.csv", days("2019-01-01", "2019-01-07"));
  CHECK(c.size() == 7);
  CHECK(c.values[6] == 70);

  std::string gap = "date,count\n";
  for (int d = 1; d <= 7; ++d)
    if (d != 4) gap += "2019-01-0" + std::to_string(d) + ",5\n";
  testing::write_file(dir / "g.csv", gap);
  try {
    parse_counts(dir / "g.csv", days("2019-01-01", "2019-01-07"));
    FAIL("expected GapError");
  } catch (const GapError& e) {
    REQUIRE(e.missing().size() == 1);
    CHECK(e.missing()[0] == Date::parse("2019-01-04"));
    CHECK(std::string(e.what()).find("2019-01-04") != std::string::npos);
  }

  testing::write_file(dir / "n.csv", "date,count\n2019-01-01,-5\n");
  CHECK_THROWS_AS(parse_counts(dir / "n.csv", days("2019-01-01", "2019-01-01")), ValidationError);
  testing::write_file(dir / "d.csv", "date,count\n2019-01-01,5\n2019-01-01,6\n");
  CHECK_THROWS_AS(parse_counts(dir / "d.csv", days("2019-01-01", "2019-01-01")), ValidationError);
}

TEST_CASE("keyword ranking examples") {
  const auto texts = strings({"a b", "b c", "b"});
  const auto cands = strings({"a", "b", "c"});
  const auto r = rank_keywords(texts, cands, 2);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0] == KeywordCount{"b", 3});
  CHECK(r.entries[1] == KeywordCount{"a", 1});

  const auto z = strings({"z"});
  const auto rz = rank_keywords(texts, z, 1);
  REQUIRE(rz.entries.size() == 1);
  CHECK(rz.entries[0] == KeywordCount{"z", 0});

  const auto bb = strings({"B b"});
  const auto b = strings({"b"});
  CHECK(rank_keywords(bb, b, 5).entries.at(0).tweet_count == 1);

  CHECK(rank_keywords(texts, cands, 10).entries.size() == 3);
  const std::vector<std::string> none;
  CHECK_THROWS_AS(rank_keywords(texts, none, 1), std::invalid_argument);
  CHECK_THROWS_AS(rank_keywords(texts, cands, 0), std::invalid_argument);
}

TEST_CASE("tokenizer splits on punctuation and keeps UTF-8 words") {
  CHECK(tokenize("Hello, WORLD!! it's") == strings({"hello", "world", "it", "s"}));
  CHECK(tokenize("caf\xc3\xa9 #tag") == strings({"caf\xc3\xa9", "tag"}));
}

TEST_CASE("property: written samples parse back identically") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n(0, 6);
  testing::TempDir dir;
  for (int rep = 0; rep < 20; ++rep) {
    const DateRange window{Date::from_ymd(2021, 5, 1), Date::from_ymd(2021, 5, 10)};
    std::vector<DailySample> samples;
    int id = 0;
    for (Date d = window.first; d <= window.last; ++d) {
      DailySample s{d, {}};
      const int k = n(rng);
      for (int i = 0; i < k; ++i) {
        ScoredTweet t{"id" + std::to_string(id++), d, u(rng), u(rng), std::nullopt};
        if (rep % 2 == 0) t.text = "text, with \"quotes\"\nand a newline " + std::to_string(i);
        s.tweets.push_back(t);
      }
      samples.push_back(std::move(s));
    }
    std::ostringstream out;
    write_scored_tweets(out, samples);
    testing::write_file(dir / "rt.csv", out.str());
    const auto back = parse_scored_tweets(dir / "rt.csv", window);
    CHECK(back.days == samples);
    std::size_t total = 0;
    for (const auto& s : back.days) total += s.tweets.size();
    CHECK(total == back.accepted);
  }
}

TEST_CASE("property: counts round-trip") {
  CountSeries c{Date::from_ymd(2020, 1, 30), {0, 5, 123456789012LL, 7}};
  testing::TempDir dir;
  std::ostringstream out;
  write_counts(out, c);
  testing::write_file(dir / "c.csv", out.str());
  const auto back = parse_counts(dir / "c.csv", {c.start_date, c.date_at(3)});
  CHECK(back.values == c.values);
  CHECK(back.start_date == c.start_date);
}

TEST_CASE("property: ranking is invariant under permutation of texts") {
  std::mt19937_64 rng(9);
  const auto vocab = strings({"alpha", "beta", "gamma", "delta", "eps", "zeta", "x", "y"});
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) {
    std::string t;
    for (int w = 0; w < 5; ++w) t += vocab[pick(rng)] + (w % 2 ? "," : " ");
    texts.push_back(t);
  }
  const auto cands = strings({"alpha", "beta", "gamma", "delta", "omega"});
  const auto base = rank_keywords(texts, cands, 5).entries;
  for (int rep = 0; rep < 10; ++rep) {
    std::shuffle(texts.begin(), texts.end(), rng);
    CHECK(rank_keywords(texts, cands, 5).entries == base);
  }
}

}  // TEST_SUITE
