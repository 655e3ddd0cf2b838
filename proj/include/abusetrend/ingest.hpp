#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "abusetrend/date.hpp"

namespace abusetrend {

struct ScoredTweet {
  std::string id;
  Date date;
  double p_off = 0.0;   // probability the post is offensive
  double p_hate = 0.0;  // probability the post is hateful
  std::optional<std::string> text;

  bool operator==(const ScoredTweet&) const = default;
};

struct DailySample {
  Date date;
  std::vector<ScoredTweet> tweets;

  bool operator==(const DailySample&) const = default;
};

// Result of reading a scored-tweet file: one sample per day of the window,
// in date order, empty days included.
struct ScoredSamples {
  std::vector<DailySample> days;
  std::size_t accepted = 0;
  std::size_t rejected_outside_window = 0;
};

// Daily totals Y_t for consecutive days starting at start_date.
struct CountSeries {
  Date start_date;
  std::vector<std::int64_t> values;

  std::size_t size() const { return values.size(); }
  Date date_at(std::size_t i) const { return start_date + static_cast<std::int64_t>(i); }
};

struct KeywordCount {
  std::string keyword;
  std::uint64_t tweet_count = 0;

  bool operator==(const KeywordCount&) const = default;
};

struct KeywordRanking {
  std::vector<KeywordCount> entries;
};

// Reads id,date,p_off,p_hate[,text]. Extra columns are ignored.
// Throws SchemaError, ParseError.
ScoredSamples parse_scored_tweets(const std::filesystem::path& path, DateRange window);

// Reads date,count. Rows outside the window are ignored; every day inside must
// appear exactly once. Throws SchemaError, ParseError, GapError, ValidationError.
CountSeries parse_counts(const std::filesystem::path& path, DateRange window);

// Writes the scored-tweet schema. The text column is emitted when any tweet
// carries text.
void write_scored_tweets(std::ostream& out, std::span<const DailySample> days);

void write_counts(std::ostream& out, const CountSeries& counts);

// Lowercased tokens of `text`, split on anything that is not an ASCII letter
// or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

// Number of texts containing each candidate at least once, top k.
// Throws std::invalid_argument on an empty candidate list or k == 0.
KeywordRanking rank_keywords(std::span<const std::string> texts,
                             std::span<const std::string> candidates, std::size_t k);

}  // namespace abusetrend
