#include "abusetrend/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "abusetrend/csv.hpp"
#include "abusetrend/errors.hpp"

namespace abusetrend {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  return in;
}

std::size_t require_column(const csv::Header& header, std::string_view name,
                           const std::filesystem::path& path) {
  auto idx = header.find(name);
  if (!idx)
    throw SchemaError("'" + path.string() + "': missing required column '" + std::string(name) +
                      "'");
  return *idx;
}

Date parse_date_field(const csv::Record& rec, std::size_t col, const std::filesystem::path& path) {
  try {
    return Date::parse(csv::trim(rec.fields[col]));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string(), rec.line, e.what());
  }
}

double parse_probability(const csv::Record& rec, std::size_t col, std::string_view name,
                         const std::filesystem::path& path) {
  auto v = csv::parse_double(rec.fields[col]);
  if (!v || !std::isfinite(*v))
    throw ParseError(path.string(), rec.line,
                     std::string(name) + " is not a number: '" + rec.fields[col] + "'");
  if (*v < 0.0 || *v > 1.0)
    throw ParseError(path.string(), rec.line,
                     std::string(name) + " outside [0,1]: " + rec.fields[col]);
  return *v;
}

}  // namespace

ScoredSamples parse_scored_tweets(const std::filesystem::path& path, DateRange window) {
  if (window.empty()) throw std::invalid_argument("empty date window");
  auto in = open_input(path);
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw SchemaError("'" + path.string() + "': no header row");
  const csv::Header header(*header_row);
  const std::size_t c_id = require_column(header, "id", path);
  const std::size_t c_date = require_column(header, "date", path);
  const std::size_t c_off = require_column(header, "p_off", path);
  const std::size_t c_hate = require_column(header, "p_hate", path);
  const std::optional<std::size_t> c_text = header.find("text");

  ScoredSamples out;
  out.days.resize(window.size());
  for (std::size_t i = 0; i < out.days.size(); ++i)
    out.days[i].date = window.first + static_cast<std::int64_t>(i);

  while (auto rec = reader.next()) {
    if (rec->fields.size() != header.size())
      throw ParseError(path.string(), rec->line,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(rec->fields.size()));
    ScoredTweet tweet;
    tweet.id = std::string(csv::trim(rec->fields[c_id]));
    if (tweet.id.empty()) throw ParseError(path.string(), rec->line, "empty id");
    tweet.date = parse_date_field(*rec, c_date, path);
    tweet.p_off = parse_probability(*rec, c_off, "p_off", path);
    tweet.p_hate = parse_probability(*rec, c_hate, "p_hate", path);
    if (c_text) tweet.text = rec->fields[*c_text];

    if (!window.contains(tweet.date)) {
      ++out.rejected_outside_window;
      continue;
    }
    out.days[static_cast<std::size_t>(tweet.date - window.first)].tweets.push_back(
        std::move(tweet));
    ++out.accepted;
  }
  return out;
}

CountSeries parse_counts(const std::filesystem::path& path, DateRange window) {
  if (window.empty()) throw std::invalid_argument("empty date window");
  auto in = open_input(path);
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw SchemaError("'" + path.string() + "': no header row");
  const csv::Header header(*header_row);
  const std::size_t c_date = require_column(header, "date", path);
  const std::size_t c_count = require_column(header, "count", path);

  std::vector<std::optional<std::int64_t>> slots(window.size());
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header.size())
      throw ParseError(path.string(), rec->line,
                       "expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(rec->fields.size()));
    const Date d = parse_date_field(*rec, c_date, path);
    auto v = csv::parse_integer(rec->fields[c_count]);
    if (!v)
      throw ParseError(path.string(), rec->line,
                       "count is not an integer: '" + rec->fields[c_count] + "'");
    if (*v < 0)
      throw ValidationError("'" + path.string() + "' line " + std::to_string(rec->line) +
                            ": negative count " + std::to_string(*v) + " on " + d.iso());
    if (!window.contains(d)) continue;
    auto& slot = slots[static_cast<std::size_t>(d - window.first)];
    if (slot)
      throw ValidationError("'" + path.string() + "' line " + std::to_string(rec->line) +
                            ": duplicate row for " + d.iso());
    slot = *v;
  }

  std::vector<Date> missing;
  CountSeries series{window.first, {}};
  series.values.reserve(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) missing.push_back(window.first + static_cast<std::int64_t>(i));
    series.values.push_back(slots[i].value_or(0));
  }
  if (!missing.empty()) {
    std::string msg = "'" + path.string() + "': " + std::to_string(missing.size()) +
                      " day(s) missing from window:";
    const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) msg += " " + missing[i].iso();
    if (shown < missing.size()) msg += " ...";
    throw GapError(msg, std::move(missing));
  }
  return series;
}

void write_scored_tweets(std::ostream& out, std::span<const DailySample> days) {
  const bool with_text = std::any_of(days.begin(), days.end(), [](const DailySample& d) {
    return std::any_of(d.tweets.begin(), d.tweets.end(),
                       [](const ScoredTweet& t) { return t.text.has_value(); });
  });
  std::vector<std::string> row{"id", "date", "p_off", "p_hate"};
  if (with_text) row.emplace_back("text");
  csv::write_row(out, row);
  for (const auto& day : days) {
    for (const auto& t : day.tweets) {
      row = {t.id, t.date.iso(), csv::format_double(t.p_off), csv::format_double(t.p_hate)};
      if (with_text) row.push_back(t.text.value_or(""));
      csv::write_row(out, row);
    }
  }
}

void write_counts(std::ostream& out, const CountSeries& counts) {
  out << "date,count\n";
  for (std::size_t i = 0; i < counts.size(); ++i)
    out << counts.date_at(i).iso() << ',' << counts.values[i] << '\n';
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    const bool word = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') ||
                      (ch >= 'A' && ch <= 'Z') || ch >= 0x80;
    if (word) {
      cur.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : raw);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

KeywordRanking rank_keywords(std::span<const std::string> texts,
                             std::span<const std::string> candidates, std::size_t k) {
  if (candidates.empty()) throw std::invalid_argument("rank_keywords: no candidate keywords");
  if (k == 0) throw std::invalid_argument("rank_keywords: k must be positive");

  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& c : candidates) {
    auto toks = tokenize(c);
    if (toks.size() != 1)
      throw std::invalid_argument("rank_keywords: candidate '" + c + "' is not a single token");
    counts.emplace(std::move(toks.front()), 0);
  }

  std::unordered_set<std::string_view> seen;
  for (const auto& text : texts) {
    const auto toks = tokenize(text);
    seen.clear();
    for (const auto& tok : toks) {
      auto it = counts.find(tok);
      if (it != counts.end() && seen.insert(it->first).second) ++it->second;
    }
  }

  KeywordRanking ranking;
  ranking.entries.reserve(counts.size());
  for (auto& [kw, n] : counts) ranking.entries.push_back({kw, n});
  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const KeywordCount& a, const KeywordCount& b) {
              if (a.tweet_count != b.tweet_count) return a.tweet_count > b.tweet_count;
              return a.keyword < b.keyword;
            });
  if (ranking.entries.size() > k) ranking.entries.resize(k);
  return ranking;
}

}  // namespace abusetrend
