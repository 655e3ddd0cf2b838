#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abusetrend/ingest.hpp"

namespace abusetrend {

// Keeps tweets with p_off > x_off and p_hate > y_hate. Both comparisons are
// strict, so a y_hate of 0 drops tweets whose hate score is exactly zero.
struct ThresholdFilter {
  double x_off = 0.0;
  double y_hate = 0.0;

  // Throws std::invalid_argument unless both thresholds lie in [0,1].
  static ThresholdFilter make(double x_off, double y_hate);

  // Parses the percent notation "x/y", e.g. "25/50" -> (0.25, 0.50).
  // x and y are integers in [0,100]. Throws std::invalid_argument.
  static ThresholdFilter parse(std::string_view notation);

  std::string notation() const;
};

bool passes(const ThresholdFilter& filter, const ScoredTweet& tweet);

enum class EmptyDayPolicy { Zero, NeighborMean };

EmptyDayPolicy parse_empty_day_policy(std::string_view name);
std::string_view to_string(EmptyDayPolicy policy);

enum class DayFlag { Observed, ImputedEmpty };

struct ProportionSeries {
  Date start_date;
  std::vector<double> values;
  std::vector<DayFlag> flags;
  // Per-day raw counts behind each observed proportion. Both are zero on
  // imputed days.
  std::vector<std::uint64_t> n_passing;
  std::vector<std::uint64_t> n_sampled;

  std::size_t size() const { return values.size(); }
  Date date_at(std::size_t i) const { return start_date + static_cast<std::int64_t>(i); }
};

// Throws std::invalid_argument on an empty or non-contiguous day list.
ProportionSeries daily_proportions(std::span<const DailySample> samples,
                                   const ThresholdFilter& filter, EmptyDayPolicy policy);

struct AdjustedSeries {
  Date start_date;
  std::vector<std::int64_t> values;

  std::size_t size() const { return values.size(); }
  Date date_at(std::size_t i) const { return start_date + static_cast<std::int64_t>(i); }
};

// X_t = p_t * Y_t rounded half-to-even. Observed days use the exact rational
// n_passing * Y_t / n_sampled, so ties are detected without floating error.
// Throws AlignmentError when start dates or lengths differ.
AdjustedSeries adjust(const ProportionSeries& props, const CountSeries& counts);

// Exact round-half-to-even of num/den for num >= 0, den > 0.
std::int64_t round_ratio_half_even(std::uint64_t num, std::uint64_t den);

struct ScoreHistogram {
  std::vector<double> bin_edges;  // n_bins + 1 ascending edges on [0,1]
  std::vector<std::uint64_t> off_counts;
  std::vector<std::uint64_t> hate_counts;
};

// Equal-width bins; each bin is [lo, hi) except the last, which is [lo, 1].
ScoreHistogram score_histogram(std::span<const ScoredTweet> tweets, std::size_t n_bins);

void write_proportions(std::ostream& out, const ProportionSeries& props);
// date,total,count with count = X_t; readable as a model input series.
void write_adjusted(std::ostream& out, const AdjustedSeries& adjusted, const CountSeries& totals);
void write_histogram(std::ostream& out, const ScoreHistogram& hist);

}  // namespace abusetrend
