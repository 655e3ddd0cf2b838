#include "abusetrend/filter.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "abusetrend/csv.hpp"
#include "abusetrend/errors.hpp"

namespace abusetrend {
namespace {

__extension__ using u128 = unsigned __int128;

int parse_percent(std::string_view s, std::string_view notation) {
  int v = -1;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v < 0 || v > 100)
    throw std::invalid_argument("filter '" + std::string(notation) +
                                "': expected x/y with integers in [0,100]");
  return v;
}

template <typename U>
std::uint64_t half_even_quotient(U num, std::uint64_t den) {
  const auto q = static_cast<std::uint64_t>(num / den);
  const auto r = static_cast<std::uint64_t>(num % den);
  // 2r vs den, without overflow.
  return (r > den - r || (r == den - r && (q & 1U))) ? q + 1 : q;
}

}  // namespace

ThresholdFilter ThresholdFilter::make(double x_off, double y_hate) {
  if (!(x_off >= 0.0 && x_off <= 1.0) || !(y_hate >= 0.0 && y_hate <= 1.0))
    throw std::invalid_argument("filter thresholds must lie in [0,1]");
  return {x_off, y_hate};
}

ThresholdFilter ThresholdFilter::parse(std::string_view notation) {
  const auto slash = notation.find('/');
  if (slash == std::string_view::npos)
    throw std::invalid_argument("filter '" + std::string(notation) + "': missing '/'");
  const int x = parse_percent(notation.substr(0, slash), notation);
  const int y = parse_percent(notation.substr(slash + 1), notation);
  return make(x / 100.0, y / 100.0);
}

std::string ThresholdFilter::notation() const {
  const auto pct = [](double v) {
    const double p = v * 100.0;
    const double r = std::round(p);
    return std::abs(p - r) < 1e-9 ? std::to_string(static_cast<int>(r)) : csv::format_double(p);
  };
  return pct(x_off) + "/" + pct(y_hate);
}

bool passes(const ThresholdFilter& filter, const ScoredTweet& tweet) {
  return tweet.p_off > filter.x_off && tweet.p_hate > filter.y_hate;
}

EmptyDayPolicy parse_empty_day_policy(std::string_view name) {
  if (name == "zero") return EmptyDayPolicy::Zero;
  if (name == "neighbor-mean") return EmptyDayPolicy::NeighborMean;
  throw std::invalid_argument("unknown empty-day policy '" + std::string(name) +
                              "' (expected zero or neighbor-mean)");
}

std::string_view to_string(EmptyDayPolicy policy) {
  return policy == EmptyDayPolicy::Zero ? "zero" : "neighbor-mean";
}

ProportionSeries daily_proportions(std::span<const DailySample> samples,
                                   const ThresholdFilter& filter, EmptyDayPolicy policy) {
  if (samples.empty()) throw std::invalid_argument("daily_proportions: empty window");
  ProportionSeries out;
  out.start_date = samples.front().date;
  const std::size_t n = samples.size();
  out.values.assign(n, 0.0);
  out.flags.assign(n, DayFlag::Observed);
  out.n_passing.assign(n, 0);
  out.n_sampled.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& day = samples[i];
    if (day.date != out.date_at(i))
      throw std::invalid_argument("daily_proportions: samples are not contiguous at " +
                                  day.date.iso());
    if (day.tweets.empty()) {
      out.flags[i] = DayFlag::ImputedEmpty;
      continue;
    }
    std::uint64_t k = 0;
    for (const auto& t : day.tweets) k += passes(filter, t) ? 1 : 0;
    out.n_passing[i] = k;
    out.n_sampled[i] = day.tweets.size();
    out.values[i] = static_cast<double>(k) / static_cast<double>(day.tweets.size());
  }

  if (policy == EmptyDayPolicy::NeighborMean) {
    // Mean of the nearest observed day on each side; one side if only one
    // exists; zero when nothing was observed.
    for (std::size_t i = 0; i < n; ++i) {
      if (out.flags[i] != DayFlag::ImputedEmpty) continue;
      double sum = 0.0;
      int found = 0;
      for (std::size_t j = i; j-- > 0;) {
        if (out.flags[j] == DayFlag::Observed) {
          sum += out.values[j];
          ++found;
          break;
        }
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (out.flags[j] == DayFlag::Observed) {
          sum += out.values[j];
          ++found;
          break;
        }
      }
      out.values[i] = found ? sum / found : 0.0;
    }
  }
  return out;
}

std::int64_t round_ratio_half_even(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw std::invalid_argument("round_ratio_half_even: zero denominator");
  return static_cast<std::int64_t>(half_even_quotient(num, den));
}

AdjustedSeries adjust(const ProportionSeries& props, const CountSeries& counts) {
  if (props.start_date != counts.start_date || props.size() != counts.size())
    throw AlignmentError("adjust: proportions start " + props.start_date.iso() + " (" +
                         std::to_string(props.size()) + " days) but counts start " +
                         counts.start_date.iso() + " (" + std::to_string(counts.size()) +
                         " days)");
  AdjustedSeries out{props.start_date, std::vector<std::int64_t>(props.size(), 0)};
  for (std::size_t t = 0; t < props.size(); ++t) {
    const std::int64_t y = counts.values[t];
    if (props.flags[t] == DayFlag::Observed && props.n_sampled[t] > 0) {
      const u128 num = static_cast<u128>(props.n_passing[t]) * static_cast<std::uint64_t>(y);
      out.values[t] = static_cast<std::int64_t>(half_even_quotient(num, props.n_sampled[t]));
    } else {
      out.values[t] = static_cast<std::int64_t>(std::nearbyint(props.values[t] * static_cast<double>(y)));
    }
    if (out.values[t] > y) out.values[t] = y;
  }
  return out;
}

ScoreHistogram score_histogram(std::span<const ScoredTweet> tweets, std::size_t n_bins) {
  if (n_bins == 0) throw std::invalid_argument("score_histogram: n_bins must be positive");
  ScoreHistogram h;
  h.bin_edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.bin_edges[i] = static_cast<double>(i) / static_cast<double>(n_bins);
  h.off_counts.assign(n_bins, 0);
  h.hate_counts.assign(n_bins, 0);
  const auto bin_of = [n_bins](double s) {
    auto b = static_cast<std::size_t>(std::floor(s * static_cast<double>(n_bins)));
    return b >= n_bins ? n_bins - 1 : b;
  };
  for (const auto& t : tweets) {
    ++h.off_counts[bin_of(t.p_off)];
    ++h.hate_counts[bin_of(t.p_hate)];
  }
  return h;
}

void write_proportions(std::ostream& out, const ProportionSeries& props) {
  out << "date,proportion,n_passing,n_sampled,flag\n";
  for (std::size_t t = 0; t < props.size(); ++t) {
    out << props.date_at(t).iso() << ',' << csv::format_double(props.values[t]) << ','
        << props.n_passing[t] << ',' << props.n_sampled[t] << ','
        << (props.flags[t] == DayFlag::Observed ? "observed" : "imputed-empty") << '\n';
  }
}

void write_adjusted(std::ostream& out, const AdjustedSeries& adjusted, const CountSeries& totals) {
  if (adjusted.start_date != totals.start_date || adjusted.size() != totals.size())
    throw AlignmentError("write_adjusted: series are not aligned");
  out << "date,total,count\n";
  for (std::size_t t = 0; t < adjusted.size(); ++t)
    out << adjusted.date_at(t).iso() << ',' << totals.values[t] << ',' << adjusted.values[t]
        << '\n';
}

void write_histogram(std::ostream& out, const ScoreHistogram& hist) {
  out << "bin_lo,bin_hi,p_off_count,p_hate_count\n";
  for (std::size_t i = 0; i + 1 < hist.bin_edges.size(); ++i)
    out << csv::format_double(hist.bin_edges[i]) << ',' << csv::format_double(hist.bin_edges[i + 1])
        << ',' << hist.off_counts[i] << ',' << hist.hate_counts[i] << '\n';
}

}  // namespace abusetrend
