#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "abusetrend/date.hpp"
#include "abusetrend/sampler.hpp"
#include "abusetrend/tvbarc.hpp"

namespace abusetrend::tvbarc {

// Pointwise posterior summary of one coefficient function over the days.
struct CurveSummary {
  std::vector<double> mean;
  std::vector<double> lower;  // 2.5% quantile
  std::vector<double> upper;  // 97.5% quantile
  std::vector<double> ess;    // effective sample size of the values at each day
};

struct FitSummary {
  Date start_date;
  std::size_t series_length = 0;
  std::size_t n_draws = 0;
  CurveSummary trend;
  std::vector<CurveSummary> lags;  // lags[i] summarizes a_{i+1}

  Date date_at(std::size_t t) const { return start_date + static_cast<std::int64_t>(t); }
};

inline constexpr double kLowerQuantile = 0.025;
inline constexpr double kUpperQuantile = 0.975;

// Linearly interpolated sample quantile (Hyndman-Fan type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

// Single-chain effective sample size with Geyer's initial monotone sequence
// estimator. A constant sequence returns its length.
double effective_sample_size(std::span<const double> chain);

// Summaries of mu(t/T) and a_i(t/T) at t = 1..T.
// Throws std::invalid_argument on empty draws.
FitSummary summarize(std::span<const TvbarcParams> draws, const ModelBases& bases, std::size_t T,
                     std::size_t p, Date start_date = Date{});
FitSummary summarize(const PosteriorDraws& draws);

// date,mu_mean,mu_lo,mu_hi,a1_mean,a1_lo,a1_hi,...
void write_summary_csv(std::ostream& out, const FitSummary& summary);
// Same values plus effective sample sizes and sampler diagnostics.
void write_summary_json(std::ostream& out, const FitSummary& summary, const PosteriorDraws* draws);

}  // namespace abusetrend::tvbarc
