#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "abusetrend/date.hpp"

namespace abusetrend::smooth {

struct DailySeries {
  Date start_date;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  Date date_at(std::size_t i) const { return start_date + static_cast<std::int64_t>(i); }
};

struct SmoothedSeries {
  Date start_date;
  std::vector<double> fitted;
  std::string method;  // "rolling-mean" or "penalized-spline"
  std::size_t window = 0;
  double penalty = 0.0;
  std::size_t n_basis = 0;
  std::optional<double> gcv_score;  // set when the penalty was chosen by GCV
};

// Centered moving average; near the ends the window is truncated to the days
// available. Throws std::invalid_argument unless window is odd, positive and
// no longer than the series.
SmoothedSeries rolling_mean(const DailySeries& series, std::size_t window = 7);

// Number of cubic B-spline functions used for a series of length n.
std::size_t smoother_basis_size(std::size_t n);

// Penalized least squares on a clamped cubic B-spline basis over the day
// index rescaled to [0,1]. The penalty is the squared second divided
// difference of the coefficients at their Greville abscissae, so straight
// lines are never penalized and an infinite penalty gives the least-squares
// line. Throws std::invalid_argument for fewer than 4 values, non-finite data
// or a negative penalty.
SmoothedSeries spline_smooth(const DailySeries& series, double penalty);

// Same, with the penalty minimizing the generalized cross-validation score
// n * RSS / (n - tr H)^2 over a log-spaced grid 1e-6 .. 1e8.
SmoothedSeries spline_smooth_gcv(const DailySeries& series);

void write_smoothed(std::ostream& out, const DailySeries& input, const SmoothedSeries& smoothed);

}  // namespace abusetrend::smooth
