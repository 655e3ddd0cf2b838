#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "abusetrend/date.hpp"
#include "abusetrend/filter.hpp"

namespace abusetrend::sim {

// A non-negative function on [0,1]: a constant, a piecewise-linear table, or
// a closed form.
class Curve {
 public:
  static Curve constant(double value);
  // Points sorted by u, covering [0,1] (first u = 0, last u = 1).
  // Throws std::invalid_argument otherwise.
  static Curve piecewise_linear(std::vector<std::pair<double, double>> points);
  // sup/inf of a closed form are taken over a 10001-point grid.
  static Curve closed_form(std::function<double(double)> fn, std::string description);

  double operator()(double u) const;
  double sup() const { return sup_; }
  double inf() const { return inf_; }
  const std::string& description() const { return description_; }

 private:
  Curve() = default;
  std::function<double(double)> fn_;
  double sup_ = 0.0;
  double inf_ = 0.0;
  std::string description_;
};

struct ParamCurves {
  Curve trend = Curve::constant(0.0);
  std::vector<Curve> lags;  // lags[i] is a_{i+1}

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

// X_1..X_p ~ Poisson(mu(t/T)); afterwards X_t ~ Poisson(lambda_t) with
// lambda_t = mu(t/T) + sum_i a_i(t/T) X_{t-i}. Deterministic per seed.
AdjustedSeries simulate(const ParamCurves& curves, std::size_t T, std::uint64_t seed,
                        Date start_date = Date::from_ymd(2019, 1, 1));

// Exact Poisson variate; zero for a non-positive mean.
std::int64_t poisson(std::mt19937_64& rng, double mean);

}  // namespace abusetrend::sim
