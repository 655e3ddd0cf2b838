#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "abusetrend/bspline.hpp"

namespace abusetrend::tvbarc {

// Intensity floor so that log(lambda) stays finite.
inline constexpr double kLambdaFloor = 1e-10;

enum class LagPrior {
  // Uniform over the constraint region.
  Flat,
  // Each row c_i gets exp(-r_i * sum_j c_ij) r_i^K with r_i ~ Gamma(shape, rate),
  // integrated over r_i: density Gamma(shape+K)/Gamma(shape) * rate^shape
  // / (rate + sum_j c_ij)^(shape+K) on c_i >= 0. Lags without signal are
  // pulled to zero while large coefficients see a nearly flat tail.
  Shrinkage,
};

// "flat" | "shrinkage"; throws std::invalid_argument otherwise.
LagPrior parse_lag_prior(std::string_view name);
std::string_view lag_prior_name(LagPrior prior);

struct ModelSpec {
  std::size_t lag_order = 10;
  std::size_t n_basis_trend = 8;  // K for mu(.)
  std::size_t n_basis_lag = 5;    // K for each a_i(.)
  std::size_t spline_degree = 3;
  double stability_margin = 0.01;  // epsilon
  LagPrior lag_prior = LagPrior::Shrinkage;
  double shrinkage_shape = 1.0;
  double shrinkage_rate = 0.001;

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

// Spline coefficients of the trend mu(u) = sum_j b_j B_j(u) and of the lag
// functions a_i(u) = sum_j c_ij B_j(u), i = 1..p.
struct TvbarcParams {
  std::vector<double> b;               // n_basis_trend
  std::vector<std::vector<double>> c;  // lag_order rows of n_basis_lag

  bool operator==(const TvbarcParams&) const = default;
};

// sum_i max_j c_ij, an upper bound on sum_i a_i(u) over [0,1].
double lag_mass_bound(const TvbarcParams& params);

// b >= 0, c >= 0 and sum_i max_j c_ij <= 1 - margin. Also checks shapes.
bool satisfies_constraints(const TvbarcParams& params, const ModelSpec& spec);

// The two spline bases a spec implies.
struct ModelBases {
  BSplineBasis trend;
  BSplineBasis lag;

  explicit ModelBases(const ModelSpec& spec);
};

double trend_at(const TvbarcParams& params, const BSplineBasis& basis, double u);
// i is 1-based, matching the lag it weights.
double lag_coef_at(const TvbarcParams& params, const BSplineBasis& basis, std::size_t i, double u);

// lambda_t = mu(t/T) + sum_i a_i(t/T) X_{t-i}, floored at kLambdaFloor.
// t is 1-based; history[i-1] holds X_{t-i} and must contain p values.
// Throws std::invalid_argument if t <= p, t > T or history is short.
double lambda_at(const TvbarcParams& params, const ModelBases& bases, std::size_t t, std::size_t T,
                 std::span<const std::int64_t> history);

// Conditional Poisson log-likelihood of X_{p+1..T} given X_1..X_p.
// Throws std::invalid_argument when T <= p.
double log_likelihood(const TvbarcParams& params, const ModelBases& bases,
                      std::span<const std::int64_t> series, std::size_t p);

// Log density of one c row under the shrinkage prior (untruncated).
double log_lag_shrinkage(std::span<const double> row, double shape, double rate);

// Half-normal(prior_scale) on each b_j plus spec.lag_prior on the
// constrained c region (zero for LagPrior::Flat); -infinity outside the
// constraints.
double log_prior(const TvbarcParams& params, const ModelSpec& spec, double prior_scale);

}  // namespace abusetrend::tvbarc
