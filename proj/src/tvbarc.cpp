#include "abusetrend/tvbarc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace abusetrend::tvbarc {

LagPrior parse_lag_prior(std::string_view name) {
  if (name == "flat") return LagPrior::Flat;
  if (name == "shrinkage") return LagPrior::Shrinkage;
  throw std::invalid_argument("unknown lag prior '" + std::string(name) + "' (expected flat or shrinkage)");
}

std::string_view lag_prior_name(LagPrior prior) {
  return prior == LagPrior::Flat ? "flat" : "shrinkage";
}

void ModelSpec::validate() const {
  if (lag_order < 1) throw std::invalid_argument("lag order must be at least 1");
  if (n_basis_trend < spline_degree + 1 || n_basis_lag < spline_degree + 1)
    throw std::invalid_argument("number of basis functions must be at least spline_degree + 1 = " +
                                std::to_string(spline_degree + 1));
  if (!(stability_margin > 0.0 && stability_margin < 1.0))
    throw std::invalid_argument("stability margin must lie in (0,1)");
  if (lag_prior == LagPrior::Shrinkage && !(shrinkage_shape > 0.0 && shrinkage_rate > 0.0))
    throw std::invalid_argument("shrinkage shape and rate must be positive");
}

double lag_mass_bound(const TvbarcParams& params) {
  double total = 0.0;
  for (const auto& row : params.c)
    if (!row.empty()) total += *std::max_element(row.begin(), row.end());
  return total;
}

bool satisfies_constraints(const TvbarcParams& params, const ModelSpec& spec) {
  if (params.b.size() != spec.n_basis_trend || params.c.size() != spec.lag_order) return false;
  for (double v : params.b)
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  for (const auto& row : params.c) {
    if (row.size() != spec.n_basis_lag) return false;
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
  }
  return lag_mass_bound(params) <= 1.0 - spec.stability_margin;
}

ModelBases::ModelBases(const ModelSpec& spec)
    : trend(spec.n_basis_trend, spec.spline_degree), lag(spec.n_basis_lag, spec.spline_degree) {}

double trend_at(const TvbarcParams& params, const BSplineBasis& basis, double u) {
  const auto w = basis.eval(u);
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += params.b[j] * w[j];
  return s;
}

double lag_coef_at(const TvbarcParams& params, const BSplineBasis& basis, std::size_t i, double u) {
  if (i < 1 || i > params.c.size()) throw std::out_of_range("lag index out of range");
  const auto w = basis.eval(u);
  const auto& row = params.c[i - 1];
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += row[j] * w[j];
  return s;
}

double lambda_at(const TvbarcParams& params, const ModelBases& bases, std::size_t t, std::size_t T,
                 std::span<const std::int64_t> history) {
  const std::size_t p = params.c.size();
  if (t <= p || t > T)
    throw std::invalid_argument("lambda_at: need p < t <= T (t=" + std::to_string(t) +
                                ", p=" + std::to_string(p) + ", T=" + std::to_string(T) + ")");
  if (history.size() < p)
    throw std::invalid_argument("lambda_at: history holds " + std::to_string(history.size()) +
                                " values, lag order is " + std::to_string(p));
  const double u = static_cast<double>(t) / static_cast<double>(T);
  const auto wb = bases.trend.eval(u);
  const auto wc = bases.lag.eval(u);
  double lambda = 0.0;
  for (std::size_t j = 0; j < wb.size(); ++j) lambda += params.b[j] * wb[j];
  for (std::size_t i = 0; i < p; ++i) {
    double a = 0.0;
    for (std::size_t j = 0; j < wc.size(); ++j) a += params.c[i][j] * wc[j];
    lambda += a * static_cast<double>(history[i]);
  }
  return std::max(lambda, kLambdaFloor);
}

double log_likelihood(const TvbarcParams& params, const ModelBases& bases,
                      std::span<const std::int64_t> series, std::size_t p) {
  const std::size_t T = series.size();
  if (T <= p) throw std::invalid_argument("log_likelihood: series length must exceed lag order");
  if (params.c.size() != p) throw std::invalid_argument("log_likelihood: lag order mismatch");
  std::vector<std::int64_t> history(p);
  double ll = 0.0;
  for (std::size_t t = p + 1; t <= T; ++t) {
    for (std::size_t i = 1; i <= p; ++i) history[i - 1] = series[t - 1 - i];
    const double lambda = lambda_at(params, bases, t, T, history);
    const auto x = static_cast<double>(series[t - 1]);
    ll += x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
  }
  return ll;
}

double log_lag_shrinkage(std::span<const double> row, double shape, double rate) {
  double s = 0.0;
  for (double v : row) s += v;
  const auto k = static_cast<double>(row.size());
  return std::lgamma(shape + k) - std::lgamma(shape) + shape * std::log(rate) -
         (shape + k) * std::log(rate + s);
}

double log_prior(const TvbarcParams& params, const ModelSpec& spec, double prior_scale) {
  if (!(prior_scale > 0.0)) throw std::invalid_argument("log_prior: prior scale must be positive");
  if (!satisfies_constraints(params, spec)) return -std::numeric_limits<double>::infinity();
  const double log_norm = 0.5 * std::log(2.0 / std::numbers::pi) - std::log(prior_scale);
  double lp = 0.0;
  for (double v : params.b) lp += log_norm - 0.5 * (v / prior_scale) * (v / prior_scale);
  if (spec.lag_prior == LagPrior::Shrinkage)
    for (const auto& row : params.c)
      lp += log_lag_shrinkage(row, spec.shrinkage_shape, spec.shrinkage_rate);
  return lp;
}

}  // namespace abusetrend::tvbarc
