#include "abusetrend/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abusetrend/csv.hpp"

namespace abusetrend::sim {

Curve Curve::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("constant curve must be finite");
  Curve c;
  c.fn_ = [value](double) { return value; };
  c.sup_ = c.inf_ = value;
  c.description_ = "constant " + csv::format_double(value);
  return c;
}

Curve Curve::piecewise_linear(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("piecewise-linear curve needs two points");
  if (points.front().first != 0.0 || points.back().first != 1.0)
    throw std::invalid_argument("piecewise-linear curve must span u = 0 to u = 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].second))
      throw std::invalid_argument("piecewise-linear curve has a non-finite value");
    if (i && !(points[i].first > points[i - 1].first))
      throw std::invalid_argument("piecewise-linear abscissae must be strictly increasing");
  }
  Curve c;
  c.sup_ = c.inf_ = points.front().second;
  for (const auto& [u, v] : points) {
    c.sup_ = std::max(c.sup_, v);
    c.inf_ = std::min(c.inf_, v);
  }
  c.description_ = "piecewise-linear (" + std::to_string(points.size()) + " points)";
  c.fn_ = [pts = std::move(points)](double u) {
    auto it = std::upper_bound(pts.begin(), pts.end(), u,
                               [](double x, const auto& p) { return x < p.first; });
    if (it == pts.begin()) return pts.front().second;
    if (it == pts.end()) return pts.back().second;
    const auto& [u1, v1] = *it;
    const auto& [u0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (u - u0) / (u1 - u0);
  };
  return c;
}

Curve Curve::closed_form(std::function<double(double)> fn, std::string description) {
  Curve c;
  c.fn_ = std::move(fn);
  c.description_ = std::move(description);
  constexpr int kGrid = 10000;
  c.sup_ = c.inf_ = c.fn_(0.0);
  for (int k = 1; k <= kGrid; ++k) {
    const double v = c.fn_(static_cast<double>(k) / kGrid);
    c.sup_ = std::max(c.sup_, v);
    c.inf_ = std::min(c.inf_, v);
  }
  return c;
}

double Curve::operator()(double u) const { return fn_(u); }

void ParamCurves::validate() const {
  if (!(trend.inf() >= 0.0))
    throw std::invalid_argument("trend curve must be non-negative (min " +
                                csv::format_double(trend.inf()) + ")");
  double mass = 0.0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i].inf() >= 0.0))
      throw std::invalid_argument("lag " + std::to_string(i + 1) +
                                  " curve must be non-negative");
    mass += lags[i].sup();
  }
  if (!(mass < 1.0))
    throw std::invalid_argument("stability constraint violated: sum of lag suprema is " +
                                csv::format_double(mass) + ", must be < 1");
}

std::int64_t poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

AdjustedSeries simulate(const ParamCurves& curves, std::size_t T, std::uint64_t seed,
                        Date start_date) {
  curves.validate();
  const std::size_t p = curves.lags.size();
  if (T <= p)
    throw std::invalid_argument("simulate: length " + std::to_string(T) +
                                " must exceed the lag order " + std::to_string(p));
  std::mt19937_64 rng(seed);
  AdjustedSeries out{start_date, std::vector<std::int64_t>(T, 0)};
  auto& x = out.values;
  const double dT = static_cast<double>(T);
  for (std::size_t t = 1; t <= T; ++t) {
    const double u = static_cast<double>(t) / dT;
    double lambda = curves.trend(u);
    if (t > p)
      for (std::size_t i = 1; i <= p; ++i)
        lambda += curves.lags[i - 1](u) * static_cast<double>(x[t - 1 - i]);
    x[t - 1] = poisson(rng, lambda);
  }
  return out;
}

}  // namespace abusetrend::sim
