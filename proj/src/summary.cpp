#include "abusetrend/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "abusetrend/csv.hpp"

namespace abusetrend::tvbarc {
namespace {

Eigen::MatrixXd day_design(const BSplineBasis& basis, std::size_t T) {
  std::vector<double> u(T);
  for (std::size_t t = 1; t <= T; ++t) u[t - 1] = static_cast<double>(t) / static_cast<double>(T);
  return basis.design(u);
}

// values: rows are days, columns are draws.
CurveSummary summarize_rows(const Eigen::MatrixXd& values) {
  const auto n_days = static_cast<std::size_t>(values.rows());
  const auto n_draws = static_cast<std::size_t>(values.cols());
  CurveSummary s;
  s.mean.resize(n_days);
  s.lower.resize(n_days);
  s.upper.resize(n_days);
  s.ess.resize(n_days);
  std::vector<double> chain(n_draws);
  std::vector<double> sorted(n_draws);
  for (std::size_t t = 0; t < n_days; ++t) {
    double sum = 0.0;
    for (std::size_t d = 0; d < n_draws; ++d) {
      chain[d] = values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d));
      sum += chain[d];
    }
    sorted = chain;
    std::sort(sorted.begin(), sorted.end());
    // Rounding in the sum can push the mean a hair outside [min, max].
    s.mean[t] = std::clamp(sum / static_cast<double>(n_draws), sorted.front(), sorted.back());
    s.lower[t] = std::min(quantile_sorted(sorted, kLowerQuantile), s.mean[t]);
    s.upper[t] = std::max(quantile_sorted(sorted, kUpperQuantile), s.mean[t]);
    s.ess[t] = effective_sample_size(chain);
  }
  return s;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0,1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : chain) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = chain[i] - mean;
    var += centered[i] * centered[i];
  }
  var /= static_cast<double>(n);
  if (!(var > 1e-300)) return static_cast<double>(n);

  const auto autocorr = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / (static_cast<double>(n) * var);
  };

  // Sum of consecutive pairs Gamma_k = rho_{2k} + rho_{2k+1} while positive,
  // forced to be non-increasing.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = autocorr(2 * k) + autocorr(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

FitSummary summarize(std::span<const TvbarcParams> draws, const ModelBases& bases, std::size_t T,
                     std::size_t p, Date start_date) {
  if (draws.empty()) throw std::invalid_argument("summarize: no draws");
  if (T == 0) throw std::invalid_argument("summarize: empty series");
  const auto kb = static_cast<Eigen::Index>(bases.trend.size());
  const auto kc = static_cast<Eigen::Index>(bases.lag.size());
  const auto n_draws = static_cast<Eigen::Index>(draws.size());

  Eigen::MatrixXd b(kb, n_draws);
  std::vector<Eigen::MatrixXd> c(p, Eigen::MatrixXd(kc, n_draws));
  for (Eigen::Index d = 0; d < n_draws; ++d) {
    const auto& draw = draws[static_cast<std::size_t>(d)];
    if (draw.b.size() != static_cast<std::size_t>(kb) || draw.c.size() != p)
      throw std::invalid_argument("summarize: draw shape does not match the model");
    for (Eigen::Index j = 0; j < kb; ++j) b(j, d) = draw.b[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < p; ++i) {
      if (draw.c[i].size() != static_cast<std::size_t>(kc))
        throw std::invalid_argument("summarize: draw shape does not match the model");
      for (Eigen::Index j = 0; j < kc; ++j) c[i](j, d) = draw.c[i][static_cast<std::size_t>(j)];
    }
  }

  FitSummary s;
  s.start_date = start_date;
  s.series_length = T;
  s.n_draws = draws.size();
  const Eigen::MatrixXd trend_design = day_design(bases.trend, T);
  const Eigen::MatrixXd lag_design = day_design(bases.lag, T);
  s.trend = summarize_rows(trend_design * b);
  s.lags.reserve(p);
  for (std::size_t i = 0; i < p; ++i) s.lags.push_back(summarize_rows(lag_design * c[i]));
  return s;
}

FitSummary summarize(const PosteriorDraws& draws) {
  const ModelBases bases(draws.spec);
  return summarize(draws.draws, bases, draws.series_length, draws.spec.lag_order,
                   draws.start_date);
}

void write_summary_csv(std::ostream& out, const FitSummary& summary) {
  out << "date,mu_mean,mu_lo,mu_hi";
  for (std::size_t i = 1; i <= summary.lags.size(); ++i)
    out << ",a" << i << "_mean,a" << i << "_lo,a" << i << "_hi";
  out << '\n';
  using csv::format_double;
  for (std::size_t t = 0; t < summary.series_length; ++t) {
    out << summary.date_at(t).iso() << ',' << format_double(summary.trend.mean[t]) << ','
        << format_double(summary.trend.lower[t]) << ',' << format_double(summary.trend.upper[t]);
    for (const auto& lag : summary.lags)
      out << ',' << format_double(lag.mean[t]) << ',' << format_double(lag.lower[t]) << ','
          << format_double(lag.upper[t]);
    out << '\n';
  }
}

void write_summary_json(std::ostream& out, const FitSummary& summary, const PosteriorDraws* draws) {
  using nlohmann::json;
  const auto curve = [](const CurveSummary& c) {
    return json{{"mean", c.mean}, {"lower", c.lower}, {"upper", c.upper}, {"ess", c.ess}};
  };
  json j;
  j["start_date"] = summary.start_date.iso();
  j["series_length"] = summary.series_length;
  j["n_draws"] = summary.n_draws;
  j["quantiles"] = {kLowerQuantile, kUpperQuantile};
  std::vector<std::string> dates;
  dates.reserve(summary.series_length);
  for (std::size_t t = 0; t < summary.series_length; ++t) dates.push_back(summary.date_at(t).iso());
  j["dates"] = dates;
  j["mu"] = curve(summary.trend);
  j["lags"] = json::array();
  for (const auto& lag : summary.lags) j["lags"].push_back(curve(lag));
  if (draws) {
    j["prior_scale"] = draws->prior_scale;
    j["warnings"] = draws->warnings;
    j["diagnostics"] = json::array();
    for (const auto& d : draws->diagnostics)
      j["diagnostics"].push_back({{"block", d.block},
                                  {"chain", d.chain},
                                  {"acceptance_rate", d.acceptance_rate},
                                  {"step_size", d.step_size}});
  }
  out << j.dump(1) << '\n';
}

}  // namespace abusetrend::tvbarc
