#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "abusetrend/date.hpp"
#include "abusetrend/filter.hpp"
#include "abusetrend/tvbarc.hpp"

namespace abusetrend::tvbarc {

struct McmcConfig {
  std::size_t n_iter = 6000;
  std::size_t n_burn = 1000;
  std::size_t thin = 5;
  std::uint64_t seed = 20190101;
  double step_trend = 0.05;  // random-walk sd on log(b_j)
  double step_lag = 0.02;    // random-walk sd per coordinate of a c row
  double target_accept = 0.3;
  std::size_t adapt_batch = 25;  // burn-in iterations between step-size updates
  std::size_t n_chains = 1;
  double prior_scale = 0.0;  // <= 0: twice the series mean (1 for an all-zero series)

  void validate() const;
  std::size_t retained_per_chain() const { return (n_iter - n_burn) / thin; }
};

struct BlockDiagnostics {
  // "b3" for trend coefficient 3, "c2" for the row of lag 2, "c2+trend" for
  // its trend-compensated move
  std::string block;
  std::size_t chain = 0;
  double acceptance_rate = 0.0;  // after burn-in
  double step_size = 0.0;        // frozen value used after burn-in
};

struct PosteriorDraws {
  ModelSpec spec;
  McmcConfig config;
  Date start_date;
  std::size_t series_length = 0;
  double prior_scale = 0.0;
  std::vector<TvbarcParams> draws;  // chains concatenated in chain order
  std::vector<double> log_posterior;
  std::vector<BlockDiagnostics> diagnostics;
  std::vector<std::string> warnings;
};

// Prior scale used when the config leaves it unset.
double default_prior_scale(std::span<const std::int64_t> series);

// Deterministic starting point: a constant-coefficient conditional least
// squares fit, clamped into the constraint region.
TvbarcParams initial_params(std::span<const std::int64_t> series, const ModelSpec& spec);

// One Metropolis-within-Gibbs chain. A sweep updates each log(b_j), then each
// row of c, with Gaussian random-walk proposals. It then proposes each c row
// again, shifting the trend coefficients by a fixed linear map of the row
// step: the least-squares projection onto the trend basis of the change in
// that lag's term. The map depends only on the data, so the joint proposal is
// symmetric. It moves along the ridge where a larger lag effect is offset by
// a lower trend. Proposals leaving the constraint region (or making a trend
// coefficient non-positive) are rejected without evaluating the likelihood.
// Blocks are ordered b_1..b_K, c_1..c_p, then the p trend-compensated rows.
class Chain {
 public:
  Chain(std::span<const std::int64_t> series, const ModelSpec& spec, double prior_scale,
        TvbarcParams start, std::uint64_t seed, double step_trend, double step_lag);

  // One full sweep. `accepted` receives one flag per block (trend blocks first).
  void sweep(std::vector<bool>& accepted);

  const TvbarcParams& state() const { return state_; }
  double log_posterior() const { return log_lik_ + log_prior(); }
  double log_prior() const {
    double lp = log_prior_trend_;
    for (double v : row_prior_) lp += v;
    return lp;
  }
  double log_likelihood() const { return log_lik_; }

  std::size_t n_blocks() const { return step_.size(); }
  std::vector<double>& steps() { return step_; }
  const std::vector<double>& steps() const { return step_; }

 private:
  double evaluate(const Eigen::VectorXd& lambda_raw) const;
  double log_prior_b(const Eigen::VectorXd& b) const;
  void refresh_caches();

  ModelSpec spec_;
  double prior_scale_;
  std::size_t p_;
  Eigen::VectorXd x_;       // X_t for t = p+1..T
  Eigen::MatrixXd b_design_;  // trend basis at t/T
  Eigen::MatrixXd c_design_;  // lag basis at t/T
  Eigen::MatrixXd lagged_;    // column i: X_{t-i-1}
  std::vector<Eigen::MatrixXd> compensation_;  // per lag: K_trend x K_lag
  double log_fact_sum_ = 0.0;

  Eigen::VectorXd b_;
  Eigen::MatrixXd c_;           // column i: coefficients of lag i+1
  Eigen::VectorXd trend_;       // b_design * b
  Eigen::MatrixXd lag_terms_;   // column i: a_{i+1}(t/T) X_{t-i-1}
  Eigen::VectorXd lag_total_;
  std::vector<double> row_max_;

  TvbarcParams state_;
  double log_lik_ = 0.0;
  double log_prior_trend_ = 0.0;
  std::vector<double> row_prior_;
  std::vector<double> step_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

// Throws std::invalid_argument when T <= p + K_trend, a count is negative,
// or the model spec or config is invalid.
PosteriorDraws fit(std::span<const std::int64_t> series, Date start_date, const ModelSpec& spec,
                   const McmcConfig& config);
PosteriorDraws fit(const AdjustedSeries& series, const ModelSpec& spec, const McmcConfig& config);

}  // namespace abusetrend::tvbarc
