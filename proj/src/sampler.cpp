#include "abusetrend/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace abusetrend::tvbarc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
  return chain == 0 ? seed : splitmix64(seed ^ splitmix64(chain));
}

double series_mean(std::span<const std::int64_t> series) {
  if (series.empty()) return 0.0;
  double s = 0.0;
  for (auto v : series) s += static_cast<double>(v);
  return s / static_cast<double>(series.size());
}

struct ChainResult {
  std::vector<TvbarcParams> draws;
  std::vector<double> log_posterior;
  std::vector<BlockDiagnostics> diagnostics;
};

ChainResult run_chain(std::span<const std::int64_t> series, const ModelSpec& spec,
                      const McmcConfig& config, double prior_scale, std::size_t chain_index) {
  Chain chain(series, spec, prior_scale, initial_params(series, spec),
              chain_seed(config.seed, chain_index), config.step_trend, config.step_lag);
  const std::size_t n_blocks = chain.n_blocks();
  std::vector<bool> accepted;
  std::vector<std::size_t> batch_accepts(n_blocks, 0);
  std::vector<std::size_t> post_accepts(n_blocks, 0);
  std::size_t batch_len = 0;
  std::size_t batch_index = 0;

  ChainResult out;
  out.draws.reserve(config.retained_per_chain());
  out.log_posterior.reserve(config.retained_per_chain());

  for (std::size_t it = 0; it < config.n_iter; ++it) {
    chain.sweep(accepted);
    if (it < config.n_burn) {
      for (std::size_t k = 0; k < n_blocks; ++k) batch_accepts[k] += accepted[k] ? 1 : 0;
      if (++batch_len == config.adapt_batch) {
        // Per-block scaling toward the target rate with a decaying gain; frozen after burn-in.
        ++batch_index;
        const double gain = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(batch_index)));
        for (std::size_t k = 0; k < n_blocks; ++k) {
          const double rate =
              static_cast<double>(batch_accepts[k]) / static_cast<double>(config.adapt_batch);
          const double delta = std::clamp(gain * (rate - config.target_accept), -1.0, 1.0);
          chain.steps()[k] *= std::exp(delta);
          batch_accepts[k] = 0;
        }
        batch_len = 0;
      }
      continue;
    }
    for (std::size_t k = 0; k < n_blocks; ++k) post_accepts[k] += accepted[k] ? 1 : 0;
    if ((it + 1 - config.n_burn) % config.thin == 0) {
      out.draws.push_back(chain.state());
      out.log_posterior.push_back(chain.log_posterior());
    }
  }

  const double n_post = static_cast<double>(config.n_iter - config.n_burn);
  for (std::size_t k = 0; k < n_blocks; ++k) {
    BlockDiagnostics d;
    const std::size_t kb = spec.n_basis_trend;
    const std::size_t p = spec.lag_order;
    if (k < kb)
      d.block = "b" + std::to_string(k + 1);
    else if (k < kb + p)
      d.block = "c" + std::to_string(k - kb + 1);
    else
      d.block = "c" + std::to_string(k - kb - p + 1) + "+trend";
    d.chain = chain_index;
    d.acceptance_rate = static_cast<double>(post_accepts[k]) / n_post;
    d.step_size = chain.steps()[k];
    out.diagnostics.push_back(std::move(d));
  }
  return out;
}

}  // namespace

void McmcConfig::validate() const {
  if (n_iter == 0) throw std::invalid_argument("n_iter must be positive");
  if (n_burn >= n_iter) throw std::invalid_argument("n_burn must be smaller than n_iter");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (retained_per_chain() == 0)
    throw std::invalid_argument("no draws retained: (n_iter - n_burn) / thin is zero");
  if (!(step_trend > 0.0) || !(step_lag > 0.0))
    throw std::invalid_argument("initial step sizes must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw std::invalid_argument("target acceptance rate must lie in (0,1)");
  if (adapt_batch < 1) throw std::invalid_argument("adapt_batch must be at least 1");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be at least 1");
  if (!std::isfinite(prior_scale)) throw std::invalid_argument("prior scale must be finite");
}

double default_prior_scale(std::span<const std::int64_t> series) {
  const double m = series_mean(series);
  return m > 0.0 ? 2.0 * m : 1.0;
}

TvbarcParams initial_params(std::span<const std::int64_t> series, const ModelSpec& spec) {
  const std::size_t p = spec.lag_order;
  const std::size_t T = series.size();
  const double mean = series_mean(series);

  std::vector<double> a(p, 0.0);
  if (T > 2 * (p + 1)) {
    const auto n = static_cast<Eigen::Index>(T - p);
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::size_t t = p + static_cast<std::size_t>(r);  // 0-based index of X_t
      y(r) = static_cast<double>(series[t]);
      design(r, 0) = 1.0;
      for (std::size_t i = 1; i <= p; ++i)
        design(r, static_cast<Eigen::Index>(i)) = static_cast<double>(series[t - i]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == design.cols()) {
      const Eigen::VectorXd coef = qr.solve(y);
      for (std::size_t i = 0; i < p; ++i) a[i] = coef(static_cast<Eigen::Index>(i + 1));
    }
  }
  const double floor_a = 0.005;
  double total = 0.0;
  for (auto& v : a) {
    v = std::isfinite(v) ? std::max(v, floor_a) : floor_a;
    total += v;
  }
  const double cap = 0.8 * (1.0 - spec.stability_margin);
  if (total > cap) {
    for (auto& v : a) v *= cap / total;
    total = cap;
  }

  TvbarcParams start;
  const double level = std::max(mean * (1.0 - total), 1e-3);
  start.b.assign(spec.n_basis_trend, level);
  start.c.resize(p);
  for (std::size_t i = 0; i < p; ++i) start.c[i].assign(spec.n_basis_lag, a[i]);
  return start;
}

Chain::Chain(std::span<const std::int64_t> series, const ModelSpec& spec, double prior_scale,
             TvbarcParams start, std::uint64_t seed, double step_trend, double step_lag)
    : spec_(spec), prior_scale_(prior_scale), p_(spec.lag_order), state_(std::move(start)),
      rng_(seed), normal_(0.0, 1.0), uniform_(0.0, 1.0) {
  spec_.validate();
  const std::size_t T = series.size();
  if (T <= p_) throw std::invalid_argument("Chain: series shorter than lag order");
  if (!satisfies_constraints(state_, spec_))
    throw std::invalid_argument("Chain: starting point violates the constraints");
  for (double v : state_.b)
    if (!(v > 0.0)) throw std::invalid_argument("Chain: trend coefficients must start positive");

  const ModelBases bases(spec_);
  const auto n = static_cast<Eigen::Index>(T - p_);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < u.size(); ++r)
    u[r] = static_cast<double>(p_ + 1 + r) / static_cast<double>(T);
  b_design_ = bases.trend.design(u);
  c_design_ = bases.lag.design(u);
  x_.resize(n);
  lagged_.resize(n, static_cast<Eigen::Index>(p_));
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t t = p_ + static_cast<std::size_t>(r);
    x_(r) = static_cast<double>(series[t]);
    log_fact_sum_ += std::lgamma(x_(r) + 1.0);
    for (std::size_t i = 0; i < p_; ++i)
      lagged_(r, static_cast<Eigen::Index>(i)) = static_cast<double>(series[t - i - 1]);
  }

  // Least-squares projection of each lag term onto the trend basis.
  const Eigen::MatrixXd gram = b_design_.transpose() * b_design_;
  const Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);
  compensation_.reserve(p_);
  for (std::size_t i = 0; i < p_; ++i) {
    const Eigen::MatrixXd weighted =
        lagged_.col(static_cast<Eigen::Index>(i)).asDiagonal() * c_design_;
    compensation_.push_back(-gram_ldlt.solve(b_design_.transpose() * weighted));
  }

  step_.assign(spec_.n_basis_trend, step_trend);
  step_.resize(spec_.n_basis_trend + 2 * p_, step_lag);
  refresh_caches();
}

void Chain::refresh_caches() {
  const auto kb = static_cast<Eigen::Index>(spec_.n_basis_trend);
  const auto kc = static_cast<Eigen::Index>(spec_.n_basis_lag);
  b_.resize(kb);
  for (Eigen::Index j = 0; j < kb; ++j) b_(j) = state_.b[static_cast<std::size_t>(j)];
  c_.resize(kc, static_cast<Eigen::Index>(p_));
  row_max_.assign(p_, 0.0);
  for (std::size_t i = 0; i < p_; ++i) {
    for (Eigen::Index j = 0; j < kc; ++j)
      c_(j, static_cast<Eigen::Index>(i)) = state_.c[i][static_cast<std::size_t>(j)];
    row_max_[i] = *std::max_element(state_.c[i].begin(), state_.c[i].end());
  }
  trend_ = b_design_ * b_;
  lag_terms_ = (c_design_ * c_).cwiseProduct(lagged_);
  lag_total_ = lag_terms_.rowwise().sum();
  log_lik_ = evaluate(trend_ + lag_total_);
  log_prior_trend_ = log_prior_b(b_);
  row_prior_.assign(p_, 0.0);
  if (spec_.lag_prior == LagPrior::Shrinkage)
    for (std::size_t i = 0; i < p_; ++i)
      row_prior_[i] = log_lag_shrinkage(state_.c[i], spec_.shrinkage_shape, spec_.shrinkage_rate);
}

double Chain::evaluate(const Eigen::VectorXd& lambda_raw) const {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < lambda_raw.size(); ++r) {
    const double lambda = std::max(lambda_raw(r), kLambdaFloor);
    ll += x_(r) * std::log(lambda) - lambda;
  }
  return ll - log_fact_sum_;
}

double Chain::log_prior_b(const Eigen::VectorXd& b) const {
  const double log_norm = 0.5 * std::log(2.0 / std::numbers::pi) - std::log(prior_scale_);
  double lp = 0.0;
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double z = b(j) / prior_scale_;
    lp += log_norm - 0.5 * z * z;
  }
  return lp;
}

void Chain::sweep(std::vector<bool>& accepted) {
  accepted.assign(step_.size(), false);
  const auto kb = static_cast<Eigen::Index>(spec_.n_basis_trend);
  const auto kc = static_cast<Eigen::Index>(spec_.n_basis_lag);
  const double max_mass = 1.0 - spec_.stability_margin;

  // Trend coefficients: multiplicative walk, i.e. a Gaussian walk on log(b_j).
  for (Eigen::Index j = 0; j < kb; ++j) {
    const std::size_t k = static_cast<std::size_t>(j);
    const double old_b = b_(j);
    const double new_b = old_b * std::exp(step_[k] * normal_(rng_));
    const double log_u = std::log(uniform_(rng_));
    if (!(new_b > 0.0) || !std::isfinite(new_b)) continue;

    Eigen::VectorXd b_prop = b_;
    b_prop(j) = new_b;
    Eigen::VectorXd trend_prop = b_design_ * b_prop;
    const double ll = evaluate(trend_prop + lag_total_);
    const double lp = log_prior_b(b_prop);
    // log(new_b / old_b) is the Jacobian of the log-scale proposal.
    const double log_alpha = (ll + lp) - (log_lik_ + log_prior_trend_) + std::log(new_b / old_b);
    if (log_u < log_alpha) {
      b_ = std::move(b_prop);
      trend_ = std::move(trend_prop);
      state_.b[k] = new_b;
      log_lik_ = ll;
      log_prior_trend_ = lp;
      accepted[k] = true;
    }
  }

  // Lag rows: additive walk, truncated to the constraint region.
  Eigen::VectorXd row(kc);
  for (std::size_t i = 0; i < p_; ++i) {
    const std::size_t k = spec_.n_basis_trend + i;
    const auto col = static_cast<Eigen::Index>(i);
    bool inside = true;
    for (Eigen::Index j = 0; j < kc; ++j) {
      row(j) = c_(j, col) + step_[k] * normal_(rng_);
      if (row(j) < 0.0) inside = false;
    }
    const double log_u = std::log(uniform_(rng_));
    if (!inside) continue;
    const double new_max = row.maxCoeff();
    double mass = 0.0;
    for (std::size_t m = 0; m < p_; ++m) mass += m == i ? new_max : row_max_[m];
    if (mass > max_mass) continue;

    // Swap the proposed column in and re-sum in a fixed order, so the cached
    // total is bit-identical to a fresh evaluation.
    Eigen::VectorXd old_term = lag_terms_.col(col);
    lag_terms_.col(col) = (c_design_ * row).cwiseProduct(lagged_.col(col));
    Eigen::VectorXd total = lag_terms_.rowwise().sum();
    const double ll = evaluate(trend_ + total);
    const double row_prior =
        spec_.lag_prior == LagPrior::Shrinkage
            ? log_lag_shrinkage(std::span<const double>(row.data(), static_cast<std::size_t>(kc)),
                                spec_.shrinkage_shape, spec_.shrinkage_rate)
            : 0.0;
    if (log_u < (ll + row_prior) - (log_lik_ + row_prior_[i])) {
      c_.col(col) = row;
      lag_total_ = std::move(total);
      row_max_[i] = new_max;
      for (Eigen::Index j = 0; j < kc; ++j) state_.c[i][static_cast<std::size_t>(j)] = row(j);
      log_lik_ = ll;
      row_prior_[i] = row_prior;
      accepted[k] = true;
    } else {
      lag_terms_.col(col) = old_term;
    }
  }

  // Lag rows with a compensating trend shift.
  Eigen::VectorXd delta(kc);
  for (std::size_t i = 0; i < p_; ++i) {
    const std::size_t k = spec_.n_basis_trend + p_ + i;
    const auto col = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < kc; ++j) delta(j) = step_[k] * normal_(rng_);
    const double log_u = std::log(uniform_(rng_));
    row = c_.col(col) + delta;
    if (row.minCoeff() < 0.0) continue;
    const double new_max = row.maxCoeff();
    double mass = 0.0;
    for (std::size_t m = 0; m < p_; ++m) mass += m == i ? new_max : row_max_[m];
    if (mass > max_mass) continue;
    Eigen::VectorXd b_prop = b_ + compensation_[i] * delta;
    if (!(b_prop.minCoeff() > 0.0)) continue;

    Eigen::VectorXd trend_prop = b_design_ * b_prop;
    Eigen::VectorXd old_term = lag_terms_.col(col);
    lag_terms_.col(col) = (c_design_ * row).cwiseProduct(lagged_.col(col));
    Eigen::VectorXd total = lag_terms_.rowwise().sum();
    const double ll = evaluate(trend_prop + total);
    const double trend_prior = log_prior_b(b_prop);
    const double row_prior =
        spec_.lag_prior == LagPrior::Shrinkage
            ? log_lag_shrinkage(std::span<const double>(row.data(), static_cast<std::size_t>(kc)),
                                spec_.shrinkage_shape, spec_.shrinkage_rate)
            : 0.0;
    const double log_alpha =
        (ll + trend_prior + row_prior) - (log_lik_ + log_prior_trend_ + row_prior_[i]);
    if (log_u < log_alpha) {
      b_ = std::move(b_prop);
      trend_ = std::move(trend_prop);
      for (Eigen::Index j = 0; j < kb; ++j) state_.b[static_cast<std::size_t>(j)] = b_(j);
      c_.col(col) = row;
      lag_total_ = std::move(total);
      row_max_[i] = new_max;
      for (Eigen::Index j = 0; j < kc; ++j) state_.c[i][static_cast<std::size_t>(j)] = row(j);
      log_lik_ = ll;
      log_prior_trend_ = trend_prior;
      row_prior_[i] = row_prior;
      accepted[k] = true;
    } else {
      lag_terms_.col(col) = old_term;
    }
  }
}

PosteriorDraws fit(std::span<const std::int64_t> series, Date start_date, const ModelSpec& spec,
                   const McmcConfig& config) {
  spec.validate();
  config.validate();
  const std::size_t T = series.size();
  if (T <= spec.lag_order + spec.n_basis_trend)
    throw std::invalid_argument("fit: series length " + std::to_string(T) +
                                " must exceed lag order + trend basis size (" +
                                std::to_string(spec.lag_order + spec.n_basis_trend) + ")");
  for (auto v : series)
    if (v < 0) throw std::invalid_argument("fit: series contains a negative count");

  PosteriorDraws out;
  out.spec = spec;
  out.config = config;
  out.start_date = start_date;
  out.series_length = T;
  out.prior_scale = config.prior_scale > 0.0 ? config.prior_scale : default_prior_scale(series);
  if (std::all_of(series.begin(), series.end(), [](std::int64_t v) { return v == 0; }))
    out.warnings.emplace_back(
        "series is identically zero: the posterior is degenerate (trend pushed to zero, lag "
        "coefficients unidentified)");

  std::vector<ChainResult> results(config.n_chains);
  if (config.n_chains == 1) {
    results[0] = run_chain(series, spec, config, out.prior_scale, 0);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(config.n_chains);
    std::vector<std::exception_ptr> errors(config.n_chains);
    for (std::size_t c = 0; c < config.n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          results[c] = run_chain(series, spec, config, out.prior_scale, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
    workers.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  for (auto& r : results) {
    out.draws.insert(out.draws.end(), std::make_move_iterator(r.draws.begin()),
                     std::make_move_iterator(r.draws.end()));
    out.log_posterior.insert(out.log_posterior.end(), r.log_posterior.begin(),
                             r.log_posterior.end());
    out.diagnostics.insert(out.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  }
  return out;
}

PosteriorDraws fit(const AdjustedSeries& series, const ModelSpec& spec, const McmcConfig& config) {
  return fit(series.values, series.start_date, spec, config);
}

}  // namespace abusetrend::tvbarc
