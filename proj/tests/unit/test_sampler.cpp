#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "abusetrend/checkpoint.hpp"
#include "abusetrend/sampler.hpp"
#include "abusetrend/simulate.hpp"
#include "abusetrend/summary.hpp"

using namespace abusetrend;
using namespace abusetrend::tvbarc;

namespace {

std::vector<std::int64_t> iid_poisson(double mean, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::int64_t> d(mean);
  std::vector<std::int64_t> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

McmcConfig short_config(std::uint64_t seed) {
  McmcConfig c;
  c.n_iter = 1200;
  c.n_burn = 400;
  c.thin = 4;
  c.seed = seed;
  return c;
}

ModelSpec lag3() {
  ModelSpec s;
  s.lag_order = 3;
  s.n_basis_trend = 5;
  s.n_basis_lag = 4;
  return s;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("config validation") {
  McmcConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.retained_per_chain() == 1000);
  c.n_burn = c.n_iter;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = McmcConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = McmcConfig{};
  c.target_accept = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("identifiability guard and negative counts") {
  const ModelSpec spec;  // p = 10, K = 8
  const auto x18 = iid_poisson(5.0, 18, 1);
  CHECK_THROWS_AS(fit(x18, Date{}, spec, short_config(1)), std::invalid_argument);
  auto x19 = iid_poisson(5.0, 19, 1);
  CHECK_NOTHROW(fit(x19, Date{}, spec, short_config(1)));
  x19[3] = -1;
  CHECK_THROWS_AS(fit(x19, Date{}, spec, short_config(1)), std::invalid_argument);
}

TEST_CASE("same seed gives bit-identical draws") {
  const auto x = iid_poisson(12.0, 200, 3);
  const auto a = fit(x, Date{}, lag3(), short_config(99));
  const auto b = fit(x, Date{}, lag3(), short_config(99));
  CHECK(a.draws == b.draws);
  CHECK(a.log_posterior == b.log_posterior);
  const auto c = fit(x, Date{}, lag3(), short_config(100));
  CHECK_FALSE(a.draws == c.draws);

  auto multi = short_config(99);
  multi.n_chains = 3;
  const auto m1 = fit(x, Date{}, lag3(), multi);
  const auto m2 = fit(x, Date{}, lag3(), multi);
  CHECK(m1.draws == m2.draws);
  REQUIRE(m1.draws.size() == 3 * multi.retained_per_chain());
  // Chain 0 uses the seed as given, so it reproduces the single-chain run.
  CHECK(std::equal(a.draws.begin(), a.draws.end(), m1.draws.begin()));
}

TEST_CASE("every retained draw satisfies the constraints") {
  const auto x = iid_poisson(8.0, 300, 4);
  auto spec = lag3();
  spec.stability_margin = 0.05;
  const auto d = fit(x, Date{}, spec, short_config(5));
  const ModelBases bases(spec);
  for (const auto& p : d.draws) {
    REQUIRE(satisfies_constraints(p, spec));
    for (int g = 0; g < 200; ++g) {
      const double u = g / 199.0;
      double total = 0.0;
      for (std::size_t i = 1; i <= spec.lag_order; ++i) total += lag_coef_at(p, bases.lag, i, u);
      REQUIRE(total < 1.0);
    }
  }
}

TEST_CASE("cached log posterior matches a recomputation and rejections leave it unchanged") {
  const auto x = iid_poisson(15.0, 150, 6);
  const ModelSpec spec = lag3();
  const ModelBases bases(spec);
  const double scale = default_prior_scale(x);
  Chain chain(x, spec, scale, initial_params(x, spec), 123, 0.05, 0.02);
  std::vector<bool> accepted(chain.n_blocks());
  double previous = chain.log_posterior();
  TvbarcParams previous_state = chain.state();
  int all_rejected = 0;
  for (int it = 0; it < 400; ++it) {
    chain.sweep(accepted);
    const auto& s = chain.state();
    const double ll = log_likelihood(s, bases, x, spec.lag_order);
    const double lp = log_prior(s, spec, scale);
    REQUIRE(chain.log_likelihood() == doctest::Approx(ll).epsilon(1e-10));
    REQUIRE(chain.log_posterior() == doctest::Approx(ll + lp).epsilon(1e-10));
    if (std::none_of(accepted.begin(), accepted.end(), [](bool b) { return b; })) {
      ++all_rejected;
      CHECK(s == previous_state);
      CHECK(chain.log_posterior() == previous);
    }
    previous = chain.log_posterior();
    previous_state = s;
  }
  // Large steps force some fully rejected sweeps.
  Chain wild(x, spec, scale, initial_params(x, spec), 7, 5.0, 2.0);
  for (int it = 0; it < 50; ++it) {
    const auto before = wild.state();
    const double lp = wild.log_posterior();
    wild.sweep(accepted);
    if (std::none_of(accepted.begin(), accepted.end(), [](bool b) { return b; })) {
      ++all_rejected;
      CHECK(wild.state() == before);
      CHECK(wild.log_posterior() == lp);
    }
  }
  CHECK(all_rejected > 0);
}

TEST_CASE("step sizes adapt during burn-in only and diagnostics are reported") {
  const auto x = iid_poisson(20.0, 250, 8);
  const auto d = fit(x, Date{}, lag3(), short_config(11));
  const std::size_t blocks = 5 + 2 * 3;
  REQUIRE(d.diagnostics.size() == blocks);
  CHECK(d.diagnostics[0].block == "b1");
  CHECK(d.diagnostics[5].block == "c1");
  CHECK(d.diagnostics[8].block == "c1+trend");
  for (const auto& b : d.diagnostics) {
    CHECK(b.acceptance_rate >= 0.0);
    CHECK(b.acceptance_rate <= 1.0);
    CHECK(b.step_size > 0.0);
  }
  // Trend blocks see plenty of data; adaptation lands near the target.
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(d.diagnostics[j].acceptance_rate > 0.1);
    CHECK(d.diagnostics[j].acceptance_rate < 0.6);
  }
}

TEST_CASE("all-zero series fits with a degenerate-posterior warning") {
  const std::vector<std::int64_t> zeros(60, 0);
  const auto d = fit(zeros, Date{}, lag3(), short_config(2));
  CHECK(d.draws.size() == short_config(2).retained_per_chain());
  REQUIRE_FALSE(d.warnings.empty());
  CHECK(d.warnings[0].find("degenerate") != std::string::npos);
}

TEST_CASE("recovers constant trend 20 and a_1 = 0.4") {
  sim::ParamCurves curves;
  curves.trend = sim::Curve::constant(20.0);
  curves.lags.assign(10, sim::Curve::constant(0.0));
  curves.lags[0] = sim::Curve::constant(0.4);
  const auto series = sim::simulate(curves, 1000, 1);
  McmcConfig cfg;
  cfg.seed = 1;
  const auto draws = fit(series, ModelSpec{}, cfg);
  const auto s = summarize(draws);
  for (std::size_t t = 0; t < 1000; ++t) {
    const double u = static_cast<double>(t + 1) / 1000.0;
    if (u < 0.1 || u > 0.9) continue;
    REQUIRE(std::fabs(s.trend.mean[t] - 20.0) <= 3.0);
    REQUIRE(std::fabs(s.lags[0].mean[t] - 0.4) <= 0.1);
  }
}

TEST_CASE("i.i.d. Poisson(30) with p = 5 finds no lag signal") {
  const auto x = iid_poisson(30.0, 730, 30);
  ModelSpec spec;
  spec.lag_order = 5;
  McmcConfig cfg;
  cfg.seed = 31;
  const auto s = summarize(fit(x, Date{}, spec, cfg));
  for (const auto& lag : s.lags)
    for (double m : lag.mean) REQUIRE(m < 0.15);
}

TEST_CASE("checkpoint round trip") {
  const auto x = iid_poisson(9.0, 120, 12);
  auto spec = lag3();
  spec.shrinkage_rate = 0.05;
  const auto d = fit(x, Date::from_ymd(2021, 3, 4), spec, short_config(13));
  std::stringstream buf;
  save_draws(buf, d);
  const auto back = load_draws(buf);
  CHECK(back.draws == d.draws);
  CHECK(back.log_posterior == d.log_posterior);
  CHECK(back.start_date == d.start_date);
  CHECK(back.series_length == d.series_length);
  CHECK(back.prior_scale == d.prior_scale);
  CHECK(back.spec.shrinkage_rate == 0.05);
  CHECK(back.spec.lag_prior == LagPrior::Shrinkage);
  CHECK(back.config.seed == 13);
  CHECK(back.diagnostics.size() == d.diagnostics.size());

  std::stringstream bad("{\"format\": \"something-else\", \"version\": 1}");
  CHECK_THROWS_AS(load_draws(bad), std::runtime_error);
  std::stringstream junk("not json");
  CHECK_THROWS_AS(load_draws(junk), std::runtime_error);
}

}  // TEST_SUITE

TEST_SUITE("summary") {

TEST_CASE("a single draw collapses the band") {
  const ModelSpec spec = lag3();
  const ModelBases bases(spec);
  TvbarcParams p{{1, 2, 3, 4, 5}, {{0.1, 0.2, 0.3, 0.1}, {0, 0, 0, 0}, {0.05, 0.05, 0.05, 0.05}}};
  const std::vector<TvbarcParams> one{p};
  const auto s = summarize(one, bases, 40, 3);
  for (std::size_t t = 0; t < 40; ++t) {
    CHECK(s.trend.mean[t] == s.trend.lower[t]);
    CHECK(s.trend.mean[t] == s.trend.upper[t]);
    CHECK(s.lags[0].mean[t] == s.lags[0].upper[t]);
  }
  const std::vector<TvbarcParams> none;
  CHECK_THROWS_AS(summarize(none, bases, 40, 3), std::invalid_argument);
}

TEST_CASE("constant trend draws give a flat curve") {
  const ModelSpec spec = lag3();
  const ModelBases bases(spec);
  std::vector<TvbarcParams> draws;
  for (int i = 0; i < 50; ++i) {
    const double m = 10.0 + i * 0.1;
    draws.push_back({std::vector<double>(5, m), std::vector<std::vector<double>>(3, std::vector<double>(4, 0.1))});
  }
  const auto s = summarize(draws, bases, 60, 3);
  for (std::size_t t = 1; t < 60; ++t) {
    CHECK(s.trend.mean[t] == doctest::Approx(s.trend.mean[0]).epsilon(1e-12));
    CHECK(s.trend.lower[t] == doctest::Approx(s.trend.lower[0]).epsilon(1e-12));
  }
}

TEST_CASE("quantiles match a brute-force sort at random days") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ModelSpec spec = lag3();
  const ModelBases bases(spec);
  std::vector<TvbarcParams> draws;
  for (int i = 0; i < 301; ++i) {
    TvbarcParams p;
    for (int j = 0; j < 5; ++j) p.b.push_back(50.0 * u(rng));
    p.c.assign(3, {});
    for (auto& row : p.c)
      for (int j = 0; j < 4; ++j) row.push_back(0.3 * u(rng));
    draws.push_back(p);
  }
  const std::size_t T = 90;
  const auto s = summarize(draws, bases, T, 3);
  std::uniform_int_distribution<std::size_t> day(0, T - 1);
  for (int k = 0; k < 3; ++k) {
    const std::size_t t = day(rng);
    const double x = static_cast<double>(t + 1) / static_cast<double>(T);
    std::vector<double> vals;
    for (const auto& p : draws) vals.push_back(lag_coef_at(p, bases.lag, 2, x));
    std::sort(vals.begin(), vals.end());
    // n = 301: type-7 positions 7.5 and 292.5 (0-based).
    const double lo = vals[7] + 0.5 * (vals[8] - vals[7]);
    const double hi = vals[292] + 0.5 * (vals[293] - vals[292]);
    CHECK(s.lags[1].lower[t] == doctest::Approx(lo).epsilon(1e-13));
    CHECK(s.lags[1].upper[t] == doctest::Approx(hi).epsilon(1e-13));
    double mean = 0.0;
    for (double v : vals) mean += v;
    CHECK(s.lags[1].mean[t] == doctest::Approx(mean / 301.0).epsilon(1e-12));
  }
  for (std::size_t t = 0; t < T; ++t) {
    CHECK(s.trend.lower[t] <= s.trend.mean[t]);
    CHECK(s.trend.mean[t] <= s.trend.upper[t]);
  }
}

TEST_CASE("quantile and effective sample size helpers") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  const std::vector<double> flat(100, 2.0);
  CHECK(effective_sample_size(flat) == 100.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> iid(4000), ar(4000);
  double prev = 0.0;
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = n(rng);
    prev = 0.9 * prev + n(rng);
    ar[i] = prev;
  }
  CHECK(effective_sample_size(iid) > 3000.0);
  // AR(1) with phi = 0.9: n (1 - phi) / (1 + phi) ~ 210.
  const double ess = effective_sample_size(ar);
  CHECK(ess > 120.0);
  CHECK(ess < 350.0);
}

TEST_CASE("summary CSV layout") {
  const ModelSpec spec = lag3();
  const ModelBases bases(spec);
  const std::vector<TvbarcParams> one{
      {{1, 1, 1, 1, 1}, {{0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 0}, {0, 0, 0, 0}}}};
  const auto s = summarize(one, bases, 5, 3, Date::from_ymd(2020, 1, 1));
  std::ostringstream out;
  write_summary_csv(out, s);
  std::istringstream in(out.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "date,mu_mean,mu_lo,mu_hi,a1_mean,a1_lo,a1_hi,a2_mean,a2_lo,a2_hi,a3_mean,a3_lo,a3_hi");
  std::vector<double> fields;
  std::istringstream row(first.substr(11));
  for (std::string f; std::getline(row, f, ',');) fields.push_back(std::stod(f));
  CHECK(first.rfind("2020-01-01,", 0) == 0);
  REQUIRE(fields.size() == 12);
  for (int i : {0, 1, 2}) CHECK(fields[i] == doctest::Approx(1.0).epsilon(1e-14));
  for (int i : {3, 4, 5}) CHECK(fields[i] == doctest::Approx(0.5).epsilon(1e-14));
  for (int i = 6; i < 12; ++i) CHECK(fields[i] == 0.0);
}

}  // TEST_SUITE
