#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"

#include "abusetrend/bspline.hpp"
#include "abusetrend/tvbarc.hpp"
#include "oracles.hpp"

using namespace abusetrend;
using namespace abusetrend::tvbarc;

namespace {

// 50 counts used by the frozen log-likelihood check.
const std::vector<std::int64_t> kSeries50{3, 5, 4, 7, 6,  2, 8, 9, 5, 4,  6, 7, 3, 2,  5, 8, 10,
                                          7, 6, 5, 4, 3,  6, 7, 9, 11, 8, 6, 5, 4, 7,  8, 6, 5,
                                          3, 4, 6, 9, 12, 10, 7, 5, 4, 6, 8, 7, 5, 3,  2, 4};

ModelSpec small_spec() {
  ModelSpec s;
  s.lag_order = 3;
  s.n_basis_trend = 4;
  s.n_basis_lag = 4;
  return s;
}

TvbarcParams frozen_params() {
  return {{2.0, 5.0, 3.0, 4.0},
          {{0.1, 0.2, 0.05, 0.15}, {0.0, 0.1, 0.2, 0.1}, {0.05, 0.0, 0.0, 0.1}}};
}

TvbarcParams random_params(std::mt19937_64& rng, const ModelSpec& spec) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TvbarcParams p;
  for (std::size_t j = 0; j < spec.n_basis_trend; ++j) p.b.push_back(20.0 * u(rng));
  const double budget = (1.0 - spec.stability_margin) / static_cast<double>(spec.lag_order);
  p.c.assign(spec.lag_order, {});
  for (auto& row : p.c)
    for (std::size_t j = 0; j < spec.n_basis_lag; ++j) row.push_back(budget * u(rng));
  return p;
}

oracle::Params to_oracle(const TvbarcParams& p) { return {p.b, p.c}; }

}  // namespace

TEST_SUITE("bspline") {

TEST_CASE("partition of unity and non-negativity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t k : {4, 5, 8, 13, 40}) {
    const BSplineBasis basis(k, 3);
    for (int i = 0; i < 500; ++i) {
      const double x = i == 0 ? 0.0 : i == 1 ? 1.0 : u(rng);
      const auto v = basis.eval(x);
      double sum = 0.0;
      for (double b : v) {
        CHECK(b >= 0.0);
        sum += b;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("clamped endpoints") {
  const BSplineBasis basis(8, 3);
  const auto at0 = basis.eval(0.0);
  const auto at1 = basis.eval(1.0);
  CHECK(at0[0] == 1.0);
  CHECK(at1[7] == 1.0);
  for (std::size_t j = 1; j < 8; ++j) CHECK(at0[j] == 0.0);
  for (std::size_t j = 0; j < 7; ++j) CHECK(at1[j] == 0.0);
}

TEST_CASE("degree 3, K = 8 at u = 0.5") {
  const BSplineBasis basis(8, 3);
  const auto v = basis.eval(0.5);
  const std::vector<double> frozen{0.0, 0.0, 1.0 / 48, 23.0 / 48, 23.0 / 48, 1.0 / 48, 0.0, 0.0};
  const auto ref = oracle::basis_row(8, 3, 0.5);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(v[j] == doctest::Approx(frozen[j]).epsilon(1e-14));
    CHECK(std::fabs(v[j] - ref[j]) <= 1e-14);
  }
  const auto k5 = BSplineBasis(5, 3).eval(0.3);
  const std::vector<double> frozen5{0.064, 0.558, 0.324, 0.054, 0.0};
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::fabs(k5[j] - frozen5[j]) <= 1e-14);
}

TEST_CASE("matches the recursive oracle everywhere") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t deg : {0, 1, 2, 3}) {
    for (std::size_t k : {deg + 1, deg + 3, std::size_t{11}}) {
      const BSplineBasis basis(k, deg);
      for (int i = 0; i < 200; ++i) {
        const double x = i == 0 ? 1.0 : u(rng);
        const auto v = basis.eval(x);
        const auto ref = oracle::basis_row(k, deg, x);
        for (std::size_t j = 0; j < k; ++j) REQUIRE(std::fabs(v[j] - ref[j]) <= 1e-13);
      }
    }
  }
}

TEST_CASE("domain and shape errors") {
  const BSplineBasis basis(5, 3);
  CHECK_THROWS_AS(basis.eval(-1e-12), std::domain_error);
  CHECK_THROWS_AS(basis.eval(1.0 + 1e-12), std::domain_error);
  CHECK_THROWS_AS(basis.eval(std::numeric_limits<double>::quiet_NaN()), std::domain_error);
  CHECK_THROWS_AS(BSplineBasis(3, 3), std::invalid_argument);
}

TEST_CASE("greville abscissae reproduce the identity") {
  const BSplineBasis basis(9, 3);
  const auto g = basis.greville();
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const auto v = basis.eval(x);
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += g[j] * v[j];
    CHECK(s == doctest::Approx(x).epsilon(1e-13));
  }
}

}  // TEST_SUITE

TEST_SUITE("tvbarc") {

TEST_CASE("spec validation") {
  ModelSpec s;
  CHECK_NOTHROW(s.validate());
  s.n_basis_lag = 3;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ModelSpec{};
  s.lag_order = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = ModelSpec{};
  s.stability_margin = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK(parse_lag_prior("flat") == LagPrior::Flat);
  CHECK(lag_prior_name(LagPrior::Shrinkage) == "shrinkage");
  CHECK_THROWS_AS(parse_lag_prior("horseshoe"), std::invalid_argument);
}

TEST_CASE("lambda: direct substitution and floor") {
  ModelSpec s = small_spec();
  s.lag_order = 2;
  const ModelBases bases(s);
  TvbarcParams p{{2.0, 2.0, 2.0, 2.0}, {{0.3, 0.3, 0.3, 0.3}, {0.0, 0.0, 0.0, 0.0}}};
  const std::vector<std::int64_t> hist{10, 4};
  CHECK(lambda_at(p, bases, 5, 20, hist) == doctest::Approx(5.0).epsilon(1e-14));

  TvbarcParams zero{{0, 0, 0, 0}, {{0, 0, 0, 0}, {0, 0, 0, 0}}};
  const std::vector<std::int64_t> zeros{0, 0};
  CHECK(lambda_at(zero, bases, 5, 20, zeros) == kLambdaFloor);

  const std::vector<std::int64_t> short_hist{1};
  CHECK_THROWS_AS(lambda_at(p, bases, 5, 20, short_hist), std::invalid_argument);
  CHECK_THROWS_AS(lambda_at(p, bases, 2, 20, hist), std::invalid_argument);
  CHECK_THROWS_AS(lambda_at(p, bases, 21, 20, hist), std::invalid_argument);
}

TEST_CASE("lambda matches the double-loop oracle on random instances") {
  std::mt19937_64 rng(30);
  const ModelSpec spec = small_spec();
  const ModelBases bases(spec);
  std::uniform_int_distribution<std::int64_t> x(0, 40);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::int64_t> series(30);
    for (auto& v : series) v = x(rng);
    const auto params = random_params(rng, spec);
    for (std::size_t t = spec.lag_order + 1; t <= series.size(); ++t) {
      std::vector<std::int64_t> hist;
      for (std::size_t i = 1; i <= spec.lag_order; ++i) hist.push_back(series[t - 1 - i]);
      const double ref = oracle::lambda(to_oracle(params), 4, 4, t, series);
      CHECK(lambda_at(params, bases, t, series.size(), hist) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-likelihood closed forms") {
  ModelSpec s = small_spec();
  s.lag_order = 1;
  const ModelBases bases(s);
  TvbarcParams one{{1, 1, 1, 1}, {{0, 0, 0, 0}}};
  const std::vector<std::int64_t> x0{7, 0};
  CHECK(log_likelihood(one, bases, x0, 1) == doctest::Approx(-1.0).epsilon(1e-14));

  TvbarcParams three{{3, 3, 3, 3}, {{0, 0, 0, 0}}};
  const std::vector<std::int64_t> x3{1, 3, 3};
  const double term = 3 * std::log(3.0) - 3 - std::log(6.0);
  CHECK(log_likelihood(three, bases, x3, 1) == doctest::Approx(2 * term).epsilon(1e-14));

  const std::vector<std::int64_t> tooshort{1};
  CHECK_THROWS_AS(log_likelihood(one, bases, tooshort, 1), std::invalid_argument);
}

TEST_CASE("log-likelihood of the 50-point series") {
  const ModelSpec spec = small_spec();
  const ModelBases bases(spec);
  const double ll = log_likelihood(frozen_params(), bases, kSeries50, 3);
  CHECK(ll == doctest::Approx(-110.46330452858525).epsilon(1e-12));
  CHECK(ll == doctest::Approx(oracle::log_likelihood(to_oracle(frozen_params()), 4, 4, kSeries50, 3))
                  .epsilon(1e-12));
  std::vector<std::int64_t> h{kSeries50[28], kSeries50[27], kSeries50[26]};
  CHECK(lambda_at(frozen_params(), bases, 30, 50, h) == doctest::Approx(5.3372).epsilon(1e-13));
}

TEST_CASE("log-likelihood agrees with per-term oracle on 100 random instances") {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<std::size_t> len(8, 40);
  std::uniform_int_distribution<std::int64_t> x(0, 25);
  const ModelSpec spec = small_spec();
  const ModelBases bases(spec);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::int64_t> series(len(rng));
    for (auto& v : series) v = x(rng);
    const auto params = random_params(rng, spec);
    const double ref = oracle::log_likelihood(to_oracle(params), 4, 4, series, spec.lag_order);
    REQUIRE(std::fabs(log_likelihood(params, bases, series, spec.lag_order) - ref) <= 1e-9);
  }
}

TEST_CASE("log prior: half-normal at zero, scale family, constraint boundary") {
  ModelSpec spec;
  spec.lag_prior = LagPrior::Flat;
  TvbarcParams p;
  p.b.assign(spec.n_basis_trend, 0.0);
  p.c.assign(spec.lag_order, std::vector<double>(spec.n_basis_lag, 0.01));
  const double k = static_cast<double>(spec.n_basis_trend);
  const double expected = k * std::log(std::sqrt(2.0 / std::numbers::pi) / 3.0);
  CHECK(log_prior(p, spec, 3.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(log_prior(p, spec, 6.0) == doctest::Approx(expected - k * std::log(2.0)).epsilon(1e-14));

  // sum_i max_j c_ij = 1 is outside the region for any epsilon > 0.
  for (auto& row : p.c) row.assign(spec.n_basis_lag, 0.0);
  for (std::size_t i = 0; i < spec.lag_order; ++i) p.c[i][i % spec.n_basis_lag] = 0.1;
  CHECK(lag_mass_bound(p) == doctest::Approx(1.0));
  CHECK(log_prior(p, spec, 3.0) == -std::numeric_limits<double>::infinity());
  p.c[0][0] = 0.0;
  CHECK(std::isfinite(log_prior(p, spec, 3.0)));
  p.b[0] = -1.0;
  CHECK(log_prior(p, spec, 3.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("shrinkage lag prior adds the integrated gamma-exponential row density") {
  ModelSpec spec = small_spec();
  spec.lag_prior = LagPrior::Shrinkage;
  spec.shrinkage_shape = 1.5;
  spec.shrinkage_rate = 0.02;
  auto p = frozen_params();
  ModelSpec flat = spec;
  flat.lag_prior = LagPrior::Flat;
  double rows = 0.0;
  for (const auto& row : p.c) {
    double s = 0.0;
    for (double v : row) s += v;
    const double kk = 4.0;
    rows += std::lgamma(1.5 + kk) - std::lgamma(1.5) + 1.5 * std::log(0.02) - (1.5 + kk) * std::log(0.02 + s);
    CHECK(log_lag_shrinkage(row, 1.5, 0.02) ==
          doctest::Approx(std::lgamma(5.5) - std::lgamma(1.5) + 1.5 * std::log(0.02) - 5.5 * std::log(0.02 + s))
              .epsilon(1e-14));
  }
  CHECK(log_prior(p, spec, 4.0) == doctest::Approx(log_prior(p, flat, 4.0) + rows).epsilon(1e-13));
}

TEST_CASE("constraints and curve evaluation") {
  const ModelSpec spec = small_spec();
  const ModelBases bases(spec);
  auto p = frozen_params();
  CHECK(satisfies_constraints(p, spec));
  CHECK(lag_mass_bound(p) == doctest::Approx(0.5));
  CHECK(trend_at(p, bases.trend, 0.0) == 2.0);
  CHECK(trend_at(p, bases.trend, 1.0) == 4.0);
  CHECK(lag_coef_at(p, bases.lag, 1, 1.0) == doctest::Approx(0.15));
  p.c[1].pop_back();
  CHECK_FALSE(satisfies_constraints(p, spec));
  p = frozen_params();
  p.c[2][0] = -1e-12;
  CHECK_FALSE(satisfies_constraints(p, spec));
}

}  // TEST_SUITE
