#include "abusetrend/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Core>
#include <Eigen/QR>

#include "abusetrend/bspline.hpp"
#include "abusetrend/csv.hpp"

namespace abusetrend::smooth {
namespace {

void require_finite(const DailySeries& series) {
  for (double v : series.values)
    if (!std::isfinite(v)) throw std::invalid_argument("smoother input contains non-finite values");
}

// Penalized least squares ||y - B c||^2 + lambda ||D c||^2, solved by QR of
// the stacked matrix [B; sqrt(lambda) D]. This avoids squaring the condition
// number, which matters for large penalties.
struct SplineProblem {
  Eigen::MatrixXd design;   // B
  Eigen::MatrixXd penalty;  // D
  Eigen::VectorXd y;

  explicit SplineProblem(const DailySeries& series) {
    const std::size_t n = series.size();
    const std::size_t k = smoother_basis_size(n);
    const BSplineBasis basis(k, 3);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    design = basis.design(u);
    y = Eigen::Map<const Eigen::VectorXd>(series.values.data(), static_cast<Eigen::Index>(n));

    const auto g = basis.greville();
    const auto kk = static_cast<Eigen::Index>(k);
    const double h = 1.0 / static_cast<double>(k - 1);  // mean Greville spacing
    penalty = Eigen::MatrixXd::Zero(kk - 2, kk);
    for (Eigen::Index j = 1; j + 1 < kk; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double left = g[ju] - g[ju - 1];
      const double right = g[ju + 1] - g[ju];
      penalty(j - 1, j - 1) = h / left;
      penalty(j - 1, j) = -h / left - h / right;
      penalty(j - 1, j + 1) = h / right;
    }
  }

  Eigen::HouseholderQR<Eigen::MatrixXd> factor(double lambda) const {
    Eigen::MatrixXd stacked(design.rows() + penalty.rows(), design.cols());
    stacked << design, std::sqrt(lambda) * penalty;
    return Eigen::HouseholderQR<Eigen::MatrixXd>(stacked);
  }

  Eigen::VectorXd coefficients(const Eigen::HouseholderQR<Eigen::MatrixXd>& qr) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(design.rows() + penalty.rows());
    rhs.head(y.size()) = y;
    const Eigen::VectorXd qty = qr.householderQ().transpose() * rhs;
    const auto k = design.cols();
    if (qr.matrixQR().diagonal().cwiseAbs().minCoeff() == 0.0)
      throw std::runtime_error("spline smoother: rank-deficient basis");
    return qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty.head(k));
  }

  double gcv(double lambda) const {
    const auto qr = factor(lambda);
    const Eigen::VectorXd coef = coefficients(qr);
    const double rss = (y - design * coef).squaredNorm();
    // tr H = ||B R^-1||_F^2
    const auto k = design.cols();
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd br =
        r.transpose().triangularView<Eigen::Lower>().solve(design.transpose()).transpose();
    const double trace = br.squaredNorm();
    const double n = static_cast<double>(y.size());
    const double denom = n - trace;
    if (!(denom > 1e-9)) return std::numeric_limits<double>::infinity();
    return n * rss / (denom * denom);
  }
};

SmoothedSeries finish(const DailySeries& series, const SplineProblem& problem, double lambda) {
  SmoothedSeries out;
  out.start_date = series.start_date;
  out.method = "penalized-spline";
  out.penalty = lambda;
  out.n_basis = static_cast<std::size_t>(problem.design.cols());
  const Eigen::VectorXd fitted = problem.design * problem.coefficients(problem.factor(lambda));
  out.fitted.assign(fitted.data(), fitted.data() + fitted.size());
  return out;
}

}  // namespace

SmoothedSeries rolling_mean(const DailySeries& series, std::size_t window) {
  const std::size_t n = series.size();
  if (window == 0 || window % 2 == 0)
    throw std::invalid_argument("rolling window must be a positive odd integer");
  if (window > n)
    throw std::invalid_argument("rolling window " + std::to_string(window) +
                                " exceeds series length " + std::to_string(n));
  SmoothedSeries out;
  out.start_date = series.start_date;
  out.method = "rolling-mean";
  out.window = window;
  out.fitted.resize(n);
  const std::size_t half = window / 2;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(n - 1, t + half);
    double sum = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) sum += series.values[k];
    out.fitted[t] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::size_t smoother_basis_size(std::size_t n) {
  return std::min(n, std::clamp<std::size_t>(n / 3, 4, 40));
}

SmoothedSeries spline_smooth(const DailySeries& series, double penalty) {
  if (series.size() < 4) throw std::invalid_argument("spline smoother needs at least 4 values");
  if (!(penalty >= 0.0) || !std::isfinite(penalty))
    throw std::invalid_argument("spline penalty must be a finite non-negative number");
  require_finite(series);
  const SplineProblem problem(series);
  return finish(series, problem, penalty);
}

SmoothedSeries spline_smooth_gcv(const DailySeries& series) {
  if (series.size() < 4) throw std::invalid_argument("spline smoother needs at least 4 values");
  require_finite(series);
  const SplineProblem problem(series);
  double best_lambda = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k = -24; k <= 32; ++k) {
    const double lambda = std::pow(10.0, k / 4.0);
    const double score = problem.gcv(lambda);
    if (score < best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  if (!std::isfinite(best_score)) best_lambda = 1.0;
  auto out = finish(series, problem, best_lambda);
  if (std::isfinite(best_score)) out.gcv_score = best_score;
  return out;
}

void write_smoothed(std::ostream& out, const DailySeries& input, const SmoothedSeries& smoothed) {
  out << "date,value,smoothed\n";
  for (std::size_t t = 0; t < input.size(); ++t)
    out << input.date_at(t).iso() << ',' << csv::format_double(input.values[t]) << ','
        << csv::format_double(smoothed.fitted[t]) << '\n';
}

}  // namespace abusetrend::smooth
