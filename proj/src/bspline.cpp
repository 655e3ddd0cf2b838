#include "abusetrend/bspline.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace abusetrend {

BSplineBasis::BSplineBasis(std::size_t n_basis, std::size_t degree)
    : n_basis_(n_basis), degree_(degree) {
  if (n_basis < degree + 1)
    throw std::invalid_argument("BSplineBasis: need at least degree+1 = " +
                                std::to_string(degree + 1) + " basis functions, got " +
                                std::to_string(n_basis));
  const std::size_t n_interior = n_basis - degree - 1;
  const double spans = static_cast<double>(n_interior + 1);
  knots_.reserve(n_basis + degree + 1);
  knots_.insert(knots_.end(), degree + 1, 0.0);
  for (std::size_t i = 1; i <= n_interior; ++i) knots_.push_back(static_cast<double>(i) / spans);
  knots_.insert(knots_.end(), degree + 1, 1.0);
}

std::size_t BSplineBasis::eval_into(double u, std::span<double> out) const {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::domain_error("BSplineBasis::eval: u = " + std::to_string(u) + " outside [0,1]");
  if (out.size() != n_basis_) throw std::invalid_argument("BSplineBasis::eval: bad output size");
  std::fill(out.begin(), out.end(), 0.0);

  // Knot span s with t_s <= u < t_{s+1}; the closed right end uses the last span.
  std::size_t span = n_basis_ - 1;
  if (u < 1.0) {
    auto it = std::upper_bound(knots_.begin() + static_cast<std::ptrdiff_t>(degree_),
                               knots_.begin() + static_cast<std::ptrdiff_t>(n_basis_ + 1), u);
    span = static_cast<std::size_t>(it - knots_.begin()) - 1;
  }

  // Triangular de Boor scheme for the degree+1 functions supported on the span.
  const std::size_t d = degree_;
  double local[32];
  double left[32];
  double right[32];
  std::vector<double> heap;
  double* n = local;
  double* l = left;
  double* r = right;
  if (d + 1 > 32) {
    heap.resize(3 * (d + 1));
    n = heap.data();
    l = n + d + 1;
    r = l + d + 1;
  }
  n[0] = 1.0;
  for (std::size_t j = 1; j <= d; ++j) {
    l[j] = u - knots_[span + 1 - j];
    r[j] = knots_[span + j] - u;
    double saved = 0.0;
    for (std::size_t k = 0; k < j; ++k) {
      const double tmp = n[k] / (r[k + 1] + l[j - k]);
      n[k] = saved + r[k + 1] * tmp;
      saved = l[j - k] * tmp;
    }
    n[j] = saved;
  }
  const std::size_t first = span - d;
  for (std::size_t k = 0; k <= d; ++k) out[first + k] = n[k];
  return first;
}

std::vector<double> BSplineBasis::eval(double u) const {
  std::vector<double> out(n_basis_);
  eval_into(u, out);
  return out;
}

Eigen::MatrixXd BSplineBasis::design(std::span<const double> points) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(n_basis_));
  std::vector<double> row(n_basis_);
  for (std::size_t i = 0; i < points.size(); ++i) {
    eval_into(points[i], row);
    for (std::size_t j = 0; j < n_basis_; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

std::vector<double> BSplineBasis::greville() const {
  std::vector<double> g(n_basis_);
  for (std::size_t j = 0; j < n_basis_; ++j) {
    if (degree_ == 0) {
      g[j] = 0.5 * (knots_[j] + knots_[j + 1]);
      continue;
    }
    double s = 0.0;
    for (std::size_t k = 1; k <= degree_; ++k) s += knots_[j + k];
    g[j] = s / static_cast<double>(degree_);
  }
  return g;
}

}  // namespace abusetrend
