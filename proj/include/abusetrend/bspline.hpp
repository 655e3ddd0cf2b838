#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace abusetrend {

// Clamped B-spline basis on [0,1] with equispaced interior knots.
//
// The knot vector holds degree+1 copies of 0, K-degree-1 interior knots at
// i/(K-degree), then degree+1 copies of 1. The K functions are non-negative
// and sum to one everywhere on [0,1]; B_0(0) = B_{K-1}(1) = 1.
class BSplineBasis {
 public:
  // Throws std::invalid_argument unless n_basis >= degree + 1.
  BSplineBasis(std::size_t n_basis, std::size_t degree = 3);

  std::size_t size() const { return n_basis_; }
  std::size_t degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }

  // (B_0(u), ..., B_{K-1}(u)). Throws std::domain_error for u outside [0,1].
  std::vector<double> eval(double u) const;

  // Writes all K values into `out` (size K) and returns the index of the
  // first of the at most degree+1 non-zero entries.
  std::size_t eval_into(double u, std::span<double> out) const;

  // Row i holds the basis at points[i].
  Eigen::MatrixXd design(std::span<const double> points) const;

  // Knot averages (t_{j+1} + ... + t_{j+degree}) / degree; the coefficients
  // of the identity function u. For degree 0 the interval midpoints.
  std::vector<double> greville() const;

 private:
  std::size_t n_basis_;
  std::size_t degree_;
  std::vector<double> knots_;
};

}  // namespace abusetrend
