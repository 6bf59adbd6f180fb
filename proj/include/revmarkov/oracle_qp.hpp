#pragma once

#include "revmarkov/markov_core.hpp"

#include <Eigen/LU>
#include <optional>

namespace revmarkov {

/// Euclidean projector onto { X : X 1 = 1, D_pi X = X^T D_pi }.
///
/// The correction is X = Z - lambda 1^T - D_pi W with W antisymmetric; W is
/// eliminated in closed form, leaving an n x n system for lambda that is
/// factored once per pi.
class AffineProjector {
 public:
  /// pi must be strictly positive. Throws SingularConstraints if the reduced
  /// system cannot be factored.
  explicit AffineProjector(Vector pi);

  Index size() const noexcept { return pi_.size(); }
  const Vector& pi() const noexcept { return pi_; }
  Matrix operator()(const Matrix& z) const;

 private:
  Vector pi_;
  /// 1 / (pi_i^2 + pi_j^2), zero on the diagonal.
  Matrix inv_s_;
  Eigen::PartialPivLU<Matrix> lu_;
};

/// One-shot AffineProjector(pi)(z).
Matrix project_affine(const Vector& pi, const Matrix& z);

struct DykstraOptions {
  double tol = 1e-10;
  long max_iter = 200000;
};

struct DykstraResult {
  Matrix x;
  long iterations = 0;
  /// Frobenius distance between the last two iterates.
  double step = 0.0;
};

/// Euclidean projection of A onto the reversible stochastic matrices for pi,
/// by Dykstra's alternating projections between the affine set and the
/// nonnegative orthant. pi must be strictly positive. Throws NoConvergence.
DykstraResult dykstra_nearest(const Matrix& a, const Vector& pi, const DykstraOptions& opts = {});

/// dykstra_nearest on the recurrent states of A, with transient rows copied
/// from A. pi is computed by power iteration when absent.
Matrix oracle_nearest(const StochasticMatrix& a, const std::optional<Vector>& pi, const DykstraOptions& opts = {},
                      std::optional<double> transient_tol = std::nullopt);

}  // namespace revmarkov
