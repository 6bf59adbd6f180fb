#pragma once

#include "revmarkov/manifold.hpp"
#include "revmarkov/markov_core.hpp"

namespace revmarkov {

/// Target chain and stationary distribution of one nearest-reversible
/// subproblem, with the diagonal scalings stored as vectors.
///
/// The cost on the manifold is
///   F(Xhat) = 1/2 || D_pihat^{-1} Xhat D_pihat - A ||_F^2,
/// and Xhat = D_pihat P D_pihat^{-1} maps a reversible P onto the manifold.
class ProblemData {
 public:
  /// pi must be strictly positive on every state.
  ProblemData(StochasticMatrix a, StationaryDistribution pi);

  const StochasticMatrix& target() const noexcept { return a_; }
  const StationaryDistribution& distribution() const noexcept { return pi_; }
  const Vector& pi() const noexcept { return pi_.pi(); }
  const Vector& pi_hat() const noexcept { return pi_.pi_hat(); }
  /// D_pihat^{-1} as a vector.
  const Vector& scale_left() const noexcept { return inv_pi_hat_; }
  /// D_pihat as a vector.
  const Vector& scale_right() const noexcept { return pi_.pi_hat(); }
  /// D_pihat A D_pihat^{-1}
  const Matrix& a_hat() const noexcept { return a_hat_; }
  Index size() const noexcept { return a_.size(); }

  double cost(const ManifoldPoint& x_hat) const;
  double cost(const Matrix& x_hat) const;
  /// D_pi^{-1} Xhat D_pi - D_pihat^{-1} A D_pihat
  Matrix euclidean_grad(const Matrix& x_hat) const;
  Matrix euclidean_grad(const ManifoldPoint& x_hat) const { return euclidean_grad(x_hat.matrix()); }
  /// D_pi^{-1} V D_pi; the cost is quadratic so this does not depend on Xhat.
  Matrix euclidean_hess_vec(const Matrix& v) const;

  /// D_pihat B D_pihat^{-1} for a reversible, strictly positive B. Throws
  /// NotReversible if detailed balance fails by more than 1e-12.
  ManifoldPoint to_manifold(const Manifold& m, const StochasticMatrix& b) const;
  /// D_pihat^{-1} Xhat D_pihat
  Matrix from_manifold(const Matrix& x_hat) const;
  Matrix from_manifold(const ManifoldPoint& x_hat) const { return from_manifold(x_hat.matrix()); }

  /// normalize_to_manifold(max(sym(D_pihat A D_pihat^{-1}), floor)) with
  /// floor = floor_ratio * max entry.
  Matrix initial_guess(double floor_ratio = 1e-10) const;

 private:
  StochasticMatrix a_;
  StationaryDistribution pi_;
  Vector inv_pi_hat_;
  Matrix a_hat_;
  /// D_pihat^{-1} A D_pihat, the constant part of the gradient.
  Matrix a_check_;
};

/// Max-abs violation of D_pi P = P^T D_pi.
double detailed_balance_residual(const Matrix& p, const Vector& pi);

}  // namespace revmarkov
