#pragma once

#include "revmarkov/markov_core.hpp"
#include "revmarkov/sinkhorn.hpp"

#include <Eigen/Cholesky>

#include <cstdint>

namespace revmarkov {

/// Symmetric n x n matrix xi with xi * pi_hat = 0.
struct TangentVector {
  Matrix xi;

  TangentVector() = default;
  explicit TangentVector(Matrix m) : xi(std::move(m)) {}

  static TangentVector zero(Index n) { return TangentVector(Matrix::Zero(n, n)); }

  TangentVector& operator+=(const TangentVector& o) { xi += o.xi; return *this; }
  TangentVector& operator-=(const TangentVector& o) { xi -= o.xi; return *this; }
  TangentVector& operator*=(double c) { xi *= c; return *this; }
  friend TangentVector operator+(TangentVector a, const TangentVector& b) { return a += b; }
  friend TangentVector operator-(TangentVector a, const TangentVector& b) { return a -= b; }
  friend TangentVector operator*(double c, TangentVector a) { return a *= c; }
  friend TangentVector operator-(TangentVector a) { return a *= -1.0; }
};

/// Point of the manifold: strictly positive, exactly symmetric S with
/// S pi_hat = pi_hat. Carries the Cholesky factor of the projection system
///   Amat = diag(S D_pihat pi_hat) + D_pihat S D_pihat
/// so that gradient and Hessian solves at the same point share it.
class ManifoldPoint {
 public:
  const Matrix& matrix() const noexcept { return s_; }
  const Vector& pi_hat() const noexcept { return pi_hat_; }
  Index size() const noexcept { return s_.rows(); }
  double operator()(Index i, Index j) const { return s_(i, j); }

  /// The projection system matrix.
  const Matrix& system() const noexcept { return system_; }
  /// Solves system() * x = rhs.
  Vector solve(const Vector& rhs) const { return factor_.solve(rhs); }

 private:
  friend class Manifold;
  ManifoldPoint(Matrix s, Vector pi_hat, Matrix system, Eigen::LLT<Matrix> factor)
      : s_(std::move(s)), pi_hat_(std::move(pi_hat)), system_(std::move(system)), factor_(std::move(factor)) {}

  Matrix s_;
  Vector pi_hat_;
  Matrix system_;
  Eigen::LLT<Matrix> factor_;
};

struct ManifoldOptions {
  /// Entries below this make a matrix unacceptable as a point.
  double min_entry = 1e-14;
  /// || S pi_hat - pi_hat ||_inf accepted for a point.
  double point_tol = 1e-10;
  /// Tangent vectors drifting further than this from xi pi_hat = 0 are re-projected.
  double tangent_tol = 1e-10;
  /// Bound on |xi_ij / S_ij| inside the exponential of the retraction.
  double exp_clamp = 50.0;
  SinkhornOptions sinkhorn{};
};

/// Ingredients of the Riemannian gradient at a point, reused by every
/// Hessian-vector product there.
struct GradientContext {
  Matrix egrad;
  Vector alpha;
  TangentVector rgrad;
};

/// The set { S in R^{n x n} : S > 0, S = S^T, S pi_hat = pi_hat } with the
/// Fisher metric <xi, eta>_S = sum_ij xi_ij eta_ij / S_ij.
class Manifold {
 public:
  explicit Manifold(Vector pi_hat, ManifoldOptions opts = {});

  Index size() const noexcept { return pi_hat_.size(); }
  /// n(n-1)/2
  Index dimension() const noexcept { return size() * (size() - 1) / 2; }
  const Vector& pi_hat() const noexcept { return pi_hat_; }
  const ManifoldOptions& options() const noexcept { return opts_; }

  /// Validates S and factors its projection system. Throws InvalidArgument on
  /// shape, symmetry, positivity or fixed-point violations, and
  /// FactorizationFailure if the system is not positive definite.
  ManifoldPoint point(Matrix s) const;

  double inner(const ManifoldPoint& s, const TangentVector& xi, const TangentVector& eta) const;
  double norm(const ManifoldPoint& s, const TangentVector& xi) const;

  /// Fisher-orthogonal projection of a symmetric Z onto the tangent space.
  TangentVector project(const ManifoldPoint& s, const Matrix& z) const;
  /// project(S, (Z + Z^T) / 2)
  TangentVector project_general(const ManifoldPoint& s, const Matrix& z) const;

  /// grad f(S) from the Euclidean gradient G.
  TangentVector egrad_to_rgrad(const ManifoldPoint& s, const Matrix& egrad) const;
  GradientContext gradient_context(const ManifoldPoint& s, Matrix egrad) const;

  /// hess f(S)[xi] from the Euclidean gradient G and the Euclidean Hessian
  /// applied along xi (`ehess_xi`).
  TangentVector ehess_to_rhess(const ManifoldPoint& s, const Matrix& egrad, const Matrix& ehess_xi,
                               const TangentVector& xi) const;
  TangentVector ehess_to_rhess(const ManifoldPoint& s, const GradientContext& ctx, const Matrix& ehess_xi,
                               const TangentVector& xi) const;

  /// Sinkhorn projection of S .* exp(xi ./ S).
  ManifoldPoint retract(const ManifoldPoint& s, const TangentVector& xi) const;

  ManifoldPoint random_point(std::uint64_t seed) const;
  /// Unit-norm random tangent vector at S.
  TangentVector random_tangent(const ManifoldPoint& s, std::uint64_t seed) const;

  /// || xi pi_hat ||_inf
  double tangency_residual(const TangentVector& xi) const;
  /// Re-projects xi if it drifted past options().tangent_tol.
  void repair_tangency(const ManifoldPoint& s, TangentVector& xi) const;

 private:
  /// (alpha pi_hat^T + pi_hat alpha^T) .* S
  Matrix normal_component(const ManifoldPoint& s, const Vector& alpha) const;

  Vector pi_hat_;
  ManifoldOptions opts_;
};

}  // namespace revmarkov
