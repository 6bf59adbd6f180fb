#pragma once

#include "revmarkov/markov_core.hpp"

namespace revmarkov {

struct SinkhornOptions {
  /// Required accuracy of the scaled matrix S on S * pi_hat = pi_hat, measured
  /// entrywise relative to pi_hat (which bounds the absolute residual too).
  double tol = 1e-12;
  long max_iter = 10000;
};

struct ScalingResult {
  /// Diagonal of D; D A D fixes pi_hat.
  Vector d;
  long iterations = 0;
  /// || (D A D) pi_hat - pi_hat ||_inf
  double residual = 0.0;
};

/// Entries below this are raised to it before balancing.
inline constexpr double kSinkhornFloor = 1e-300;

/// Symmetric diagonal scaling: finds d > 0 with diag(d) A diag(d) pi_hat = pi_hat.
///
/// Works on Ahat = D_pihat A D_pihat with target row sums pi, using the damped
/// fixed point e <- sqrt(e .* pi ./ (Ahat e)) until the relative residual is
/// below 1e-3, then finishing with safeguarded Newton steps on
/// e .* (Ahat e) = pi. Throws NonPositiveEntry, InvalidArgument (asymmetric
/// input) or NoConvergence.
ScalingResult balance_symmetric(const Matrix& a, const Vector& pi_hat, const SinkhornOptions& opts = {});

/// Maps a positive matrix Y onto { S > 0 : S = S^T, S pi_hat = pi_hat }.
///
/// Runs two-sided Sinkhorn on D_pihat Y D_pihat towards marginals (pi, pi),
/// averages D1 Yhat D2 with its transpose and maps back. Symmetric inputs skip
/// straight to balance_symmetric. The returned matrix is exactly symmetric.
Matrix normalize_to_manifold(const Matrix& y, const Vector& pi_hat, const SinkhornOptions& opts = {});

/// max_i |(S pi_hat)_i / pi_hat_i - 1|
double relative_fixed_point_residual(const Matrix& s, const Vector& pi_hat);

}  // namespace revmarkov
