#pragma once

#include "revmarkov/manifold.hpp"
#include "revmarkov/objective.hpp"

#include <string_view>
#include <vector>

namespace revmarkov {

/// Riemannian trust-region settings. Zero-valued sizes are resolved from the
/// problem dimension by resolved().
struct TrustRegionConfig {
  double grad_tol = 1e-6;
  long max_outer = 1000;
  /// 0 selects sqrt(n(n-1)/2).
  double delta_bar = 0.0;
  /// 0 selects delta_bar / 8.
  double delta0 = 0.0;
  double rho_prime = 0.1;
  double tcg_kappa = 0.1;
  double tcg_theta = 1.0;
  /// 0 selects n(n-1)/2.
  long max_inner = 0;
  /// Radius below which the iterate is considered to be closing in on the
  /// boundary of the manifold.
  double min_radius = 1e-12;
  /// When true a stalled model reduction throws LineSearchStall instead of
  /// ending the run with TerminationReason::Stalled.
  bool stall_is_error = false;

  TrustRegionConfig resolved(Index n) const;
};

enum class TerminationReason { Converged, MaxIterations, BoundaryApproach, Stalled };

std::string_view to_string(TerminationReason r);

enum class InnerStop { None, NegativeCurvature, Boundary, ResidualSmall, MaxInner };

struct IterationRecord {
  long iteration = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double radius = 0.0;
  long inner_iterations = 0;
  double rho = 0.0;
  bool accepted = false;
  InnerStop inner_stop = InnerStop::None;
};

struct SolveTrace {
  std::vector<IterationRecord> records;
  TerminationReason termination = TerminationReason::MaxIterations;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  long outer_iterations = 0;
  long total_inner_iterations = 0;
};

struct MinimizeResult {
  ManifoldPoint point;
  SolveTrace trace;
};

/// Minimizes the nearest-reversible cost over the manifold with the
/// trust-region method and a truncated conjugate gradient inner solver.
///
/// Steps are accepted when rho > rho_prime; the radius shrinks by 4 when
/// rho < 1/4 and doubles (up to delta_bar) when rho > 3/4 and the inner solve
/// stopped on the radius. A trial step whose retraction fails (no Sinkhorn
/// convergence or an entry under the positivity floor) counts as rejected.
MinimizeResult minimize(const ProblemData& problem, const Manifold& manifold, ManifoldPoint start,
                        const TrustRegionConfig& cfg = {});

}  // namespace revmarkov
