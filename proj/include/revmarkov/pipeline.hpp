#pragma once

#include "revmarkov/error.hpp"
#include "revmarkov/manifold.hpp"
#include "revmarkov/markov_core.hpp"
#include "revmarkov/metrics_bench.hpp"
#include "revmarkov/rtr_solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace revmarkov {

struct SolveRequest {
  StochasticMatrix a;
  /// Computed by power iteration when absent. A supplied vector that is not
  /// stationary for A is used as given and flagged in the report.
  std::optional<Vector> pi;
  bool recurse_ergodic = true;
  TrustRegionConfig solver{};
  ManifoldOptions manifold{};
  /// Defaults to default_transient_tol(n).
  std::optional<double> transient_tol;
  /// Start from a random manifold point instead of the symmetrized target.
  bool random_init = false;
  std::uint64_t seed = 0;
  /// ||pi^T A - pi^T||_inf above this marks a supplied pi as inconsistent.
  double pi_consistency_tol = 1e-8;
  /// Worker cap; 0 means REVMARKOV_THREADS or the hardware concurrency.
  unsigned threads = 0;
};

struct ClassReport {
  IndexSet states;
  SolveTrace trace;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string error;
};

struct SolveReport {
  StochasticMatrix p;
  /// Distribution P is reversible for: zero on transient states.
  Vector pi;
  MetricSet metrics;
  /// One entry per ergodic class, or a single entry for the combined solve.
  std::vector<ClassReport> classes;
  std::vector<IndexSet> class_states;
  IndexSet transient;
  bool pi_supplied = false;
  bool pi_inconsistent = false;
  double pi_residual = 0.0;
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;
  /// Effective solver settings.
  TrustRegionConfig config;
  bool recurse_ergodic = true;
  double transient_tol = 0.0;
  std::uint64_t seed = 0;
};

/// Raised when some ergodic classes failed while the others were solved. The
/// carried report holds every class; failed blocks keep the restricted target.
class PartialFailureError : public Error {
 public:
  PartialFailureError(std::vector<std::size_t> failed, SolveReport report, const std::string& message)
      : Error(ErrorCode::PartialFailure, message), failed_(std::move(failed)), report_(std::move(report)) {}
  const std::vector<std::size_t>& failed_classes() const noexcept { return failed_; }
  const SolveReport& report() const noexcept { return report_; }

 private:
  std::vector<std::size_t> failed_;
  SolveReport report_;
};

/// Nearest reversible chain to req.a in Frobenius norm with the same
/// stationary distribution. Transient rows are copied from A unchanged.
SolveReport nearest_reversible(const SolveRequest& req);

/// Worker count from REVMARKOV_THREADS and the hardware, at least 1.
unsigned worker_cap(unsigned requested = 0);

}  // namespace revmarkov
