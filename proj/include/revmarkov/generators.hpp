#pragma once

#include "revmarkov/markov_core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revmarkov {

enum class GeneratorKind { Uniform, Normal, Sbm, MultiErgodic };

std::string_view to_string(GeneratorKind k);
/// Accepts uniform, normal, sbm and multi-ergodic. Throws InvalidArgument.
GeneratorKind parse_generator_kind(std::string_view s);

/// Generated chain with the facts needed to reproduce or check it.
struct GeneratedChain {
  StochasticMatrix a;
  GeneratorKind kind = GeneratorKind::Uniform;
  std::uint64_t seed = 0;
  /// Group (sbm) or class (multi-ergodic) membership; empty otherwise.
  std::vector<IndexSet> blocks;
  /// Normal draws raised to the clamp floor.
  long clamped = 0;
};

/// G_ij ~ U(0,1), rows normalized.
GeneratedChain gen_uniform(Index n, std::uint64_t seed);

/// Entries below this are raised to it in gen_normal.
inline constexpr double kNormalClamp = 1e-6;
/// G_ij ~ N(1,1) clamped at kNormalClamp, rows normalized.
GeneratedChain gen_normal(Index n, std::uint64_t seed);

/// Random walk on a directed stochastic block model graph without self
/// edges. k is uniform on {2..floor(n/2)}, group sizes come from k-1 distinct
/// cut points, and edge probabilities from (I + R/k) with R ~ U(0,1)^{k x k}
/// and rows normalized. States without out-edges get a self-loop. n >= 4.
GeneratedChain gen_sbm(Index n, std::uint64_t seed);

/// Block-diagonal chain with gen_uniform blocks; k and the cut points are
/// drawn as in gen_sbm. n >= 4.
GeneratedChain gen_multi_ergodic(Index n, std::uint64_t seed);

GeneratedChain generate(GeneratorKind kind, Index n, std::uint64_t seed);

/// Banded proposal: Q_ij ~ U(0,1) for |i - j| <= bandwidth, zero elsewhere,
/// rows normalized.
StochasticMatrix gen_banded(Index n, Index bandwidth, std::uint64_t seed);

/// Overdamped Langevin dynamics on the circle with
/// U(x) = a + b cos x + c cos^2 x + d cos^3 x.
struct SdeConfig {
  double a = 2.0567;
  double b = -4.0567;
  double c = 0.3133;
  double d = 6.4267;
  double dt = 1e-3;
  double sigma = 1.0;
  long steps = 1000000;
  int bins = 30;
  std::uint64_t seed = 0;
  /// Starting position, wrapped into [0, 2 pi).
  double x0 = 3.141592653589793;
};

/// U'(x) = -sin x (b + 2c cos x + 3d cos^2 x)
double sde_drift_gradient(const SdeConfig& cfg, double x);

using CountData = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct CountMatrix {
  CountData counts;
  std::int64_t total = 0;
};

/// Bin of x in [0, 2 pi) for half-open bins [2 pi k / M, 2 pi (k+1) / M).
int angle_bin(double x, int bins);

/// Euler-Maruyama x <- x - U'(x) dt + sigma sqrt(dt) eta, wrapped to
/// [0, 2 pi), counting one transition between bins per step.
CountMatrix simulate_sde(const SdeConfig& cfg);

struct NormalizedCounts {
  StochasticMatrix a;
  /// Original indices of the states kept, ascending.
  IndexSet visited;
  IndexSet dropped;
};

/// Row normalization of the counts over the states with outgoing
/// transitions. States without any are dropped along with their columns,
/// repeatedly, until every kept row has mass. Throws InvalidArgument when
/// nothing is left.
NormalizedCounts normalize_counts(const CountMatrix& c);

/// P_ij = Q_ij min(1, pi_j Q_ji / (pi_i Q_ij)) off the diagonal, the diagonal
/// taking the remaining row mass.
StochasticMatrix mh_reversibilize(const StochasticMatrix& q, const Vector& pi);

/// Trajectory of n_steps transitions from x0 by inverse transform sampling.
CountMatrix sample_dtmc(const StochasticMatrix& a, Index x0, long n_steps, std::uint64_t seed);

}  // namespace revmarkov
