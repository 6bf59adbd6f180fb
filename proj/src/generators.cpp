#include "revmarkov/generators.hpp"

#include "revmarkov/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace revmarkov {

namespace {

using Rng = std::mt19937_64;

Matrix normalize_rows(Matrix g) {
  for (Index i = 0; i < g.rows(); ++i) g.row(i) /= g.row(i).sum();
  return g;
}

/// U(0,1) without the endpoint 0.
double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v;
  do v = u(rng);
  while (v == 0.0);
  return v;
}

Matrix uniform_block(Index n, Rng& rng) {
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = open_uniform(rng);
  return normalize_rows(std::move(g));
}

/// k uniform on {2..floor(n/2)}, then k-1 distinct cut points in {1..n-1}.
std::vector<IndexSet> random_partition(Index n, Rng& rng) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "block generators need n >= 4");
  std::uniform_int_distribution<Index> pick_k(2, n / 2);
  const Index k = pick_k(rng);
  std::vector<Index> pool(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n - 1; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
  // Partial Fisher-Yates for k-1 distinct draws.
  for (Index i = 0; i < k - 1; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 2);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Index> cuts(pool.begin(), pool.begin() + (k - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(n);
  std::vector<IndexSet> groups;
  Index start = 0;
  for (Index cut : cuts) {
    IndexSet g;
    for (Index i = start; i < cut; ++i) g.push_back(i);
    groups.push_back(std::move(g));
    start = cut;
  }
  return groups;
}

}  // namespace

std::string_view to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Uniform: return "uniform";
    case GeneratorKind::Normal: return "normal";
    case GeneratorKind::Sbm: return "sbm";
    case GeneratorKind::MultiErgodic: return "multi-ergodic";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view s) {
  for (auto k : {GeneratorKind::Uniform, GeneratorKind::Normal, GeneratorKind::Sbm, GeneratorKind::MultiErgodic})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown generator kind '" + std::string(s) + "'");
}

GeneratedChain gen_uniform(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  Rng rng(seed);
  return {validate_stochastic(uniform_block(n, rng)), GeneratorKind::Uniform, seed, {}, 0};
}

GeneratedChain gen_normal(Index n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(1.0, 1.0);
  Matrix g(n, n);
  long clamped = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double v = normal(rng);
      if (v < kNormalClamp) {
        v = kNormalClamp;
        ++clamped;
      }
      g(i, j) = v;
    }
  }
  return {validate_stochastic(normalize_rows(std::move(g))), GeneratorKind::Normal, seed, {}, clamped};
}

GeneratedChain gen_sbm(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<IndexSet> groups = random_partition(n, rng);
  const Index k = static_cast<Index>(groups.size());

  Matrix density(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) density(i, j) = open_uniform(rng) / static_cast<double>(k);
  density += Matrix::Identity(k, k);
  density = normalize_rows(std::move(density));

  std::vector<Index> group_of(static_cast<std::size_t>(n));
  for (Index g = 0; g < k; ++g)
    for (Index i : groups[static_cast<std::size_t>(g)]) group_of[static_cast<std::size_t>(i)] = g;

  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix adj = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (u(rng) < density(group_of[static_cast<std::size_t>(i)], group_of[static_cast<std::size_t>(j)]))
        adj(i, j) = 1.0;
    }
    if (adj.row(i).sum() == 0.0) adj(i, i) = 1.0;
  }
  return {validate_stochastic(normalize_rows(std::move(adj))), GeneratorKind::Sbm, seed, std::move(groups), 0};
}

GeneratedChain gen_multi_ergodic(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<IndexSet> groups = random_partition(n, rng);
  Matrix a = Matrix::Zero(n, n);
  for (const IndexSet& g : groups) {
    const Index m = static_cast<Index>(g.size());
    a.block(g.front(), g.front(), m, m) = uniform_block(m, rng);
  }
  return {validate_stochastic(std::move(a)), GeneratorKind::MultiErgodic, seed, std::move(groups), 0};
}

GeneratedChain generate(GeneratorKind kind, Index n, std::uint64_t seed) {
  switch (kind) {
    case GeneratorKind::Uniform: return gen_uniform(n, seed);
    case GeneratorKind::Normal: return gen_normal(n, seed);
    case GeneratorKind::Sbm: return gen_sbm(n, seed);
    case GeneratorKind::MultiErgodic: return gen_multi_ergodic(n, seed);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown generator kind");
}

StochasticMatrix gen_banded(Index n, Index bandwidth, std::uint64_t seed) {
  if (n < 1 || bandwidth < 0) throw Error(ErrorCode::InvalidArgument, "bad banded generator arguments");
  Rng rng(seed);
  Matrix q = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(0, i - bandwidth); j <= std::min(n - 1, i + bandwidth); ++j)
      q(i, j) = open_uniform(rng);
  return validate_stochastic(normalize_rows(std::move(q)));
}

double sde_drift_gradient(const SdeConfig& cfg, double x) {
  const double c = std::cos(x);
  return -std::sin(x) * (cfg.b + 2.0 * cfg.c * c + 3.0 * cfg.d * c * c);
}

int angle_bin(double x, int bins) {
  const int k = static_cast<int>(std::floor(x * bins / (2.0 * std::numbers::pi)));
  return std::clamp(k, 0, bins - 1);
}

namespace {

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x, two_pi);
  if (x < 0.0) x += two_pi;
  // fmod of a tiny negative number can round up to exactly 2 pi.
  if (x >= two_pi) x = 0.0;
  return x;
}

}  // namespace

CountMatrix simulate_sde(const SdeConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (cfg.bins < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 bins");
  if (cfg.steps < 0) throw Error(ErrorCode::InvalidArgument, "steps must be nonnegative");
  Rng rng(cfg.seed);
  std::normal_distribution<double> eta(0.0, 1.0);
  const double noise = cfg.sigma * std::sqrt(cfg.dt);

  CountMatrix out{CountData::Zero(cfg.bins, cfg.bins), cfg.steps};
  double x = wrap_angle(cfg.x0);
  int bin = angle_bin(x, cfg.bins);
  for (long t = 0; t < cfg.steps; ++t) {
    x = wrap_angle(x - sde_drift_gradient(cfg, x) * cfg.dt + noise * eta(rng));
    const int next = angle_bin(x, cfg.bins);
    ++out.counts(bin, next);
    bin = next;
  }
  return out;
}

NormalizedCounts normalize_counts(const CountMatrix& c) {
  const Index n = c.counts.rows();
  if (c.counts.cols() != n) throw Error(ErrorCode::NotSquare, "count matrix is not square");
  if ((c.counts.array() < 0).any()) throw Error(ErrorCode::NegativeEntry, "negative count");
  std::vector<char> keep(static_cast<std::size_t>(n), 1);
  for (bool changed = true; changed;) {
    changed = false;
    for (Index i = 0; i < n; ++i) {
      if (!keep[static_cast<std::size_t>(i)]) continue;
      std::int64_t mass = 0;
      for (Index j = 0; j < n; ++j)
        if (keep[static_cast<std::size_t>(j)]) mass += c.counts(i, j);
      if (mass == 0) {
        keep[static_cast<std::size_t>(i)] = 0;
        changed = true;
      }
    }
  }
  NormalizedCounts out;
  for (Index i = 0; i < n; ++i) (keep[static_cast<std::size_t>(i)] ? out.visited : out.dropped).push_back(i);
  if (out.visited.empty()) throw Error(ErrorCode::InvalidArgument, "count matrix has no transitions");
  const Index m = static_cast<Index>(out.visited.size());
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) a(i, j) = static_cast<double>(c.counts(out.visited[i], out.visited[j]));
  out.a = validate_stochastic(normalize_rows(std::move(a)));
  return out;
}

StochasticMatrix mh_reversibilize(const StochasticMatrix& q, const Vector& pi) {
  const Index n = q.size();
  if (pi.size() != n) throw Error(ErrorCode::ShapeMismatch, "pi length differs from matrix size");
  if (!(pi.minCoeff() > 0.0)) throw Error(ErrorCode::InvalidArgument, "pi must be strictly positive");
  const Matrix& m = q.matrix();
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (i == j || m(i, j) == 0.0) continue;
      // pi_i P_ij = min(pi_i Q_ij, pi_j Q_ji) is symmetric in (i, j).
      p(i, j) = std::min(pi[i] * m(i, j), pi[j] * m(j, i)) / pi[i];
      off += p(i, j);
    }
    p(i, i) = std::max(0.0, 1.0 - off);
  }
  return validate_stochastic(std::move(p));
}

CountMatrix sample_dtmc(const StochasticMatrix& a, Index x0, long n_steps, std::uint64_t seed) {
  const Index n = a.size();
  if (x0 < 0 || x0 >= n) throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  if (n_steps < 0) throw Error(ErrorCode::InvalidArgument, "step count must be nonnegative");
  Matrix cdf = a.matrix();
  for (Index i = 0; i < n; ++i)
    for (Index j = 1; j < n; ++j) cdf(i, j) += cdf(i, j - 1);

  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CountMatrix out{CountData::Zero(n, n), n_steps};
  Index s = x0;
  for (long t = 0; t < n_steps; ++t) {
    const double r = u(rng) * cdf(s, n - 1);
    Index next = 0;
    while (next < n - 1 && (cdf(s, next) <= r || a(s, next) == 0.0)) ++next;
    ++out.counts(s, next);
    s = next;
  }
  return out;
}

}  // namespace revmarkov
