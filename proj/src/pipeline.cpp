#include "revmarkov/pipeline.hpp"

#include "revmarkov/objective.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace revmarkov {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BlockOutcome {
  Matrix p;
  ClassReport report;
  std::exception_ptr error;
};

// The projected input when it balances, else pi_hat pi_hat^T, which lies on the
// manifold exactly.
ManifoldPoint default_start(const ProblemData& problem, const Manifold& m) {
  try {
    return m.point(problem.initial_guess());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
  }
  const Vector& ph = m.pi_hat();
  return m.point(ph * ph.transpose());
}

BlockOutcome solve_block(const StochasticMatrix& a, const StationaryDistribution& pi, const IndexSet& states,
                         const SolveRequest& req, std::uint64_t seed) {
  BlockOutcome out;
  out.report.states = states;
  const auto t0 = Clock::now();
  try {
    if (a.size() == 1) {
      out.p = Matrix::Ones(1, 1);
      out.report.trace.termination = TerminationReason::Converged;
    } else {
      ProblemData problem(a, pi);
      Manifold m(pi.pi_hat(), req.manifold);
      ManifoldPoint start = req.random_init ? m.random_point(seed) : default_start(problem, m);
      MinimizeResult res = minimize(problem, m, std::move(start), req.solver);
      out.p = problem.from_manifold(res.point);
      out.report.trace = std::move(res.trace);
    }
  } catch (const std::exception& e) {
    out.error = std::current_exception();
    out.report.failed = true;
    out.report.error = e.what();
    out.p = a.matrix();
  }
  out.report.wall_time_s = seconds_since(t0);
  return out;
}

/// Runs jobs[0..count) on up to `workers` threads; results land by index.
template <typename Job>
void run_pool(std::size_t count, unsigned workers, Job job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) job(k);
    });
  }
  for (auto& t : pool) t.join();
}

Vector scatter(const Vector& values, const IndexSet& idx, Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = values[static_cast<Index>(k)];
  return out;
}

}  // namespace

unsigned worker_cap(unsigned requested) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REVMARKOV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<unsigned>(v);
  }
  if (requested > 0) cap = std::min(cap, requested);
  return cap;
}

SolveReport nearest_reversible(const SolveRequest& req) {
  const auto t0 = Clock::now();
  const StochasticMatrix& a = req.a;
  const Index n = a.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");

  SolveReport rep;
  rep.config = req.solver.resolved(std::max<Index>(n, 2));
  rep.recurse_ergodic = req.recurse_ergodic;
  rep.seed = req.seed;
  rep.transient_tol = req.transient_tol.value_or(default_transient_tol(n));

  StationaryDistribution pi;
  if (req.pi) {
    if (req.pi->size() != n) throw Error(ErrorCode::ShapeMismatch, "pi length differs from matrix size");
    pi = StationaryDistribution(*req.pi);
    rep.pi_supplied = true;
    rep.pi_residual = (a.matrix().transpose() * pi.pi() - pi.pi()).lpNorm<Eigen::Infinity>();
    if (rep.pi_residual > req.pi_consistency_tol) {
      rep.pi_inconsistent = true;
      std::ostringstream os;
      os << "supplied pi is not stationary for A (residual " << rep.pi_residual << "); using it as given";
      rep.warnings.push_back(os.str());
    }
  } else {
    pi = stationary_vector_retrying(a);
  }

  rep.transient = detect_transient(pi, rep.transient_tol);
  const IndexSet recurrent = complement(rep.transient, n);
  if (recurrent.empty()) throw Error(ErrorCode::InvalidArgument, "no recurrent states above the transient threshold");

  ErgodicDecomposition dec = ergodic_classes(a, recurrent, &pi);
  rep.class_states = dec.classes;
  const std::size_t nclass = dec.classes.size();
  const unsigned workers = worker_cap(req.threads);

  std::vector<BlockOutcome> outcomes;
  std::vector<IndexSet> blocks;

  if (req.recurse_ergodic) {
    outcomes.resize(nclass);
    run_pool(nclass, workers, [&](std::size_t k) {
      outcomes[k] = solve_block(dec.class_matrices[k], dec.class_pis[k], dec.classes[k], req, req.seed + k);
    });
    blocks = dec.classes;
    rep.pi = scatter(gather(pi.pi(), recurrent), recurrent, n);
    rep.pi /= rep.pi.sum();
  } else {
    if (nclass > 1) {
      rep.warnings.push_back("recurse_ergodic is off but the chain has " + std::to_string(nclass) +
                             " ergodic classes; cross-class blocks are driven to zero from the interior");
    }
    // Each class gets weight 1/E in the combined distribution.
    Vector combined = Vector::Zero(n);
    for (std::size_t k = 0; k < nclass; ++k) {
      const IndexSet& cls = dec.classes[k];
      const Vector& cp = dec.class_pis[k].pi();
      for (std::size_t i = 0; i < cls.size(); ++i)
        combined[cls[i]] = cp[static_cast<Index>(i)] / static_cast<double>(nclass);
    }
    const StationaryDistribution sub_pi(gather(combined, recurrent));
    outcomes.push_back(solve_block(restrict_to(a, recurrent), sub_pi, recurrent, req, req.seed));
    blocks = {recurrent};
    rep.pi = scatter(sub_pi.pi(), recurrent, n);
  }

  std::vector<Matrix> solved;
  std::vector<std::size_t> failed;
  std::exception_ptr first_error;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    BlockOutcome& o = outcomes[k];
    solved.push_back(std::move(o.p));
    if (o.report.failed) {
      failed.push_back(k);
      if (!first_error) first_error = o.error;
    } else if (o.report.trace.termination != TerminationReason::Converged) {
      std::ostringstream os;
      os << "block " << k << " stopped with " << to_string(o.report.trace.termination) << " at gradient norm "
         << o.report.trace.final_grad_norm;
      rep.warnings.push_back(os.str());
    }
    rep.classes.push_back(std::move(o.report));
  }

  rep.p = reassemble(a, blocks, rep.transient, solved);
  rep.wall_time_s = seconds_since(t0);
  rep.metrics = compute_metrics(a.matrix(), rep.p.matrix(), rep.pi, rep.wall_time_s);

  if (!failed.empty()) {
    if (outcomes.size() == 1) std::rethrow_exception(first_error);
    std::ostringstream os;
    os << failed.size() << " of " << outcomes.size() << " classes failed; first: "
       << rep.classes[failed.front()].error;
    throw PartialFailureError(std::move(failed), std::move(rep), os.str());
  }
  return rep;
}

}  // namespace revmarkov
