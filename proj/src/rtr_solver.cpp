#include "revmarkov/rtr_solver.hpp"

#include "revmarkov/error.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace revmarkov {

std::string_view to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Converged: return "Converged";
    case TerminationReason::MaxIterations: return "MaxIterations";
    case TerminationReason::BoundaryApproach: return "BoundaryApproach";
    case TerminationReason::Stalled: return "Stalled";
  }
  return "Unknown";
}

TrustRegionConfig TrustRegionConfig::resolved(Index n) const {
  TrustRegionConfig c = *this;
  const double dim = static_cast<double>(n * (n - 1) / 2);
  if (c.delta_bar <= 0.0) c.delta_bar = std::sqrt(std::max(dim, 1.0));
  if (c.delta0 <= 0.0) c.delta0 = c.delta_bar / 8.0;
  if (c.max_inner <= 0) c.max_inner = std::max<long>(1, static_cast<long>(dim));
  if (!(c.delta0 > 0.0 && c.delta0 <= c.delta_bar))
    throw Error(ErrorCode::InvalidArgument, "trust region needs 0 < delta0 <= delta_bar");
  if (!(c.rho_prime > 0.0 && c.rho_prime < 0.25))
    throw Error(ErrorCode::InvalidArgument, "trust region needs 0 < rho_prime < 1/4");
  return c;
}

namespace {

struct Evaluation {
  double cost = 0.0;
  GradientContext ctx;
  double grad_norm = 0.0;
};

Evaluation evaluate(const ProblemData& problem, const Manifold& m, const ManifoldPoint& x) {
  Evaluation ev;
  ev.cost = problem.cost(x);
  ev.ctx = m.gradient_context(x, problem.euclidean_grad(x));
  ev.grad_norm = m.norm(x, ev.ctx.rgrad);
  return ev;
}

struct InnerResult {
  TangentVector eta;
  TangentVector heta;
  long iterations = 0;
  InnerStop stop = InnerStop::None;
  bool hit_radius = false;
};

/// Steihaug-Toint truncated CG on the trust-region subproblem, without
/// preconditioning.
InnerResult truncated_cg(const ProblemData& problem, const Manifold& m, const ManifoldPoint& x,
                         const Evaluation& ev, double radius, const TrustRegionConfig& cfg) {
  const Index n = x.size();
  auto hess = [&](const TangentVector& v) {
    return m.ehess_to_rhess(x, ev.ctx, problem.euclidean_hess_vec(v.xi), v);
  };

  InnerResult out{TangentVector::zero(n), TangentVector::zero(n)};
  TangentVector r = ev.ctx.rgrad;
  double r_r = m.inner(x, r, r);
  const double norm_r0 = std::sqrt(r_r);
  TangentVector delta = -r;
  double e_pe = 0.0;
  double e_pd = 0.0;
  double d_pd = r_r;
  const double delta2 = radius * radius;

  for (long j = 0; j < cfg.max_inner; ++j) {
    out.iterations = j + 1;
    TangentVector hdelta = hess(delta);
    const double d_hd = m.inner(x, delta, hdelta);
    const double alpha = r_r / d_hd;
    const double e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;

    if (d_hd <= 0.0 || e_pe_new >= delta2) {
      const double tau = (-e_pd + std::sqrt(e_pd * e_pd + d_pd * (delta2 - e_pe))) / d_pd;
      out.eta += tau * delta;
      out.heta += tau * hdelta;
      out.hit_radius = true;
      out.stop = d_hd <= 0.0 ? InnerStop::NegativeCurvature : InnerStop::Boundary;
      return out;
    }

    e_pe = e_pe_new;
    out.eta += alpha * delta;
    out.heta += alpha * hdelta;
    r += alpha * hdelta;
    m.repair_tangency(x, r);

    const double r_r_new = m.inner(x, r, r);
    const double norm_r = std::sqrt(r_r_new);
    if (norm_r <= norm_r0 * std::min(std::pow(norm_r0, cfg.tcg_theta), cfg.tcg_kappa)) {
      out.stop = InnerStop::ResidualSmall;
      return out;
    }
    const double beta = r_r_new / r_r;
    r_r = r_r_new;
    delta = beta * delta - r;
    m.repair_tangency(x, delta);
    e_pd = beta * (e_pd + alpha * d_pd);
    d_pd = r_r + beta * beta * d_pd;
  }
  out.stop = InnerStop::MaxInner;
  return out;
}

}  // namespace

MinimizeResult minimize(const ProblemData& problem, const Manifold& manifold, ManifoldPoint start,
                        const TrustRegionConfig& cfg_in) {
  const Index n = problem.size();
  if (start.size() != n || manifold.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "start point, manifold and problem sizes differ");
  const TrustRegionConfig cfg = cfg_in.resolved(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  ManifoldPoint x = std::move(start);
  Evaluation ev = evaluate(problem, manifold, x);
  double radius = cfg.delta0;
  SolveTrace trace;

  long k = 0;
  for (;; ++k) {
    if (ev.grad_norm <= cfg.grad_tol || n == 1) {
      trace.termination = TerminationReason::Converged;
      break;
    }
    if (k >= cfg.max_outer) {
      trace.termination = TerminationReason::MaxIterations;
      break;
    }
    if (radius < cfg.min_radius) {
      trace.termination = TerminationReason::BoundaryApproach;
      break;
    }

    InnerResult inner = truncated_cg(problem, manifold, x, ev, radius, cfg);
    trace.total_inner_iterations += inner.iterations;
    const double model_decrease =
        -(manifold.inner(x, ev.ctx.rgrad, inner.eta) + 0.5 * manifold.inner(x, inner.heta, inner.eta));

    IterationRecord rec;
    rec.iteration = k;
    rec.cost = ev.cost;
    rec.grad_norm = ev.grad_norm;
    rec.radius = radius;
    rec.inner_iterations = inner.iterations;
    rec.inner_stop = inner.stop;

    const double reg = std::max(1.0, std::abs(ev.cost)) * eps * 1e3;
    if (!(model_decrease > 0.0)) {
      rec.rho = 0.0;
      trace.records.push_back(rec);
      if (cfg.stall_is_error) {
        std::ostringstream os;
        os << "predicted reduction " << model_decrease << " with gradient norm " << ev.grad_norm;
        throw Error(ErrorCode::LineSearchStall, os.str());
      }
      trace.termination = TerminationReason::Stalled;
      break;
    }

    std::optional<ManifoldPoint> candidate;
    double cand_cost = std::numeric_limits<double>::infinity();
    try {
      candidate.emplace(manifold.retract(x, inner.eta));
      cand_cost = problem.cost(*candidate);
    } catch (const Error&) {
      candidate.reset();
    }

    double rho = -std::numeric_limits<double>::infinity();
    if (candidate) rho = (ev.cost - cand_cost + reg) / (model_decrease + reg);
    rec.rho = rho;

    if (!(rho >= 0.25)) {
      radius *= 0.25;
    } else if (rho > 0.75 && inner.hit_radius) {
      radius = std::min(2.0 * radius, cfg.delta_bar);
    }

    if (candidate && rho > cfg.rho_prime) {
      Evaluation next = evaluate(problem, manifold, *candidate);
      x = std::move(*candidate);
      ev = std::move(next);
      rec.accepted = true;
    }
    trace.records.push_back(rec);
  }

  trace.outer_iterations = k;
  trace.final_cost = ev.cost;
  trace.final_grad_norm = ev.grad_norm;
  return MinimizeResult{std::move(x), std::move(trace)};
}

}  // namespace revmarkov
