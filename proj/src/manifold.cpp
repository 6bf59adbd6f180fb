#include "revmarkov/manifold.hpp"

#include "revmarkov/error.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace revmarkov {

namespace {

Matrix sym_part(const Matrix& z) { return 0.5 * (z + z.transpose()); }

}  // namespace

Manifold::Manifold(Vector pi_hat, ManifoldOptions opts) : pi_hat_(std::move(pi_hat)), opts_(opts) {
  if (pi_hat_.size() == 0 || !(pi_hat_.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "manifold needs a strictly positive pi_hat");
  if (std::abs(pi_hat_.squaredNorm() - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "pi_hat must have unit Euclidean norm");
}

ManifoldPoint Manifold::point(Matrix s) const {
  const Index n = size();
  if (s.rows() != n || s.cols() != n) throw Error(ErrorCode::ShapeMismatch, "point has wrong shape");
  if (s != s.transpose()) throw Error(ErrorCode::InvalidArgument, "point is not exactly symmetric");
  const double smallest = s.minCoeff();
  if (!(smallest >= opts_.min_entry) || !s.allFinite()) {
    std::ostringstream os;
    os << "point has entry " << smallest << " below " << opts_.min_entry;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  const double res = (s * pi_hat_ - pi_hat_).lpNorm<Eigen::Infinity>();
  if (res > opts_.point_tol) {
    std::ostringstream os;
    os << "point violates S pi_hat = pi_hat by " << res;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }

  const Vector pi = pi_hat_.cwiseProduct(pi_hat_);
  Matrix system = pi_hat_.asDiagonal() * s * pi_hat_.asDiagonal();
  system = sym_part(system);
  system.diagonal() += s * pi;
  Eigen::LLT<Matrix> factor(system);
  if (factor.info() != Eigen::Success)
    throw Error(ErrorCode::FactorizationFailure, "projection system is not positive definite");
  return ManifoldPoint(std::move(s), pi_hat_, std::move(system), std::move(factor));
}

double Manifold::inner(const ManifoldPoint& s, const TangentVector& xi, const TangentVector& eta) const {
  return (xi.xi.array() * eta.xi.array() / s.matrix().array()).sum();
}

double Manifold::norm(const ManifoldPoint& s, const TangentVector& xi) const {
  return std::sqrt(std::max(0.0, inner(s, xi, xi)));
}

Matrix Manifold::normal_component(const ManifoldPoint& s, const Vector& alpha) const {
  const Matrix outer = alpha * pi_hat_.transpose();
  return (outer + outer.transpose()).cwiseProduct(s.matrix());
}

TangentVector Manifold::project(const ManifoldPoint& s, const Matrix& z) const {
  Matrix xi = z - normal_component(s, s.solve(z * pi_hat_));
  // One step of iterative refinement on the constraint xi pi_hat = 0.
  const Vector drift = xi * pi_hat_;
  if (drift.lpNorm<Eigen::Infinity>() > 1e-14 * std::max(1.0, z.lpNorm<Eigen::Infinity>()))
    xi -= normal_component(s, s.solve(drift));
  return TangentVector(std::move(xi));
}

TangentVector Manifold::project_general(const ManifoldPoint& s, const Matrix& z) const {
  return project(s, sym_part(z));
}

TangentVector Manifold::egrad_to_rgrad(const ManifoldPoint& s, const Matrix& egrad) const {
  return project_general(s, egrad.cwiseProduct(s.matrix()));
}

GradientContext Manifold::gradient_context(const ManifoldPoint& s, Matrix egrad) const {
  GradientContext ctx;
  const Matrix gamma = egrad.cwiseProduct(s.matrix());
  ctx.alpha = s.solve(sym_part(gamma) * pi_hat_);
  ctx.rgrad = project_general(s, gamma);
  ctx.egrad = std::move(egrad);
  return ctx;
}

TangentVector Manifold::ehess_to_rhess(const ManifoldPoint& s, const Matrix& egrad, const Matrix& ehess_xi,
                                       const TangentVector& xi) const {
  return ehess_to_rhess(s, gradient_context(s, egrad), ehess_xi, xi);
}

TangentVector Manifold::ehess_to_rhess(const ManifoldPoint& s, const GradientContext& ctx, const Matrix& ehess_xi,
                                       const TangentVector& xi) const {
  const Matrix& S = s.matrix();
  const Vector pi = pi_hat_.cwiseProduct(pi_hat_);
  const Vector& alpha = ctx.alpha;

  const Matrix gamma_dot = ehess_xi.cwiseProduct(S) + ctx.egrad.cwiseProduct(xi.xi);
  // b = sym(gamma_dot) pi_hat - (diag(xi pi) + D_pihat xi D_pihat) alpha
  const Vector b = sym_part(gamma_dot) * pi_hat_ - (xi.xi * pi).cwiseProduct(alpha) -
                   pi_hat_.cwiseProduct(xi.xi * pi_hat_.cwiseProduct(alpha));
  const Vector alpha_dot = s.solve(b);

  const Matrix outer = alpha * pi_hat_.transpose();
  const Matrix dgrad =
      gamma_dot - normal_component(s, alpha_dot) - (outer + outer.transpose()).cwiseProduct(xi.xi);
  const Matrix christoffel = ctx.rgrad.xi.cwiseProduct(xi.xi).cwiseQuotient(S);
  return project_general(s, dgrad - 0.5 * christoffel);
}

ManifoldPoint Manifold::retract(const ManifoldPoint& s, const TangentVector& xi) const {
  const double c = opts_.exp_clamp;
  const Matrix e =
      s.matrix().array() * (xi.xi.array() / s.matrix().array()).max(-c).min(c).exp();
  return point(normalize_to_manifold(e, pi_hat_, opts_.sinkhorn));
}

ManifoldPoint Manifold::random_point(std::uint64_t seed) const {
  const Index n = size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = std::abs(normal(rng));
  // |N(0,1)| draws of exactly zero would leave the open cone.
  x = x.cwiseMax(1e-12);
  return point(normalize_to_manifold(sym_part(x), pi_hat_, opts_.sinkhorn));
}

TangentVector Manifold::random_tangent(const ManifoldPoint& s, std::uint64_t seed) const {
  const Index n = size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = normal(rng);
  TangentVector xi = project_general(s, z);
  const double nrm = norm(s, xi);
  if (nrm > 0.0) xi *= 1.0 / nrm;
  return xi;
}

double Manifold::tangency_residual(const TangentVector& xi) const {
  return (xi.xi * pi_hat_).lpNorm<Eigen::Infinity>();
}

void Manifold::repair_tangency(const ManifoldPoint& s, TangentVector& xi) const {
  if (tangency_residual(xi) > opts_.tangent_tol) xi = project(s, xi.xi);
}

}  // namespace revmarkov
