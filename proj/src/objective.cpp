#include "revmarkov/objective.hpp"

#include "revmarkov/error.hpp"
#include "revmarkov/sinkhorn.hpp"

#include <sstream>

namespace revmarkov {

ProblemData::ProblemData(StochasticMatrix a, StationaryDistribution pi) : a_(std::move(a)), pi_(std::move(pi)) {
  if (a_.size() != pi_.size()) throw Error(ErrorCode::ShapeMismatch, "matrix and distribution sizes differ");
  if (!(pi_.pi().minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "problem data needs a strictly positive distribution");
  inv_pi_hat_ = pi_.pi_hat().cwiseInverse();
  const Vector& ph = pi_.pi_hat();
  a_hat_ = ph.asDiagonal() * a_.matrix() * inv_pi_hat_.asDiagonal();
  a_check_ = inv_pi_hat_.asDiagonal() * a_.matrix() * ph.asDiagonal();
}

double ProblemData::cost(const Matrix& x_hat) const {
  return 0.5 * (from_manifold(x_hat) - a_.matrix()).squaredNorm();
}

double ProblemData::cost(const ManifoldPoint& x_hat) const { return cost(x_hat.matrix()); }

Matrix ProblemData::euclidean_grad(const Matrix& x_hat) const {
  return euclidean_hess_vec(x_hat) - a_check_;
}

Matrix ProblemData::euclidean_hess_vec(const Matrix& v) const {
  const Vector& pi = pi_.pi();
  return pi.cwiseInverse().asDiagonal() * v * pi.asDiagonal();
}

Matrix ProblemData::from_manifold(const Matrix& x_hat) const {
  return inv_pi_hat_.asDiagonal() * x_hat * pi_.pi_hat().asDiagonal();
}

ManifoldPoint ProblemData::to_manifold(const Manifold& m, const StochasticMatrix& b) const {
  if (b.size() != size()) throw Error(ErrorCode::ShapeMismatch, "matrix size differs from problem");
  const double db = detailed_balance_residual(b.matrix(), pi_.pi());
  if (db > 1e-12) {
    std::ostringstream os;
    os << "detailed balance violated by " << db;
    throw Error(ErrorCode::NotReversible, os.str());
  }
  Matrix s = pi_.pi_hat().asDiagonal() * b.matrix() * inv_pi_hat_.asDiagonal();
  s = (0.5 * (s + s.transpose())).eval();
  return m.point(std::move(s));
}

Matrix ProblemData::initial_guess(double floor_ratio) const {
  Matrix s = 0.5 * (a_hat_ + a_hat_.transpose());
  const double floor = floor_ratio * s.maxCoeff();
  s = s.cwiseMax(floor);
  return normalize_to_manifold(s, pi_.pi_hat());
}

double detailed_balance_residual(const Matrix& p, const Vector& pi) {
  const Matrix flux = pi.asDiagonal() * p;
  return (flux - flux.transpose()).lpNorm<Eigen::Infinity>();
}

}  // namespace revmarkov
