#include "revmarkov/oracle_qp.hpp"

#include "revmarkov/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace revmarkov {

AffineProjector::AffineProjector(Vector pi) : pi_(std::move(pi)) {
  const Index n = pi_.size();
  if (n == 0 || !(pi_.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "affine projector needs a strictly positive pi");
  inv_s_ = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j) inv_s_(i, j) = 1.0 / (pi_[i] * pi_[i] + pi_[j] * pi_[j]);

  // M_ii = n - pi_i^2 sum_j 1/s_ij,  M_ij = pi_i pi_j / s_ij
  Matrix m = pi_.asDiagonal() * inv_s_ * pi_.asDiagonal();
  const Vector row = inv_s_.rowwise().sum();
  for (Index i = 0; i < n; ++i) m(i, i) = static_cast<double>(n) - pi_[i] * pi_[i] * row[i];
  lu_.compute(m);
  if (!(lu_.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
    throw Error(ErrorCode::SingularConstraints, "reduced constraint system is singular");
}

Matrix AffineProjector::operator()(const Matrix& z) const {
  const Index n = size();
  if (z.rows() != n || z.cols() != n) throw Error(ErrorCode::ShapeMismatch, "projector input has wrong shape");
  const Matrix k = pi_.asDiagonal() * z - z.transpose() * pi_.asDiagonal();
  const Vector rhs = z.rowwise().sum() - Vector::Ones(n) - pi_.cwiseProduct(k.cwiseProduct(inv_s_).rowwise().sum());
  const Vector lambda = lu_.solve(rhs);

  const Vector pl = pi_.cwiseProduct(lambda);
  Matrix w = k;
  w.colwise() -= pl;
  w.rowwise() += pl.transpose();
  w = w.cwiseProduct(inv_s_);

  Matrix x = z - pi_.asDiagonal() * w;
  x.colwise() -= lambda;
  return x;
}

Matrix project_affine(const Vector& pi, const Matrix& z) { return AffineProjector(pi)(z); }

DykstraResult dykstra_nearest(const Matrix& a, const Vector& pi, const DykstraOptions& opts) {
  const Index n = a.rows();
  if (a.cols() != n || pi.size() != n) throw Error(ErrorCode::ShapeMismatch, "oracle inputs have wrong shapes");
  const AffineProjector project(pi);

  DykstraResult out;
  Matrix x = a;
  Matrix p = Matrix::Zero(n, n);
  Matrix q = Matrix::Zero(n, n);
  for (long it = 1; it <= opts.max_iter; ++it) {
    const Matrix y = project(x + p);
    p += x - y;
    Matrix next = (y + q).cwiseMax(0.0);
    q += y - next;
    out.step = (next - x).norm();
    const double gap = (next - y).norm();
    x = std::move(next);
    out.iterations = it;
    if (out.step <= opts.tol && gap <= opts.tol) {
      out.x = std::move(x);
      return out;
    }
  }
  std::ostringstream os;
  os << "Dykstra stopped after " << opts.max_iter << " iterations with step " << out.step;
  throw Error(ErrorCode::NoConvergence, os.str());
}

Matrix oracle_nearest(const StochasticMatrix& a, const std::optional<Vector>& pi_in, const DykstraOptions& opts,
                      std::optional<double> transient_tol) {
  const Index n = a.size();
  StationaryDistribution pi;
  if (pi_in) {
    if (pi_in->size() != n) throw Error(ErrorCode::ShapeMismatch, "pi length differs from matrix size");
    pi = StationaryDistribution(*pi_in);
  } else {
    pi = stationary_vector_retrying(a);
  }
  const IndexSet transient = detect_transient(pi, transient_tol.value_or(default_transient_tol(n)));
  const IndexSet recurrent = complement(transient, n);
  if (recurrent.empty()) throw Error(ErrorCode::InvalidArgument, "no recurrent states above the transient threshold");

  const StochasticMatrix sub = restrict_to(a, recurrent);
  Vector sub_pi = gather(pi.pi(), recurrent);
  sub_pi /= sub_pi.sum();
  const Matrix solved = dykstra_nearest(sub.matrix(), sub_pi, opts).x;

  Matrix p = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < recurrent.size(); ++j)
    for (std::size_t i = 0; i < recurrent.size(); ++i)
      p(recurrent[i], recurrent[j]) = solved(static_cast<Index>(i), static_cast<Index>(j));
  for (Index t : transient) p.row(t) = a.matrix().row(t);
  return p;
}

}  // namespace revmarkov
