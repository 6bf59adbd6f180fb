#include "revmarkov/sinkhorn.hpp"

#include "revmarkov/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace revmarkov {

namespace {

// Below this relative residual the fixed point hands over to Newton.
constexpr double kNewtonZone = 1e-3;

void check_positive(const Matrix& a) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "entry (" << i << ", " << j << ") = " << v;
        throw Error(ErrorCode::NonPositiveEntry, os.str());
      }
    }
  }
}

void check_shapes(const Matrix& a, const Vector& pi_hat) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::NotSquare, "scaling needs a square matrix");
  if (pi_hat.size() != a.rows()) throw Error(ErrorCode::ShapeMismatch, "pi_hat length does not match matrix");
  if (pi_hat.size() == 0 || !(pi_hat.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "pi_hat must be strictly positive");
}

double max_relative_error(const Vector& value, const Vector& target) {
  return ((value.array() / target.array()) - 1.0).abs().maxCoeff();
}

Matrix symmetrized(const Matrix& s) { return 0.5 * (s + s.transpose()); }

Matrix scale_both_sides(const Matrix& a, const Vector& d) {
  return d.asDiagonal() * a * d.asDiagonal();
}

}  // namespace

double relative_fixed_point_residual(const Matrix& s, const Vector& pi_hat) {
  return max_relative_error(s * pi_hat, pi_hat);
}

ScalingResult balance_symmetric(const Matrix& a_in, const Vector& pi_hat, const SinkhornOptions& opts) {
  check_shapes(a_in, pi_hat);
  check_positive(a_in);
  const double scale = std::max(1.0, a_in.cwiseAbs().maxCoeff());
  if ((a_in - a_in.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::InvalidArgument, "balance_symmetric needs a symmetric matrix");

  const Index n = a_in.rows();
  const Vector pi = pi_hat.cwiseProduct(pi_hat);
  Matrix ahat = pi_hat.asDiagonal() * a_in.cwiseMax(kSinkhornFloor) * pi_hat.asDiagonal();
  ahat = symmetrized(ahat);

  Vector e = Vector::Ones(n);
  Vector v = ahat * e;
  Vector r = e.cwiseProduct(v);
  double rel = max_relative_error(r, pi);

  ScalingResult out;
  long it = 0;
  for (; it < opts.max_iter && rel > opts.tol; ++it) {
    bool stepped = false;
    if (rel < kNewtonZone) {
      // (diag(r) + E Ahat E) y = pi - r, then e <- e .* (1 + y).
      Matrix jac = e.asDiagonal() * ahat * e.asDiagonal();
      jac.diagonal() += r;
      Eigen::LLT<Matrix> llt(jac);
      if (llt.info() == Eigen::Success) {
        const Vector y = llt.solve(pi - r);
        double step = 1.0;
        for (int halving = 0; halving < 30 && !stepped; ++halving, step *= 0.5) {
          const Vector factor = (1.0 + step * y.array()).matrix();
          if (!(factor.minCoeff() > 0.0)) continue;
          const Vector e_try = e.cwiseProduct(factor);
          const Vector v_try = ahat * e_try;
          const Vector r_try = e_try.cwiseProduct(v_try);
          const double rel_try = max_relative_error(r_try, pi);
          if (rel_try < rel) {
            e = e_try;
            v = v_try;
            r = r_try;
            rel = rel_try;
            stepped = true;
          }
        }
      }
    }
    if (!stepped) {
      e = (e.array() * pi.array() / v.array()).sqrt().matrix();
      v.noalias() = ahat * e;
      r = e.cwiseProduct(v);
      rel = max_relative_error(r, pi);
    }
  }

  out.d = e;
  out.iterations = it;
  out.residual = ((r - pi).array() / pi_hat.array()).abs().maxCoeff();
  if (!(rel <= opts.tol)) {
    std::ostringstream os;
    os << "symmetric scaling stopped after " << it << " iterations with relative residual " << rel;
    throw Error(ErrorCode::NoConvergence, os.str());
  }
  return out;
}

Matrix normalize_to_manifold(const Matrix& y, const Vector& pi_hat, const SinkhornOptions& opts) {
  check_shapes(y, pi_hat);
  check_positive(y);

  Matrix sym;
  if (y == y.transpose()) {
    sym = y;
  } else {
    const Vector pi = pi_hat.cwiseProduct(pi_hat);
    const Matrix yhat = pi_hat.asDiagonal() * y.cwiseMax(kSinkhornFloor) * pi_hat.asDiagonal();
    Vector row = Vector::Ones(y.rows());
    Vector col = Vector::Ones(y.rows());
    for (long it = 0; it < opts.max_iter; ++it) {
      col = pi.cwiseQuotient(yhat.transpose() * row);
      row = pi.cwiseQuotient(yhat * col);
      const Vector col_sums = col.cwiseProduct(yhat.transpose() * row);
      if (max_relative_error(col_sums, pi) <= opts.tol) break;
    }
    const Matrix t = row.asDiagonal() * yhat * col.asDiagonal();
    const Vector inv = pi_hat.cwiseInverse();
    sym = symmetrized(inv.asDiagonal() * symmetrized(t) * inv.asDiagonal());
  }

  const ScalingResult scaling = balance_symmetric(sym, pi_hat, opts);
  Matrix s = symmetrized(scale_both_sides(sym, scaling.d));
  return s;
}

}  // namespace revmarkov
