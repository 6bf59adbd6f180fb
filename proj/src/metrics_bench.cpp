#include "revmarkov/metrics_bench.hpp"

#include "revmarkov/error.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

namespace revmarkov {

MetricSet compute_metrics(const Matrix& a, const Matrix& p, const Vector& pi, double wall_time_s) {
  const Index n = a.rows();
  if (a.cols() != n || p.rows() != n || p.cols() != n || pi.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "metric inputs have inconsistent sizes");
  MetricSet m;
  const double an = a.norm();
  m.rel_frobenius = an > 0.0 ? (a - p).norm() / an : (a - p).norm();
  const Matrix flux = pi.asDiagonal() * p;
  m.detailed_balance_inf = (flux - flux.transpose()).lpNorm<Eigen::Infinity>();
  m.stationarity_inf = (p.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  m.stochasticity_inf = (p.rowwise().sum() - Vector::Ones(n)).lpNorm<Eigen::Infinity>();
  m.wall_time_s = wall_time_s;
  return m;
}

namespace {

double induced_inf(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

std::pair<double, double> perturbation_lower_bound(const Matrix& p, const Vector& pi, const Vector& delta) {
  const Index n = p.rows();
  if (p.cols() != n || pi.size() != n || delta.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "lower bound inputs have inconsistent sizes");
  if (n == 1 || delta.lpNorm<Eigen::Infinity>() == 0.0) return {0.0, 0.0};

  const Matrix fundamental = Matrix::Identity(n, n) - p + Vector::Ones(n) * pi.transpose();
  Eigen::PartialPivLU<Matrix> lu(fundamental);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon()))
    throw Error(ErrorCode::SingularFundamentalMatrix, "I - P + 1 pi^T is numerically singular");
  const Matrix z = lu.inverse();
  const Vector shifted = pi + delta;
  const double first = delta.lpNorm<1>() / (induced_inf(z) * shifted.lpNorm<1>());
  const double second =
      delta.lpNorm<Eigen::Infinity>() / (induced_inf(z.transpose()) * shifted.lpNorm<Eigen::Infinity>());
  return {first, second};
}

std::vector<ProfileCurve> performance_profile(const ProfileTable& table) {
  const std::size_t ns = table.solvers.size();
  if (table.value.size() != ns) throw Error(ErrorCode::ShapeMismatch, "profile table rows != solvers");
  if (ns == 0) return {};
  const std::size_t np = table.value.front().size();
  for (const auto& row : table.value)
    if (row.size() != np) throw Error(ErrorCode::ShapeMismatch, "ragged profile table");

  std::vector<std::vector<double>> ratio(ns, std::vector<double>(np, std::numeric_limits<double>::infinity()));
  for (std::size_t p = 0; p < np; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < ns; ++s) {
      const double v = table.value[s][p];
      if (std::isfinite(v)) best = std::min(best, std::max(v, kProfileFloor));
    }
    if (!std::isfinite(best)) continue;
    for (std::size_t s = 0; s < ns; ++s) {
      const double v = table.value[s][p];
      if (std::isfinite(v)) ratio[s][p] = std::max(v, kProfileFloor) / best;
    }
  }

  std::vector<ProfileCurve> curves;
  for (std::size_t s = 0; s < ns; ++s) {
    ProfileCurve c{table.solvers[s], table.metric, {}};
    std::vector<double> r;
    for (double x : ratio[s])
      if (std::isfinite(x)) r.push_back(x);
    std::sort(r.begin(), r.end());
    const double denom = np > 0 ? static_cast<double>(np) : 1.0;
    if (r.empty() || r.front() > 1.0) c.points.push_back({1.0, 0.0});
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k + 1 < r.size() && r[k + 1] == r[k]) continue;
      c.points.push_back({r[k], static_cast<double>(k + 1) / denom});
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

void write_profile_csv(std::ostream& os, const std::vector<ProfileCurve>& curves) {
  os << "solver,metric,tau,rho\n";
  os << std::setprecision(17);
  for (const auto& c : curves)
    for (const auto& pt : c.points) os << c.solver << ',' << c.metric << ',' << pt.tau << ',' << pt.rho << '\n';
}

}  // namespace revmarkov
