#include "revmarkov/markov_core.hpp"

#include "revmarkov/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace revmarkov {

namespace {

constexpr double kRowSumExactTol = 1e-12;
constexpr double kLeakTol = 1e-12;

std::string describe_entry(Index i, Index j, double v) {
  std::ostringstream os;
  os.precision(17);
  os << "entry (" << i << ", " << j << ") = " << v;
  return os.str();
}

/// Iterative Tarjan on the subgraph induced by `nodes` (local indices).
std::vector<IndexSet> strongly_connected_components(const Matrix& a, const IndexSet& nodes) {
  const Index m = static_cast<Index>(nodes.size());
  std::vector<Index> index(m, -1), low(m, 0);
  std::vector<char> on_stack(m, 0);
  std::vector<Index> stack;
  std::vector<IndexSet> components;
  Index counter = 0;

  // Frame: (local node, next neighbour to inspect).
  std::vector<std::pair<Index, Index>> call;
  for (Index root = 0; root < m; ++root) {
    if (index[root] >= 0) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      bool descended = false;
      while (next < m) {
        const Index w = next++;
        if (a(nodes[v], nodes[w]) <= 0.0) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], index[w]);
      }
      if (descended) continue;
      const Index done = v;
      call.pop_back();
      if (!call.empty()) {
        const Index parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        IndexSet comp;
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(nodes[w]);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const IndexSet& x, const IndexSet& y) { return x.front() < y.front(); });
  return components;
}

double outside_mass(const Matrix& a, Index row, const std::vector<char>& inside) {
  double leak = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    if (!inside[j]) leak += a(row, j);
  return leak;
}

}  // namespace

StochasticMatrix validate_stochastic(Matrix m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::NotSquare, std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (m.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::NegativeEntry, describe_entry(i, j, v));
    }
  }
  for (Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    const double dev = std::abs(s - 1.0);
    if (dev <= kRowSumExactTol) continue;
    if (dev <= kRowSumRepairTol) {
      m.row(i) /= s;
      continue;
    }
    std::ostringstream os;
    os.precision(17);
    os << "row " << i << " sums to " << s;
    throw Error(ErrorCode::RowSumViolation, os.str());
  }
  return StochasticMatrix(std::move(m));
}

StationaryDistribution::StationaryDistribution(Vector pi) {
  if (pi.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  for (Index i = 0; i < pi.size(); ++i) {
    if (!std::isfinite(pi[i]) || pi[i] < 0.0)
      throw Error(ErrorCode::InvalidArgument, "distribution entry " + std::to_string(i) + " is negative");
  }
  const double s = pi.sum();
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "distribution has zero mass");
  pi /= s;
  if (std::abs(pi.sum() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "distribution does not sum to 1");
  pi_ = std::move(pi);
  pi_hat_ = pi_.cwiseSqrt();
}

IndexSet StationaryDistribution::support(double transient_tol) const {
  IndexSet out;
  for (Index i = 0; i < pi_.size(); ++i)
    if (pi_[i] > transient_tol) out.push_back(i);
  return out;
}

StationaryDistribution stationary_vector(const StochasticMatrix& a, const PowerIterationOptions& opts) {
  const Index n = a.size();
  const long max_iter = opts.max_iter > 0 ? opts.max_iter : 100L * static_cast<long>(n);
  const Matrix at = a.matrix().transpose();

  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector y(n);
  auto residual = [&](const Vector& v, Vector& image) {
    image.noalias() = at * v;
    return (image - v).lpNorm<Eigen::Infinity>();
  };

  // Plain pass, then a damped pass starting from where the plain one stopped.
  for (const double theta : {0.0, opts.damping}) {
    for (long it = 0; it < max_iter; ++it) {
      const double res = residual(x, y);
      if (res <= opts.tol) return StationaryDistribution(x);
      x = (1.0 - theta) * y + theta * x;
      x /= x.sum();
    }
  }
  if (residual(x, y) <= opts.tol) return StationaryDistribution(x);
  throw Error(ErrorCode::NoConvergence,
              "power iteration did not reach tolerance within " + std::to_string(max_iter) + " iterations");
}

StationaryDistribution stationary_vector_retrying(const StochasticMatrix& a, PowerIterationOptions opts) {
  try {
    return stationary_vector(a, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoConvergence) throw;
  }
  const long base = opts.max_iter > 0 ? opts.max_iter : 100L * static_cast<long>(a.size());
  opts.max_iter = base * kSlowMixingBudget;
  return stationary_vector(a, opts);
}

IndexSet detect_transient(const StationaryDistribution& pi, double transient_tol) {
  IndexSet out;
  for (Index i = 0; i < pi.size(); ++i)
    if (pi.pi()[i] < transient_tol) out.push_back(i);
  return out;
}

IndexSet complement(const IndexSet& subset, Index n) {
  std::vector<char> in(n, 0);
  for (Index i : subset) in[i] = 1;
  IndexSet out;
  for (Index i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

Vector gather(const Vector& v, const IndexSet& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = v[idx[k]];
  return out;
}

Matrix gather(const Matrix& m, const IndexSet& idx) {
  const Index k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) out(i, j) = m(idx[i], idx[j]);
  return out;
}

StochasticMatrix restrict_to(const StochasticMatrix& a, const IndexSet& idx) {
  if (idx.empty()) throw Error(ErrorCode::InvalidArgument, "empty index set");
  std::vector<char> inside(a.size(), 0);
  for (Index i : idx) {
    if (i < 0 || i >= a.size()) throw Error(ErrorCode::InvalidArgument, "index out of range");
    inside[i] = 1;
  }
  for (Index i : idx) {
    const double leak = outside_mass(a.matrix(), i, inside);
    if (leak > kLeakTol) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " leaks " << leak;
      throw Error(ErrorCode::MassLeak, os.str());
    }
  }
  Matrix sub = gather(a.matrix(), idx);
  for (Index i = 0; i < sub.rows(); ++i) sub.row(i) /= sub.row(i).sum();
  return validate_stochastic(std::move(sub));
}

ErgodicDecomposition ergodic_classes(const StochasticMatrix& a, const IndexSet& recurrent,
                                     const StationaryDistribution* pi) {
  const Index n = a.size();
  ErgodicDecomposition dec;
  dec.classes = strongly_connected_components(a.matrix(), recurrent);
  dec.transient = complement(recurrent, n);

  for (std::size_t c = 0; c < dec.classes.size(); ++c) {
    const IndexSet& cls = dec.classes[c];
    std::vector<char> inside(n, 0);
    for (Index i : cls) inside[i] = 1;
    for (Index i : cls) {
      const double leak = outside_mass(a.matrix(), i, inside);
      if (leak > kLeakTol) {
        std::ostringstream os;
        os.precision(17);
        os << "class " << c << " (state " << i << ") has outgoing mass " << leak;
        throw Error(ErrorCode::OpenClass, os.str());
      }
    }
    dec.class_matrices.push_back(restrict_to(a, cls));
    if (pi != nullptr) {
      dec.class_pis.emplace_back(gather(pi->pi(), cls));
    } else {
      dec.class_pis.push_back(stationary_vector_retrying(dec.class_matrices.back()));
    }
    dec.permutation.insert(dec.permutation.end(), cls.begin(), cls.end());
  }
  dec.permutation.insert(dec.permutation.end(), dec.transient.begin(), dec.transient.end());
  return dec;
}

StochasticMatrix reassemble(const StochasticMatrix& a, std::span<const IndexSet> blocks,
                            const IndexSet& transient, std::span<const Matrix> solved) {
  if (blocks.size() != solved.size())
    throw Error(ErrorCode::ShapeMismatch, "block count does not match solved count");
  const Index n = a.size();
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const IndexSet& idx = blocks[k];
    const Matrix& s = solved[k];
    if (s.rows() != static_cast<Index>(idx.size()) || s.cols() != static_cast<Index>(idx.size()))
      throw Error(ErrorCode::ShapeMismatch, "solved block " + std::to_string(k) + " has wrong shape");
    for (Index j = 0; j < s.cols(); ++j)
      for (Index i = 0; i < s.rows(); ++i) p(idx[i], idx[j]) = s(i, j);
  }
  for (Index t : transient) p.row(t) = a.matrix().row(t);
  return validate_stochastic(std::move(p));
}

StochasticMatrix reassemble(const StochasticMatrix& a, const ErgodicDecomposition& dec,
                            std::span<const Matrix> solved) {
  return reassemble(a, dec.classes, dec.transient, solved);
}

}  // namespace revmarkov
