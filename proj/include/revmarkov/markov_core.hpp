#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace revmarkov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Dense row-stochastic matrix. Instances only come out of
/// validate_stochastic(), so every row is nonnegative and sums to one.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;

  const Matrix& matrix() const noexcept { return m_; }
  Index size() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  friend StochasticMatrix validate_stochastic(Matrix m);
  explicit StochasticMatrix(Matrix m) : m_(std::move(m)) {}

  Matrix m_;
};

/// Rows whose sum is off by at most this much are renormalized; anything
/// further away is rejected.
inline constexpr double kRowSumRepairTol = 1e-9;

/// Validates M as a stochastic matrix. Throws NotSquare, NegativeEntry or
/// RowSumViolation.
StochasticMatrix validate_stochastic(Matrix m);

/// Probability vector pi with its entrywise square root cached.
class StationaryDistribution {
 public:
  StationaryDistribution() = default;

  /// Throws InvalidArgument if pi has negative entries or does not sum to one
  /// within 1e-12 after normalization.
  explicit StationaryDistribution(Vector pi);

  const Vector& pi() const noexcept { return pi_; }
  const Vector& pi_hat() const noexcept { return pi_hat_; }
  Index size() const noexcept { return pi_.size(); }

  /// {i : pi_i > transient_tol}
  IndexSet support(double transient_tol) const;

 private:
  Vector pi_;
  Vector pi_hat_;
};

struct PowerIterationOptions {
  double tol = 1e-13;
  /// 0 selects 100 * n.
  long max_iter = 0;
  /// Damping weight used once plain iteration has stalled.
  double damping = 0.1;
};

/// Left Perron vector of A by power iteration on A^T started from the uniform
/// vector. Falls back to damped iteration x <- (1-theta) x A + theta x when
/// plain iteration does not converge (periodic classes).
StationaryDistribution stationary_vector(const StochasticMatrix& a,
                                         const PowerIterationOptions& opts = {});

/// stationary_vector with the default budget, retried once with
/// kSlowMixingBudget times as many iterations on NoConvergence.
inline constexpr long kSlowMixingBudget = 100;
StationaryDistribution stationary_vector_retrying(const StochasticMatrix& a, PowerIterationOptions opts = {});

/// Default transient threshold, 1e-12 * n.
inline double default_transient_tol(Index n) { return 1e-12 * static_cast<double>(n); }

/// {i : pi_i < transient_tol}
IndexSet detect_transient(const StationaryDistribution& pi, double transient_tol);

/// Complement of `subset` in {0..n-1}, sorted.
IndexSet complement(const IndexSet& subset, Index n);

struct ErgodicDecomposition {
  /// Classes first (in order), transient states last.
  IndexSet permutation;
  std::vector<IndexSet> classes;
  IndexSet transient;
  std::vector<StochasticMatrix> class_matrices;
  std::vector<StationaryDistribution> class_pis;

  Index state_count() const noexcept { return static_cast<Index>(permutation.size()); }
};

/// Strongly connected components of the graph i -> j (A_ij > 0) restricted to
/// the recurrent states. Each component must be closed; a component leaking
/// more than 1e-12 of its row mass raises OpenClass. Classes are ordered by
/// their smallest state index and each class lists its states ascending.
///
/// If `pi` is given, class_pis holds pi restricted to each class and
/// renormalized; otherwise each class vector is computed by power iteration.
ErgodicDecomposition ergodic_classes(const StochasticMatrix& a, const IndexSet& recurrent,
                                     const StationaryDistribution* pi = nullptr);

/// idx x idx submatrix, rows renormalized. Throws MassLeak if some row has
/// more than 1e-12 of its mass outside idx.
StochasticMatrix restrict_to(const StochasticMatrix& a, const IndexSet& idx);

/// Places `solved[k]` on the block of `blocks[k]`, copies the rows of A indexed
/// by `transient` verbatim and zeros everything else.
StochasticMatrix reassemble(const StochasticMatrix& a, std::span<const IndexSet> blocks,
                            const IndexSet& transient, std::span<const Matrix> solved);

StochasticMatrix reassemble(const StochasticMatrix& a, const ErgodicDecomposition& dec,
                            std::span<const Matrix> solved);

/// Subvector of v on idx.
Vector gather(const Vector& v, const IndexSet& idx);

/// Submatrix of m on idx x idx.
Matrix gather(const Matrix& m, const IndexSet& idx);

}  // namespace revmarkov
